//! Runs both quantum engines on one random instance and prints the
//! per-step block-equality deviations they are verified against.

use ndarray::Array1;

use qils_core::classical::{IndexSampler, SamplerStrategy};
use qils_core::problem::{generate, ProblemKind, ProblemSpec};
use qils_core::qcd::QCdRun;
use qils_core::qkaczmarz::QKaczmarzRun;
use qils_core::readout::overlap_exact;

fn main() -> qils_core::Result<()> {
    let spec = ProblemSpec::new(ProblemKind::RandomConsistent, 8, 7);
    let mut x0 = Array1::zeros(8);
    x0[0] = 1.0;

    println!("row action (one ancilla per step):");
    let sys = generate(&spec)?.normalize_rows()?;
    let mut sampler = IndexSampler::for_rows(&sys, SamplerStrategy::Uniform, 1);
    let mut run = QKaczmarzRun::init(&sys, &x0)?;
    for _ in 0..10 {
        run.step(sampler.sample())?;
        println!(
            "  k={:>2}  mu={:.6}  residual={:.3e}  block dev={:.2e}",
            run.k(),
            run.mu(),
            run.classical_residual_norm(),
            run.block_deviation()
        );
    }
    let probe = sys.rhs().clone();
    let overlap = overlap_exact(run.state(), probe.view())?;
    println!("  overlap of encoded iterate with b-hat: {overlap:.6}");

    println!("column action (two ancillas per step):");
    let sys = generate(&spec)?.normalize_columns()?;
    let mut sampler = IndexSampler::for_columns(&sys, SamplerStrategy::Uniform, 1);
    let mut run = QCdRun::init(&sys, &x0)?;
    for _ in 0..6 {
        run.step(sampler.sample())?;
        println!(
            "  k={:>2}  rho={:.3}  residual={:.3e}  solution dev={:.2e}  residual dev={:.2e}",
            run.k(),
            run.rho(),
            run.classical_residual_norm(),
            run.solution_deviation(),
            run.residual_deviation()
        );
    }
    Ok(())
}
