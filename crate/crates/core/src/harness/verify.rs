//! The invariant suite behind `verify`: machine checks for every
//! operator-level and run-level contract, sized by a `quick` flag.
//!
//! Each check returns a pass/fail result with a one-line detail string;
//! the suite passes only if all checks do.

use ndarray::Array1;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{IndexSampler, SamplerStrategy};
use crate::error::Result;
use crate::harness::config::{ProblemSource, RunConfig};
use crate::harness::solve::run_solve;
use crate::harness::trace::Trace;
use crate::lcu::{lcu_apply, LcuPlan};
use crate::oracles::{apply_ut_via_factorization, build_column_oracle, build_row_oracle};
use crate::problem::{generate, norm2, random_unit_vector, LinearSystem, ProblemKind, ProblemSpec};
use crate::qcd::QCdRun;
use crate::qkaczmarz::{QKaczmarzRun, BLOCK_EQUALITY_TOL};
use crate::readout::{overlap_exact, overlap_sampled};
use crate::simstate::{dense, SimState, DEFAULT_AMPLITUDE_CAP};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub details: String,
}

impl CheckResult {
    fn new(name: &str, passed: bool, details: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            details,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub quick: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub quick: bool,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            quick: false,
            seed: 1,
        }
    }
}

/// Runs the whole suite.
pub fn run_suite(opts: &VerifyOptions) -> VerifyReport {
    let checks = vec![
        check_operator_orthogonality(opts),
        check_involutions(opts),
        check_state_prep_factorization(opts),
        check_lcu_equivalence(opts),
        check_dense_equivalence(opts),
        check_kaczmarz_block_equality(opts),
        check_mu_expectation(opts),
        check_cd_block_equality(opts),
        check_readout_contract(opts),
        check_determinism(opts),
    ];
    VerifyReport {
        quick: opts.quick,
        checks,
    }
}

fn random_unit(dim: usize, seed: u64) -> Array1<f64> {
    let mut rng: ChaCha8Rng = rand::SeedableRng::seed_from_u64(seed);
    random_unit_vector(dim, &mut rng)
}

fn random_state(q: usize, dim: usize, seed: u64) -> SimState {
    let mut rng: ChaCha8Rng = rand::SeedableRng::seed_from_u64(seed);
    let len = (1usize << q) * dim;
    let mut amps: Vec<f64> = (0..len).map(|_| rng.random::<f64>() - 0.5).collect();
    let norm = amps.iter().map(|x| x * x).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|x| *x /= norm);
    SimState::from_amplitudes(q, dim, amps).expect("random state construction")
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// All constructed operators are orthogonal: `‖OᵀO − I‖_max ≤ 1e-12`.
pub fn check_operator_orthogonality(opts: &VerifyOptions) -> CheckResult {
    let mut worst: f64 = 0.0;
    for n in [2usize, 4] {
        for seed in 0..4u64 {
            let a = random_unit(n, opts.seed.wrapping_add(seed * 31));
            worst = worst.max(dense::orthogonality_defect(&dense::ut(
                2,
                a.as_slice().unwrap(),
                1,
            )));
            worst = worst.max(dense::orthogonality_defect(
                &build_row_oracle(a.view()).unwrap().to_matrix(),
            ));
            worst = worst.max(dense::orthogonality_defect(
                &build_column_oracle(a.view(), n - 1).unwrap().to_matrix(),
            ));
        }
        worst = worst.max(dense::orthogonality_defect(&dense::wt(2, n, n - 1, (1, 2))));
        worst = worst.max(dense::orthogonality_defect(&dense::gk(2, n, 3, 2)));
        worst = worst.max(dense::orthogonality_defect(&dense::swap(3, n, 1, 3)));
    }
    CheckResult::new(
        "operator-orthogonality",
        worst <= 1e-12,
        format!("max ‖OᵀO − I‖ = {worst:.2e} (tol 1e-12)"),
    )
}

/// `U_t² = I` and `W_t² = I` on random states.
pub fn check_involutions(opts: &VerifyOptions) -> CheckResult {
    let trials = if opts.quick { 10 } else { 40 };
    let mut worst: f64 = 0.0;
    for seed in 0..trials {
        let a = random_unit(8, opts.seed.wrapping_add(seed));
        let state = random_state(2, 8, opts.seed.wrapping_add(1000 + seed));
        let mut twice = state.clone();
        twice.apply_ut(a.as_slice().unwrap(), 1).unwrap();
        twice.apply_ut(a.as_slice().unwrap(), 1).unwrap();
        worst = worst.max(max_abs_diff(twice.amps(), state.amps()));

        let mut twice = state.clone();
        twice.apply_wt(5, (1, 2)).unwrap();
        twice.apply_wt(5, (1, 2)).unwrap();
        worst = worst.max(max_abs_diff(twice.amps(), state.amps()));
    }
    CheckResult::new(
        "involutions",
        worst <= 1e-12,
        format!("max |O²ψ − ψ| = {worst:.2e} over {trials} random states (tol 1e-12)"),
    )
}

/// The conjugated route `(I⊗V)(flip at e₀)(I⊗Vᵀ)` equals the direct
/// controlled flip on random pairs.
pub fn check_state_prep_factorization(opts: &VerifyOptions) -> CheckResult {
    let pairs = if opts.quick { 20 } else { 100 };
    let mut worst: f64 = 0.0;
    for seed in 0..pairs {
        let a = random_unit(8, opts.seed.wrapping_add(seed));
        let v = build_row_oracle(a.view()).unwrap();
        let state = random_state(1, 8, opts.seed.wrapping_add(5000 + seed));
        let mut direct = state.clone();
        direct.apply_ut(a.as_slice().unwrap(), 1).unwrap();
        let mut factored = state;
        apply_ut_via_factorization(&mut factored, &v, 1).unwrap();
        worst = worst.max(max_abs_diff(direct.amps(), factored.amps()));
    }
    CheckResult::new(
        "state-prep-factorization",
        worst <= 1e-12,
        format!("max route difference = {worst:.2e} over {pairs} pairs (tol 1e-12)"),
    )
}

/// The combination circuit's zero block equals the direct projection.
pub fn check_lcu_equivalence(opts: &VerifyOptions) -> CheckResult {
    let pairs = if opts.quick { 20 } else { 100 };
    let mut worst: f64 = 0.0;
    for seed in 0..pairs {
        let a = random_unit(8, opts.seed.wrapping_add(300 + seed));
        let psi = random_unit(8, opts.seed.wrapping_add(9000 + seed));
        let plan = LcuPlan::projection(a.view()).unwrap();
        let out = lcu_apply(&plan, psi.as_slice().unwrap()).unwrap();
        let (block, _) = out.zero_block();
        let want = &psi - &(&a * a.dot(&psi));
        worst = worst.max(max_abs_diff(
            block.as_slice().unwrap(),
            want.as_slice().unwrap(),
        ));
    }
    CheckResult::new(
        "lcu-equivalence",
        worst <= 1e-12,
        format!("max |zero block − (I−aaᵀ)ψ| = {worst:.2e} over {pairs} pairs (tol 1e-12)"),
    )
}

/// Every structured operator matches its literal dense construction at
/// small sizes; the solution-update composite matches the dense product.
pub fn check_dense_equivalence(opts: &VerifyOptions) -> CheckResult {
    let mut worst_ops: f64 = 0.0;
    for q in 1..=3usize {
        for n in [2usize, 4] {
            let seed = opts.seed.wrapping_add((q * 10 + n) as u64);
            let a = random_unit(n, seed);
            let state = random_state(q, n, seed.wrapping_add(1));

            for target in 1..=q {
                let mut st = state.clone();
                st.apply_ut(a.as_slice().unwrap(), target).unwrap();
                let want = dense::apply(&dense::ut(q, a.as_slice().unwrap(), target), state.amps());
                worst_ops = worst_ops.max(max_abs_diff(st.amps(), &want));
            }
            let mut st = state.clone();
            st.apply_gk(q, 1).unwrap();
            let want = dense::apply(&dense::gk(q, n, q, 1), state.amps());
            worst_ops = worst_ops.max(max_abs_diff(st.amps(), &want));
            if q >= 2 {
                let mut st = state.clone();
                st.apply_wt(n - 1, (1, q)).unwrap();
                let want = dense::apply(&dense::wt(q, n, n - 1, (1, q)), state.amps());
                worst_ops = worst_ops.max(max_abs_diff(st.amps(), &want));

                let mut st = state.clone();
                st.swap_qubits(1, q).unwrap();
                let want = dense::apply(&dense::swap(q, n, 1, q), state.amps());
                worst_ops = worst_ops.max(max_abs_diff(st.amps(), &want));
            }
        }
    }

    // Solution-update composite (plain encoding): G · W · SWAP(1,q−1) ·
    // SWAP(2,q) on 2k+2 ancillas, structured versus dense product.
    let mut worst_composite: f64 = 0.0;
    for k in 0..=2usize {
        let n = 4;
        let q = 2 * k + 2;
        let t = 2;
        let state = random_state(q, n, opts.seed.wrapping_add(70 + k as u64));
        let mut structured = state.clone();
        structured.swap_qubits(2, q).unwrap();
        structured.swap_qubits(1, q - 1).unwrap();
        structured.apply_wt(t, (q - 1, q)).unwrap();
        structured.apply_gk(k, q).unwrap();

        let composite = dense::gk(q, n, k, q)
            .dot(&dense::wt(q, n, t, (q - 1, q)))
            .dot(&dense::swap(q, n, 1, q - 1))
            .dot(&dense::swap(q, n, 2, q));
        let want = dense::apply(&composite, state.amps());
        worst_composite = worst_composite.max(max_abs_diff(structured.amps(), &want));
    }
    let passed = worst_ops <= 1e-13 && worst_composite <= 1e-12;
    CheckResult::new(
        "dense-equivalence",
        passed,
        format!(
            "ops max diff = {worst_ops:.2e} (tol 1e-13); composite max diff = {worst_composite:.2e} (tol 1e-12)"
        ),
    )
}

/// Per-step block equality, norm preservation, normalization recurrence,
/// and oracle-call linearity for the row-action engine.
pub fn check_kaczmarz_block_equality(opts: &VerifyOptions) -> CheckResult {
    let (dims, seeds, steps): (&[usize], u64, usize) = if opts.quick {
        (&[4], 3, 6)
    } else {
        (&[4, 8], 10, 12)
    };
    let mut worst_block: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    let mut worst_mu: f64 = 0.0;
    let mut calls_linear = true;
    for &n in dims {
        for seed in 0..seeds {
            let spec = ProblemSpec::new(ProblemKind::RandomConsistent, n, seed);
            let sys = generate(&spec).unwrap().normalize_rows().unwrap();
            let mut sampler = IndexSampler::for_rows(&sys, SamplerStrategy::Uniform, seed);
            let x0 = random_unit(n, opts.seed.wrapping_add(seed));
            let mut run = QKaczmarzRun::init(&sys, &x0).unwrap();
            let mut previous_calls = 0;
            for _ in 0..steps {
                run.step(sampler.sample()).unwrap();
                worst_block = worst_block.max(run.block_deviation());
                worst_norm = worst_norm.max((run.state().norm() - 1.0).abs());
                worst_mu = worst_mu.max(run.mu_recurrence_deviation());
                let delta = run.oracle_calls() - previous_calls;
                calls_linear &= delta == crate::qkaczmarz::ORACLE_CALLS_PER_STEP;
                previous_calls = run.oracle_calls();
            }
        }
    }
    let passed = worst_block <= BLOCK_EQUALITY_TOL
        && worst_norm <= 1e-10
        && worst_mu <= 1e-12
        && calls_linear;
    CheckResult::new(
        "kaczmarz-block-equality",
        passed,
        format!(
            "block dev = {worst_block:.2e} (tol 1e-10); norm drift = {worst_norm:.2e}; μ recurrence = {worst_mu:.2e}; calls linear = {calls_linear}"
        ),
    )
}

/// Block equality for the column-action engine under all residual
/// encodings, plus the `‖x_k‖ ≤ k+1` bound.
pub fn check_cd_block_equality(opts: &VerifyOptions) -> CheckResult {
    let (n, seeds, steps) = if opts.quick {
        (4, 2u64, 4)
    } else {
        (8, 6u64, 8)
    };
    let mut worst_solution: f64 = 0.0;
    let mut worst_residual: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    let mut bound_ok = true;
    for residual_scale in [1.0, 0.5, 2.0] {
        for seed in 0..seeds {
            let (sys, x0) = consistent_system_with_residual_norm(
                n,
                seed.wrapping_add(opts.seed),
                residual_scale,
            );
            let mut sampler = IndexSampler::for_columns(&sys, SamplerStrategy::Uniform, seed);
            let mut run = QCdRun::init(&sys, &x0).unwrap();
            for _ in 0..steps {
                run.step(sampler.sample()).unwrap();
                worst_solution = worst_solution.max(run.solution_deviation());
                worst_residual = worst_residual.max(run.residual_deviation());
                worst_norm = worst_norm
                    .max((run.solution_state().norm() - 1.0).abs())
                    .max((run.residual_state().norm() - 1.0).abs());
                bound_ok &= run.solution_norm_bound_ok();
                bound_ok &= run.scaled_residual_weight() <= 1.0 + 1e-12;
            }
        }
    }
    let passed = worst_solution <= BLOCK_EQUALITY_TOL
        && worst_residual <= BLOCK_EQUALITY_TOL
        && worst_norm <= 1e-10
        && bound_ok;
    CheckResult::new(
        "cd-block-equality",
        passed,
        format!(
            "solution dev = {worst_solution:.2e}, residual dev = {worst_residual:.2e} (tol 1e-10); norm drift = {worst_norm:.2e}; ‖x‖ ≤ k+1: {bound_ok}"
        ),
    )
}

/// Column-normalized consistent system with `‖b − A x₀‖` equal to
/// `residual_norm` exactly, for a deterministic unit `x₀`.
pub fn consistent_system_with_residual_norm(
    n: usize,
    seed: u64,
    residual_norm: f64,
) -> (LinearSystem, Array1<f64>) {
    let spec = ProblemSpec::new(ProblemKind::RandomConsistent, n, seed);
    let base = generate(&spec).unwrap().normalize_columns().unwrap();
    let mut x0 = Array1::zeros(n);
    x0[0] = 1.0;
    let mut rng: ChaCha8Rng = rand::SeedableRng::seed_from_u64(seed ^ 0x5eed);
    let z = random_unit_vector(n, &mut rng);
    let az = base.matrix().dot(&z);
    let scale = residual_norm / norm2(az.view());
    let xstar = &x0 + &(z * scale);
    let b = base.matrix().dot(&xstar);
    let sys = LinearSystem::new(base.matrix().clone(), b)
        .unwrap()
        .normalize_columns()
        .unwrap();
    (sys, x0)
}

/// Report of the uniform-sampling normalization expectation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpectationReport {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub empirical_mean: f64,
    pub standard_error: f64,
    /// `1 + (k/n)‖b‖²`, consistent with the recurrence `μ₀ = 1`,
    /// `μ_{i+1}² = μ_i² + b_{t_i}²` over `k` drawn terms.
    pub recurrence_form: f64,
    /// `1 + ((k−1)/n)‖b‖²`, the form with one fewer term.
    pub k_minus_one_form: f64,
    pub z_score: f64,
    pub passed: bool,
}

/// Monte-Carlo check of `E[μ_k²]` under uniform sampling: `μ_k²` needs no
/// statevector, only the drawn rhs entries.
pub fn expectation_check(
    n: usize,
    trials: usize,
    k: usize,
    seed: u64,
) -> Result<ExpectationReport> {
    if trials < 2 {
        return Err(crate::error::Error::Config(
            "expectation check needs at least two trials".into(),
        ));
    }
    let spec = ProblemSpec::new(ProblemKind::RandomConsistent, n, seed);
    let sys = generate(&spec)?.normalize_rows()?;
    let b = sys.rhs().clone();
    let rows = sys.rows();
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng: ChaCha8Rng =
                rand::SeedableRng::seed_from_u64(seed ^ (trial as u64).wrapping_mul(0x9e3779b9));
            let mut mu_sq = 1.0;
            for _ in 0..k {
                let t = rng.random_range(0..rows);
                mu_sq += b[t] * b[t];
            }
            mu_sq
        })
        .collect();
    let mean = samples.iter().sum::<f64>() / trials as f64;
    let variance =
        samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (trials - 1) as f64;
    let se = (variance / trials as f64).sqrt();
    let b_norm_sq: f64 = (0..rows).map(|i| b[i] * b[i]).sum();
    let recurrence_form = 1.0 + (k as f64 / rows as f64) * b_norm_sq;
    let k_minus_one_form = 1.0 + ((k as f64 - 1.0) / rows as f64) * b_norm_sq;
    let z_score = if se > 0.0 {
        (mean - recurrence_form) / se
    } else {
        0.0
    };
    Ok(ExpectationReport {
        n,
        k,
        trials,
        empirical_mean: mean,
        standard_error: se,
        recurrence_form,
        k_minus_one_form,
        z_score,
        passed: z_score.abs() <= 4.0,
    })
}

pub fn check_mu_expectation(opts: &VerifyOptions) -> CheckResult {
    let trials = if opts.quick { 2000 } else { 10_000 };
    match expectation_check(8, trials, 8, opts.seed) {
        Ok(report) => CheckResult::new(
            "mu-expectation",
            report.passed,
            format!(
                "mean μ_k² = {:.6} vs closed form {:.6} (|z| = {:.2} ≤ 4, {} trials; k−1 form {:.6})",
                report.empirical_mean,
                report.recurrence_form,
                report.z_score.abs(),
                report.trials,
                report.k_minus_one_form
            ),
        ),
        Err(e) => CheckResult::new("mu-expectation", false, format!("errored: {e}")),
    }
}

/// Sampled signed-overlap readout stays within `ε` of `x_k · c` after the
/// `μ_k‖c‖` rescaling, in at least 95% of seeded trials.
pub fn check_readout_contract(opts: &VerifyOptions) -> CheckResult {
    let trials = if opts.quick { 50 } else { 200 };
    let epsilon = 0.05;
    let spec = ProblemSpec::new(ProblemKind::RandomConsistent, 8, opts.seed);
    let sys = generate(&spec).unwrap().normalize_rows().unwrap();
    let mut sampler = IndexSampler::for_rows(&sys, SamplerStrategy::Uniform, opts.seed);
    let x0 = random_unit(8, opts.seed.wrapping_add(17));
    let run = QKaczmarzRun::run(&sys, &x0, &mut sampler, 8, 1, DEFAULT_AMPLITUDE_CAP).unwrap();

    let c = &random_unit(8, opts.seed.wrapping_add(23)) * 1.7; // unnormalized probe
    let c_norm = norm2(c.view());
    let exact_target = run.classical().x.dot(&c);
    let exact_overlap = overlap_exact(run.state(), c.view()).unwrap();
    let identity_gap = (exact_overlap * run.mu() * c_norm - exact_target).abs();

    let successes = (0..trials)
        .into_par_iter()
        .filter(|trial| {
            let mut rng: ChaCha8Rng =
                rand::SeedableRng::seed_from_u64(opts.seed ^ ((*trial as u64) << 20));
            let est = overlap_sampled(run.state(), c.view(), epsilon, run.mu(), c_norm, &mut rng)
                .unwrap();
            (est.value * run.mu() * c_norm - exact_target).abs() <= epsilon
        })
        .count();
    let fraction = successes as f64 / trials as f64;
    let passed = fraction >= 0.95 && identity_gap <= 1e-10;
    CheckResult::new(
        "readout-contract",
        passed,
        format!(
            "{successes}/{trials} trials within ε = {epsilon} ({:.1}%); exact rescaling gap = {identity_gap:.2e}",
            fraction * 100.0
        ),
    )
}

/// Identical configurations yield identical traces (timing stripped).
pub fn check_determinism(opts: &VerifyOptions) -> CheckResult {
    let run_once = || -> Result<String> {
        let config = RunConfig::new(
            "kaczmarz",
            ProblemSource::Spec(ProblemSpec::new(
                ProblemKind::RandomConsistent,
                4,
                opts.seed,
            )),
            6,
            opts.seed,
        );
        let outcome = run_solve(&config)?;
        Trace::canonical_without_timing(&outcome.trace.to_jsonl()?)
    };
    match (run_once(), run_once()) {
        (Ok(a), Ok(b)) => CheckResult::new(
            "determinism",
            a == b,
            if a == b {
                format!(
                    "two runs produced byte-identical traces ({} bytes)",
                    a.len()
                )
            } else {
                "trace bytes differ between identical configs".into()
            },
        ),
        (Err(e), _) | (_, Err(e)) => {
            CheckResult::new("determinism", false, format!("errored: {e}"))
        }
    }
}
