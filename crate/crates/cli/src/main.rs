//! Command line front end: paired quantum+classical solves, classical-only
//! runs, the verification suite, step benchmarks, and overlap readout.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use qils_core::harness::{bench, run_solve, ProblemSource, RunConfig, SolveOutcome, VerifyOptions};
use qils_core::problem::{self, ProblemKind, ProblemSpec};
use qils_core::readout::{overlap_exact, overlap_sampled, OverlapMode};

#[derive(Parser)]
#[command(
    name = "qils",
    version,
    about = "Exact co-simulation of block-encoded Kaczmarz and coordinate-descent solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a paired quantum+classical solve and emit a trace.
    Solve(SolveArgs),
    /// Run the classical iteration only (scales to large n).
    Classical(ClassicalArgs),
    /// Run the invariant suite; exit 0 only if every check passes.
    Verify(VerifyArgs),
    /// Time per-step cost as the state grows.
    Bench(BenchArgs),
    /// Estimate the overlap of the encoded iterate with a probe vector.
    Readout(ReadoutArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// Dimension of the generated instance.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Instance family: identity | random-orthogonal-rows |
    /// random-consistent | random-general.
    #[arg(long, default_value = "random-consistent")]
    kind: String,
    /// Seed of the generated instance; defaults to --seed.
    #[arg(long)]
    problem_seed: Option<u64>,
    /// Matrix file (.json schema, or MatrixMarket with --rhs).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Right-hand-side vector file for MatrixMarket input.
    #[arg(long)]
    rhs: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 12)]
    steps: usize,
    /// Seed of the index-sampling stream.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// uniform | norm-proportional
    #[arg(long, default_value = "uniform")]
    sampler: String,
    /// Block-equality check cadence (0 = only implicit checks).
    #[arg(long, default_value_t = 1)]
    check_every: usize,
    /// Amplitude cap; defaults to QILS_AMPLITUDE_CAP or 2^26.
    #[arg(long)]
    amplitude_cap: Option<usize>,
    /// Start vector: basis0 | random | zero (classical only).
    #[arg(long, default_value = "basis0")]
    x0: String,
    /// Early-stop residual tolerance (0 disables).
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    /// Trace output path (JSON lines).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Load the full run configuration from a JSON file instead of flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// kaczmarz | cd | classical-kaczmarz | classical-cd
    #[arg(long, default_value = "kaczmarz")]
    algorithm: String,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    run: RunArgs,
    /// Write a JSON dump of the final quantum state to this path.
    #[arg(long)]
    dump_state: Option<PathBuf>,
}

#[derive(Args)]
struct ClassicalArgs {
    /// kaczmarz | cd
    #[arg(long, default_value = "kaczmarz")]
    algorithm: String,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Smaller sizes and fewer trials; the CI entry point.
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// kaczmarz | cd
    #[arg(long, default_value = "kaczmarz")]
    algorithm: String,
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 12)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ReadoutArgs {
    /// Probe vector file (plain text, may be unnormalized).
    #[arg(long)]
    probe: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// exact | sampled
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long, default_value = "kaczmarz")]
    algorithm: String,
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    run: RunArgs,
}

fn build_config(
    algorithm: &str,
    problem: &ProblemArgs,
    run: &RunArgs,
) -> anyhow::Result<RunConfig> {
    if let Some(path) = &run.config {
        return RunConfig::from_json_file(path)
            .with_context(|| format!("loading config {}", path.display()));
    }
    let source = match &problem.input {
        Some(path) => ProblemSource::File {
            path: path.clone(),
            rhs: problem.rhs.clone(),
        },
        None => {
            let kind: ProblemKind = problem.kind.parse()?;
            ProblemSource::Spec(ProblemSpec::new(
                kind,
                problem.n,
                problem.problem_seed.unwrap_or(run.seed),
            ))
        }
    };
    let mut config = RunConfig::new(algorithm, source, run.steps, run.seed);
    config.sampler = run.sampler.parse()?;
    config.check_every = run.check_every;
    config.amplitude_cap = run.amplitude_cap;
    config.x0 = run.x0.parse()?;
    config.residual_tol = run.tol;
    config.output = run.output.clone();
    Ok(config)
}

fn print_summary(outcome: &SolveOutcome) {
    let trace = &outcome.trace;
    let last = trace.records.last().expect("trace has an initial record");
    println!("algorithm:        {}", trace.header.algorithm);
    println!("steps:            {}", last.k);
    if let Some(mu) = last.mu {
        println!("normalization:    {mu:.12}");
    }
    if let Some(r) = last.classical_residual_norm {
        println!("residual norm:    {r:.6e}");
    }
    if let Some(worst) = trace.worst_block_fidelity() {
        println!("worst block dev:  {worst:.3e}");
    }
    if let Some(p) = last.success_probability {
        println!("success prob:     {p:.6}");
    }
    println!("oracle calls:     {}", last.oracle_calls);
    println!("state amplitudes: {}", last.state_amplitudes);
}

fn cmd_solve(args: &SolveArgs) -> anyhow::Result<()> {
    let config = build_config(&args.algorithm, &args.problem, &args.run)?;
    let outcome = run_solve(&config)?;
    print_summary(&outcome);
    if let Some(path) = &config.output {
        println!("trace:            {}", path.display());
    }
    if let Some(path) = &args.dump_state {
        let state = outcome
            .engine
            .quantum_state()
            .ok_or_else(|| anyhow!("--dump-state needs a quantum algorithm"))?;
        std::fs::write(path, serde_json::to_string_pretty(&state.debug_dump(64))?)?;
        println!("state dump:       {}", path.display());
    }
    Ok(())
}

fn cmd_classical(args: &ClassicalArgs) -> anyhow::Result<()> {
    let name = match args.algorithm.as_str() {
        "kaczmarz" => "classical-kaczmarz",
        "cd" => "classical-cd",
        other => bail!("classical algorithm must be 'kaczmarz' or 'cd', got '{other}'"),
    };
    let config = build_config(name, &args.problem, &args.run)?;
    let outcome = run_solve(&config)?;
    print_summary(&outcome);
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> anyhow::Result<()> {
    let report = qils_core::harness::run_suite(&VerifyOptions {
        quick: args.quick,
        seed: args.seed,
    });
    for check in &report.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        println!("{status}  {:<28} {}", check.name, check.details);
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    println!("{passed}/{} checks passed", report.checks.len());
    if !report.all_passed() {
        std::process::exit(1);
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> anyhow::Result<()> {
    let points = bench::bench_steps(&args.algorithm, args.n, args.steps, args.seed)?;
    println!(
        "{:>4} {:>14} {:>12} {:>8}",
        "k", "amplitudes", "step_ms", "ratio"
    );
    let ratios = bench::growth_ratios(&points);
    for (i, p) in points.iter().enumerate() {
        let ratio = if i == 0 {
            "-".to_string()
        } else {
            format!("{:.2}", ratios[i - 1])
        };
        println!(
            "{:>4} {:>14} {:>12.4} {:>8}",
            p.k, p.state_amplitudes, p.step_ms, ratio
        );
    }
    Ok(())
}

fn cmd_readout(args: &ReadoutArgs) -> anyhow::Result<()> {
    let config = build_config(&args.algorithm, &args.problem, &args.run)?;
    let outcome = run_solve(&config)?;
    let state = outcome
        .engine
        .quantum_state()
        .ok_or_else(|| anyhow!("readout needs a quantum algorithm (kaczmarz or cd)"))?;
    let scaling = outcome
        .engine
        .scaling()
        .ok_or_else(|| anyhow!("readout needs the engine's normalization"))?;
    let c = problem::io::read_vector(&args.probe)?;
    if c.len() > state.dim_sys() {
        bail!(
            "probe has {} entries but the system register holds {}",
            c.len(),
            state.dim_sys()
        );
    }
    let c = problem::pad_vector(&c, state.dim_sys());
    let c_norm = c.dot(&c).sqrt();

    let exact = overlap_exact(state, c.view())?;
    println!("probe norm:       {c_norm:.12}");
    println!("normalization:    {scaling:.12}");
    println!("exact overlap:    {exact:.12}");
    println!("exact x·c:        {:.12}", exact * scaling * c_norm);
    match args.mode.as_str() {
        "exact" => {}
        "sampled" => {
            let mut rng: rand_chacha::ChaCha8Rng =
                rand::SeedableRng::seed_from_u64(args.run.seed ^ 0x0ebd_97a1);
            let est = overlap_sampled(state, c.view(), args.epsilon, scaling, c_norm, &mut rng)?;
            debug_assert_eq!(est.mode, OverlapMode::Sampled);
            println!("sampled overlap:  {:.12}", est.value);
            println!("sampled x·c:      {:.12}", est.value * scaling * c_norm);
            println!("shots:            {}", est.samples);
            println!("stderr:           {:.3e}", est.stderr);
            println!(
                "rescaled error:   {:.3e} (target {:.3e})",
                (est.value - exact).abs() * scaling * c_norm,
                args.epsilon
            );
        }
        other => bail!("readout mode must be 'exact' or 'sampled', got '{other}'"),
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Classical(args) => cmd_classical(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Readout(args) => cmd_readout(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
