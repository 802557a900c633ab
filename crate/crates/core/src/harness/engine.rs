//! Solver engines behind a common trait, registered by name and selected
//! at runtime from the configuration.
//!
//! Four built-ins: `kaczmarz` and `cd` run the paired quantum+classical
//! iterations; `classical-kaczmarz` and `classical-cd` skip the
//! statevector entirely and scale to large instances. All draw indices
//! from the same seeded sampler construction, so a quantum run and a
//! classical run with the same configuration see the same index sequence.

use std::collections::BTreeMap;
use std::time::Instant;

use ndarray::Array1;

use crate::classical::{cd_step, kaczmarz_step, CdState, IndexSampler, KaczmarzState};
use crate::error::{Error, Result};
use crate::harness::config::{RunConfig, StartVector};
use crate::harness::trace::TraceRecord;
use crate::problem::{norm2, LinearSystem};
use crate::qcd::QCdRun;
use crate::qkaczmarz::QKaczmarzRun;
use crate::simstate::SimState;

/// Everything an engine needs at construction time.
pub struct EngineContext {
    pub system: LinearSystem,
    pub config: RunConfig,
    pub amplitude_cap: usize,
}

impl EngineContext {
    pub fn new(system: LinearSystem, config: RunConfig) -> Self {
        let amplitude_cap = config.resolve_amplitude_cap();
        Self {
            system,
            config,
            amplitude_cap,
        }
    }

    /// Unit start vector for quantum engines.
    fn unit_start(&self, n: usize) -> Result<Array1<f64>> {
        match self.config.x0 {
            StartVector::Basis0 => {
                let mut x = Array1::zeros(n);
                x[0] = 1.0;
                Ok(x)
            }
            StartVector::Random => {
                let mut rng: rand_chacha::ChaCha8Rng =
                    rand::SeedableRng::seed_from_u64(self.config.seed ^ 0x9e3779b97f4a7c15);
                Ok(crate::problem::random_unit_vector(n, &mut rng))
            }
            StartVector::Zero => Err(Error::Config(
                "quantum runs need a unit-norm start vector, not zero".into(),
            )),
        }
    }

    /// Start vector for classical engines (zero allowed).
    fn classical_start(&self, n: usize) -> Array1<f64> {
        match self.config.x0 {
            StartVector::Zero => Array1::zeros(n),
            _ => self.unit_start(n).expect("non-zero start is infallible"),
        }
    }
}

/// One interchangeable solver strategy.
pub trait SolverEngine {
    fn algorithm(&self) -> &'static str;

    /// Record for the initial (k = 0) state.
    fn initial_record(&self) -> TraceRecord;

    /// Samples an index, advances one iteration, returns the step record.
    fn advance(&mut self) -> Result<TraceRecord>;

    fn steps_taken(&self) -> usize;

    fn residual_norm(&self) -> f64;

    /// Current classical iterate (padded coordinates).
    fn solution(&self) -> Array1<f64>;

    /// The encoded statevector, for quantum engines.
    fn quantum_state(&self) -> Option<&SimState> {
        None
    }

    /// Normalization of the encoded block: `μ_k` or `k+1`.
    fn scaling(&self) -> Option<f64> {
        None
    }
}

pub type EngineFactory = fn(EngineContext) -> Result<Box<dyn SolverEngine>>;

/// Name-keyed engine registry.
pub struct EngineRegistry {
    entries: BTreeMap<&'static str, EngineFactory>,
}

impl EngineRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Registry with the four built-in strategies.
    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry.register("kaczmarz", QuantumKaczmarzEngine::build);
        registry.register("cd", QuantumCdEngine::build);
        registry.register("classical-kaczmarz", ClassicalKaczmarzEngine::build);
        registry.register("classical-cd", ClassicalCdEngine::build);
        registry
    }

    pub fn register(&mut self, name: &'static str, factory: EngineFactory) {
        self.entries.insert(name, factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    /// Builds the engine named by `ctx.config.algorithm`.
    pub fn create(&self, ctx: EngineContext) -> Result<Box<dyn SolverEngine>> {
        let name = ctx.config.algorithm.clone();
        let factory = self.entries.get(name.as_str()).ok_or_else(|| {
            Error::Config(format!(
                "unknown algorithm '{name}'; available: {}",
                self.names().join(", ")
            ))
        })?;
        factory(ctx)
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

// ---------------------------------------------------------------------
// Quantum Kaczmarz
// ---------------------------------------------------------------------

struct QuantumKaczmarzEngine {
    run: QKaczmarzRun,
    sampler: IndexSampler,
    check_every: usize,
    steps_planned: usize,
}

impl QuantumKaczmarzEngine {
    fn build(ctx: EngineContext) -> Result<Box<dyn SolverEngine>> {
        let sys = ctx.system.normalize_rows()?;
        let required = QKaczmarzRun::required_amplitudes(sys.n_padded(), ctx.config.steps);
        if required > ctx.amplitude_cap as u128 {
            return Err(Error::AmplitudeCapExceeded {
                required,
                cap: ctx.amplitude_cap,
            });
        }
        let x0 = ctx.unit_start(sys.cols())?;
        let sampler = IndexSampler::for_rows(&sys, ctx.config.sampler, ctx.config.seed);
        let run = QKaczmarzRun::init(&sys, &x0)?.with_amplitude_cap(ctx.amplitude_cap);
        Ok(Box::new(Self {
            run,
            sampler,
            check_every: ctx.config.check_every,
            steps_planned: ctx.config.steps,
        }))
    }

    fn record(&self, t: Option<usize>, wall_time_ms: f64, checked: bool) -> TraceRecord {
        let (fidelity, success) = if checked {
            (
                Some(self.run.block_deviation()),
                Some(self.run.success_probability()),
            )
        } else {
            (None, None)
        };
        TraceRecord {
            k: self.run.k(),
            t,
            mu: Some(self.run.mu()),
            classical_residual_norm: Some(self.run.classical_residual_norm()),
            block_fidelity: fidelity,
            success_probability: success,
            state_amplitudes: self.run.state().len(),
            oracle_calls: self.run.oracle_calls(),
            wall_time_ms,
        }
    }

    fn check_now(&self) -> bool {
        self.check_every != 0
            && (self.run.k().is_multiple_of(self.check_every) || self.run.k() == self.steps_planned)
    }
}

impl SolverEngine for QuantumKaczmarzEngine {
    fn algorithm(&self) -> &'static str {
        "kaczmarz"
    }

    fn initial_record(&self) -> TraceRecord {
        self.record(None, 0.0, self.check_every != 0)
    }

    fn advance(&mut self) -> Result<TraceRecord> {
        let start = Instant::now();
        let t = self.sampler.sample();
        self.run.step(t)?;
        Ok(self.record(Some(t), elapsed_ms(start), self.check_now()))
    }

    fn steps_taken(&self) -> usize {
        self.run.k()
    }

    fn residual_norm(&self) -> f64 {
        self.run.classical_residual_norm()
    }

    fn solution(&self) -> Array1<f64> {
        self.run.classical().x.clone()
    }

    fn quantum_state(&self) -> Option<&SimState> {
        Some(self.run.state())
    }

    fn scaling(&self) -> Option<f64> {
        Some(self.run.mu())
    }
}

// ---------------------------------------------------------------------
// Quantum coordinate descent
// ---------------------------------------------------------------------

struct QuantumCdEngine {
    run: QCdRun,
    sampler: IndexSampler,
    check_every: usize,
    steps_planned: usize,
}

impl QuantumCdEngine {
    fn build(ctx: EngineContext) -> Result<Box<dyn SolverEngine>> {
        let sys = ctx.system.normalize_columns()?;
        let x0 = ctx.unit_start(sys.cols())?;
        let sampler = IndexSampler::for_columns(&sys, ctx.config.sampler, ctx.config.seed);
        let run = QCdRun::init(&sys, &x0)?.with_amplitude_cap(ctx.amplitude_cap);
        // The rescaled-residual variant adds one ancilla; only the
        // constructed run knows which encoding it picked.
        let required = QCdRun::required_amplitudes(
            run.system().n_padded(),
            ctx.config.steps,
            run.has_extra_ancilla(),
        );
        if required > ctx.amplitude_cap as u128 {
            return Err(Error::AmplitudeCapExceeded {
                required,
                cap: ctx.amplitude_cap,
            });
        }
        Ok(Box::new(Self {
            run,
            sampler,
            check_every: ctx.config.check_every,
            steps_planned: ctx.config.steps,
        }))
    }

    fn record(&self, t: Option<usize>, wall_time_ms: f64, checked: bool) -> TraceRecord {
        let fidelity = if checked {
            Some(
                self.run
                    .solution_deviation()
                    .max(self.run.residual_deviation()),
            )
        } else {
            None
        };
        let success = if checked {
            let (_, norm) = self.run.solution_state().zero_block();
            Some(norm * norm)
        } else {
            None
        };
        TraceRecord {
            k: self.run.k(),
            t,
            mu: Some((self.run.k() + 1) as f64),
            classical_residual_norm: Some(self.run.classical_residual_norm()),
            block_fidelity: fidelity,
            success_probability: success,
            state_amplitudes: self.run.solution_state().len() + self.run.residual_state().len(),
            oracle_calls: self.run.oracle_calls(),
            wall_time_ms,
        }
    }

    fn check_now(&self) -> bool {
        self.check_every != 0
            && (self.run.k().is_multiple_of(self.check_every) || self.run.k() == self.steps_planned)
    }
}

impl SolverEngine for QuantumCdEngine {
    fn algorithm(&self) -> &'static str {
        "cd"
    }

    fn initial_record(&self) -> TraceRecord {
        self.record(None, 0.0, self.check_every != 0)
    }

    fn advance(&mut self) -> Result<TraceRecord> {
        let start = Instant::now();
        let t = self.sampler.sample();
        self.run.step(t)?;
        Ok(self.record(Some(t), elapsed_ms(start), self.check_now()))
    }

    fn steps_taken(&self) -> usize {
        self.run.k()
    }

    fn residual_norm(&self) -> f64 {
        self.run.classical_residual_norm()
    }

    fn solution(&self) -> Array1<f64> {
        self.run.classical().x.clone()
    }

    fn quantum_state(&self) -> Option<&SimState> {
        Some(self.run.solution_state())
    }

    fn scaling(&self) -> Option<f64> {
        Some((self.run.k() + 1) as f64)
    }
}

// ---------------------------------------------------------------------
// Classical-only engines
// ---------------------------------------------------------------------

struct ClassicalKaczmarzEngine {
    sys: LinearSystem,
    state: KaczmarzState,
    sampler: IndexSampler,
    /// The row iteration keeps no residual state, so `‖b − A x‖` costs a
    /// full matvec; it is recomputed only at the check cadence and cached
    /// in between, which is what makes large-n runs practical.
    check_every: usize,
    steps_planned: usize,
    cached_residual: f64,
}

impl ClassicalKaczmarzEngine {
    fn build(ctx: EngineContext) -> Result<Box<dyn SolverEngine>> {
        let sys = ctx.system.normalize_rows()?;
        let x0 = ctx.classical_start(sys.matrix().ncols());
        let sampler = IndexSampler::for_rows(&sys, ctx.config.sampler, ctx.config.seed);
        let state = KaczmarzState::new(x0);
        let cached_residual = sys.residual_norm(&state.x);
        Ok(Box::new(Self {
            state,
            sys,
            sampler,
            check_every: ctx.config.check_every,
            steps_planned: ctx.config.steps,
            cached_residual,
        }))
    }

    fn record(&self, t: Option<usize>, wall_time_ms: f64, checked: bool) -> TraceRecord {
        TraceRecord {
            k: self.state.k,
            t,
            mu: None,
            classical_residual_norm: checked.then_some(self.cached_residual),
            block_fidelity: None,
            success_probability: None,
            state_amplitudes: 0,
            oracle_calls: 0,
            wall_time_ms,
        }
    }
}

impl SolverEngine for ClassicalKaczmarzEngine {
    fn algorithm(&self) -> &'static str {
        "classical-kaczmarz"
    }

    fn initial_record(&self) -> TraceRecord {
        self.record(None, 0.0, true)
    }

    fn advance(&mut self) -> Result<TraceRecord> {
        let start = Instant::now();
        let t = self.sampler.sample();
        self.state = kaczmarz_step(&self.state, &self.sys, t)?;
        let checked = self.check_every != 0
            && (self.state.k.is_multiple_of(self.check_every)
                || self.state.k == self.steps_planned);
        if checked {
            self.cached_residual = self.sys.residual_norm(&self.state.x);
        }
        Ok(self.record(Some(t), elapsed_ms(start), checked))
    }

    fn steps_taken(&self) -> usize {
        self.state.k
    }

    /// Residual as of the last cadence point; early stopping therefore
    /// lags by at most `check_every` steps.
    fn residual_norm(&self) -> f64 {
        self.cached_residual
    }

    fn solution(&self) -> Array1<f64> {
        self.state.x.clone()
    }
}

struct ClassicalCdEngine {
    sys: LinearSystem,
    state: CdState,
    sampler: IndexSampler,
}

impl ClassicalCdEngine {
    fn build(ctx: EngineContext) -> Result<Box<dyn SolverEngine>> {
        let sys = ctx.system.normalize_columns()?;
        let x0 = ctx.classical_start(sys.matrix().ncols());
        let sampler = IndexSampler::for_columns(&sys, ctx.config.sampler, ctx.config.seed);
        Ok(Box::new(Self {
            state: CdState::new(x0, &sys),
            sys,
            sampler,
        }))
    }

    fn record(&self, t: Option<usize>, wall_time_ms: f64) -> TraceRecord {
        TraceRecord {
            k: self.state.k,
            t,
            mu: None,
            classical_residual_norm: Some(norm2(self.state.r.view())),
            block_fidelity: None,
            success_probability: None,
            state_amplitudes: 0,
            oracle_calls: 0,
            wall_time_ms,
        }
    }
}

impl SolverEngine for ClassicalCdEngine {
    fn algorithm(&self) -> &'static str {
        "classical-cd"
    }

    fn initial_record(&self) -> TraceRecord {
        self.record(None, 0.0)
    }

    fn advance(&mut self) -> Result<TraceRecord> {
        let start = Instant::now();
        let t = self.sampler.sample();
        self.state = cd_step(&self.state, &self.sys, t)?;
        if self
            .state
            .k
            .is_multiple_of(crate::classical::RESIDUAL_REFRESH_EVERY)
        {
            self.state.refresh_residual(&self.sys);
        }
        Ok(self.record(Some(t), elapsed_ms(start)))
    }

    fn steps_taken(&self) -> usize {
        self.state.k
    }

    fn residual_norm(&self) -> f64 {
        norm2(self.state.r.view())
    }

    fn solution(&self) -> Array1<f64> {
        self.state.x.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ProblemSource;
    use crate::problem::{generate, ProblemKind, ProblemSpec};

    fn context(algorithm: &str, n: usize, steps: usize) -> EngineContext {
        let spec = ProblemSpec::new(ProblemKind::RandomConsistent, n, 5);
        let system = generate(&spec).unwrap();
        let config = RunConfig::new(algorithm, ProblemSource::Spec(spec), steps, 3);
        EngineContext::new(system, config)
    }

    #[test]
    fn registry_lists_builtins() {
        let registry = EngineRegistry::with_builtins();
        assert_eq!(
            registry.names(),
            vec!["cd", "classical-cd", "classical-kaczmarz", "kaczmarz"]
        );
    }

    #[test]
    fn unknown_algorithm_is_a_config_error() {
        let registry = EngineRegistry::with_builtins();
        let err = registry.create(context("sketchy", 4, 1));
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn quantum_engines_expose_state_and_scaling() {
        let registry = EngineRegistry::with_builtins();
        for name in ["kaczmarz", "cd"] {
            let mut engine = registry.create(context(name, 4, 3)).unwrap();
            assert_eq!(engine.algorithm(), name);
            let rec0 = engine.initial_record();
            assert_eq!(rec0.k, 0);
            assert_eq!(rec0.t, None);
            for k in 1..=3 {
                let rec = engine.advance().unwrap();
                assert_eq!(rec.k, k);
                assert!(rec.t.is_some());
                assert!(rec.block_fidelity.unwrap() <= 1e-10);
            }
            assert!(engine.quantum_state().is_some());
            assert!(engine.scaling().is_some());
        }
    }

    #[test]
    fn classical_engines_track_residuals_without_state() {
        let registry = EngineRegistry::with_builtins();
        for name in ["classical-kaczmarz", "classical-cd"] {
            let mut engine = registry.create(context(name, 16, 50)).unwrap();
            let start = engine.initial_record().classical_residual_norm.unwrap();
            for _ in 0..50 {
                engine.advance().unwrap();
            }
            let end = engine.residual_norm();
            assert!(end < start, "{name}: {start} -> {end}");
            assert!(engine.quantum_state().is_none());
        }
    }

    #[test]
    fn paired_engines_share_the_index_sequence() {
        // Same seed: quantum kaczmarz and classical kaczmarz draw the same
        // rows, so their classical iterates coincide.
        let registry = EngineRegistry::with_builtins();
        let mut quantum = registry.create(context("kaczmarz", 4, 6)).unwrap();
        let mut classical = registry
            .create(context("classical-kaczmarz", 4, 6))
            .unwrap();
        for _ in 0..6 {
            let rq = quantum.advance().unwrap();
            let rc = classical.advance().unwrap();
            assert_eq!(rq.t, rc.t);
        }
        let xq = quantum.solution();
        let xc = classical.solution();
        for (a, b) in xq.iter().zip(xc.iter()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn quantum_cap_refusal_happens_at_build_time() {
        let registry = EngineRegistry::with_builtins();
        let mut ctx = context("cd", 8, 20);
        ctx.config.amplitude_cap = Some(1 << 26);
        ctx.amplitude_cap = 1 << 26;
        assert!(matches!(
            registry.create(ctx),
            Err(Error::AmplitudeCapExceeded { .. })
        ));
    }

    #[test]
    fn zero_start_rejected_for_quantum_accepted_for_classical() {
        let registry = EngineRegistry::with_builtins();
        let mut ctx = context("kaczmarz", 4, 2);
        ctx.config.x0 = StartVector::Zero;
        assert!(registry.create(ctx).is_err());
        let mut ctx = context("classical-kaczmarz", 4, 2);
        ctx.config.x0 = StartVector::Zero;
        let engine = registry.create(ctx).unwrap();
        assert!(engine.solution().iter().all(|x| *x == 0.0));
    }
}
