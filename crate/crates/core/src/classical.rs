//! Reference classical iterations: randomized Kaczmarz (row action) and
//! randomized coordinate descent (column action).
//!
//! These are the ground truth the quantum engines are checked against. A
//! Kaczmarz step projects the iterate onto the hyperplane of row `t`; a
//! coordinate-descent step minimizes the residual along coordinate `t`,
//! which projects the residual off column `t`.

use ndarray::Array1;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{norm2, LinearSystem, NormMode};

/// Full residual recomputation cadence for incrementally maintained
/// residuals, bounding floating-point drift on long runs.
pub const RESIDUAL_REFRESH_EVERY: usize = 128;

/// Kaczmarz iterate with its index history.
#[derive(Debug, Clone)]
pub struct KaczmarzState {
    pub x: Array1<f64>,
    pub k: usize,
    pub history: Vec<usize>,
}

impl KaczmarzState {
    pub fn new(x: Array1<f64>) -> Self {
        Self {
            x,
            k: 0,
            history: Vec::new(),
        }
    }
}

/// Coordinate-descent iterate with incrementally maintained residual.
#[derive(Debug, Clone)]
pub struct CdState {
    pub x: Array1<f64>,
    pub r: Array1<f64>,
    pub k: usize,
    pub history: Vec<usize>,
}

impl CdState {
    /// Initializes with `r = b − A x` computed directly.
    pub fn new(x: Array1<f64>, sys: &LinearSystem) -> Self {
        let r = sys.rhs() - &sys.matrix().dot(&x);
        Self {
            x,
            r,
            k: 0,
            history: Vec::new(),
        }
    }

    /// Recomputes `r = b − A x` from scratch.
    pub fn refresh_residual(&mut self, sys: &LinearSystem) {
        self.r = sys.rhs() - &sys.matrix().dot(&self.x);
    }
}

/// One Kaczmarz step on a row-normalized system: projects `x` onto the
/// hyperplane `a_t · x = b_t`.
pub fn kaczmarz_step(state: &KaczmarzState, sys: &LinearSystem, t: usize) -> Result<KaczmarzState> {
    if sys.mode() != NormMode::RowNormalized {
        return Err(Error::WrongMode {
            expected: NormMode::RowNormalized,
            found: sys.mode(),
        });
    }
    if t >= sys.rows() {
        return Err(Error::InvalidIndex {
            index: t,
            limit: sys.rows(),
        });
    }
    let a_t = sys.row(t);
    let overshoot = a_t.dot(&state.x) - sys.rhs()[t];
    let mut x = state.x.clone();
    x.scaled_add(-overshoot, &a_t);
    let mut history = state.history.clone();
    history.push(t);
    Ok(KaczmarzState {
        x,
        k: state.k + 1,
        history,
    })
}

/// One coordinate-descent step on a column-normalized system:
/// `x += (c_t · r) e_t`, `r ← (I − c_t c_tᵀ) r`.
pub fn cd_step(state: &CdState, sys: &LinearSystem, t: usize) -> Result<CdState> {
    if sys.mode() != NormMode::ColumnNormalized {
        return Err(Error::WrongMode {
            expected: NormMode::ColumnNormalized,
            found: sys.mode(),
        });
    }
    if t >= sys.cols() {
        return Err(Error::InvalidIndex {
            index: t,
            limit: sys.cols(),
        });
    }
    let c_t = sys.column(t);
    let coef = c_t.dot(&state.r);
    let mut x = state.x.clone();
    x[t] += coef;
    let mut r = state.r.clone();
    r.scaled_add(-coef, &c_t);
    let mut history = state.history.clone();
    history.push(t);
    Ok(CdState {
        x,
        r,
        k: state.k + 1,
        history,
    })
}

/// Row/column selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerStrategy {
    Uniform,
    /// Probability of index `i` proportional to the squared norm of the raw
    /// (pre-normalization) row or column.
    NormProportional,
}

impl std::str::FromStr for SamplerStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "norm-proportional" => Ok(Self::NormProportional),
            other => Err(Error::Config(format!("unknown sampler '{other}'"))),
        }
    }
}

/// Seeded index stream over the original (unpadded) indices.
///
/// Quantum and classical engines draw from the same sampler so paired
/// trajectories see identical index sequences.
#[derive(Debug, Clone)]
pub struct IndexSampler {
    count: usize,
    cumulative: Option<Vec<f64>>,
    rng: ChaCha8Rng,
}

impl IndexSampler {
    pub fn uniform(count: usize, seed: u64) -> Self {
        Self {
            count,
            cumulative: None,
            rng: rand::SeedableRng::seed_from_u64(seed),
        }
    }

    /// Weights are squared norms of the raw matrix's rows or columns.
    pub fn norm_proportional(raw_norms: &[f64], seed: u64) -> Self {
        let mut acc = 0.0;
        let cumulative = raw_norms
            .iter()
            .map(|s| {
                acc += s * s;
                acc
            })
            .collect();
        Self {
            count: raw_norms.len(),
            cumulative: Some(cumulative),
            rng: rand::SeedableRng::seed_from_u64(seed),
        }
    }

    /// Sampler over the original rows of `sys`.
    pub fn for_rows(sys: &LinearSystem, strategy: SamplerStrategy, seed: u64) -> Self {
        match strategy {
            SamplerStrategy::Uniform => Self::uniform(sys.rows(), seed),
            SamplerStrategy::NormProportional => {
                Self::norm_proportional(sys.row_scalings().as_slice().unwrap(), seed)
            }
        }
    }

    /// Sampler over the original columns of `sys`.
    pub fn for_columns(sys: &LinearSystem, strategy: SamplerStrategy, seed: u64) -> Self {
        match strategy {
            SamplerStrategy::Uniform => Self::uniform(sys.cols(), seed),
            SamplerStrategy::NormProportional => {
                Self::norm_proportional(sys.col_scalings().as_slice().unwrap(), seed)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn sample(&mut self) -> usize {
        match &self.cumulative {
            None => self.rng.random_range(0..self.count),
            Some(cum) => {
                let total = *cum.last().expect("sampler over empty index set");
                let u = self.rng.random::<f64>() * total;
                match cum.binary_search_by(|w| w.partial_cmp(&u).unwrap()) {
                    Ok(i) => (i + 1).min(self.count - 1),
                    Err(i) => i.min(self.count - 1),
                }
            }
        }
    }
}

/// Per-step record of a classical-only run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassicalRecord {
    pub k: usize,
    pub t: Option<usize>,
    pub residual_norm: f64,
    pub x_norm: f64,
}

/// Runs randomized Kaczmarz until `max_steps` or `‖b − A x‖ ≤ residual_tol`.
pub fn run_kaczmarz(
    sys: &LinearSystem,
    x0: Array1<f64>,
    sampler: &mut IndexSampler,
    max_steps: usize,
    residual_tol: f64,
) -> Result<(KaczmarzState, Vec<ClassicalRecord>)> {
    let mut state = KaczmarzState::new(x0);
    let mut records = vec![record_of(sys, &state.x, state.k, None)];
    for _ in 0..max_steps {
        if records.last().unwrap().residual_norm <= residual_tol {
            break;
        }
        let t = sampler.sample();
        state = kaczmarz_step(&state, sys, t)?;
        records.push(record_of(sys, &state.x, state.k, Some(t)));
    }
    Ok((state, records))
}

/// Runs randomized coordinate descent with the incrementally maintained
/// residual, recomputed in full every [`RESIDUAL_REFRESH_EVERY`] steps.
pub fn run_cd(
    sys: &LinearSystem,
    x0: Array1<f64>,
    sampler: &mut IndexSampler,
    max_steps: usize,
    residual_tol: f64,
) -> Result<(CdState, Vec<ClassicalRecord>)> {
    let mut state = CdState::new(x0, sys);
    let mut records = vec![ClassicalRecord {
        k: 0,
        t: None,
        residual_norm: norm2(state.r.view()),
        x_norm: norm2(state.x.view()),
    }];
    for _ in 0..max_steps {
        if records.last().unwrap().residual_norm <= residual_tol {
            break;
        }
        let t = sampler.sample();
        state = cd_step(&state, sys, t)?;
        if state.k.is_multiple_of(RESIDUAL_REFRESH_EVERY) {
            state.refresh_residual(sys);
        }
        records.push(ClassicalRecord {
            k: state.k,
            t: Some(t),
            residual_norm: norm2(state.r.view()),
            x_norm: norm2(state.x.view()),
        });
    }
    Ok((state, records))
}

fn record_of(sys: &LinearSystem, x: &Array1<f64>, k: usize, t: Option<usize>) -> ClassicalRecord {
    ClassicalRecord {
        k,
        t,
        residual_norm: sys.residual_norm(x),
        x_norm: norm2(x.view()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{generate, ProblemKind, ProblemSpec};
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};

    fn identity_system(b: Array1<f64>) -> LinearSystem {
        let n = b.len();
        LinearSystem::new(Array2::eye(n), b).unwrap()
    }

    #[test]
    fn kaczmarz_step_projects_onto_hyperplane() {
        let sys = identity_system(array![0.6, 0.8]).normalize_rows().unwrap();
        let s0 = KaczmarzState::new(array![1.0, 0.0]);
        // t = 1 fixes the second coordinate.
        let s1 = kaczmarz_step(&s0, &sys, 1).unwrap();
        assert_eq!(s1.x, array![1.0, 0.8]);
        assert_eq!(s1.k, 1);
        assert_eq!(s1.history, vec![1]);
        // A point already on the hyperplane is fixed.
        let again = kaczmarz_step(&s1, &sys, 1).unwrap();
        assert_eq!(again.x, s1.x);
        // t = 0 then lands on the solution.
        let s2 = kaczmarz_step(&s1, &sys, 0).unwrap();
        assert_eq!(s2.x, array![0.6, 0.8]);
    }

    #[test]
    fn kaczmarz_step_hyperplane_membership_is_exact() {
        let spec = ProblemSpec::new(ProblemKind::RandomConsistent, 8, 13);
        let sys = generate(&spec).unwrap().normalize_rows().unwrap();
        let mut state = KaczmarzState::new(Array1::zeros(8));
        let mut sampler = IndexSampler::uniform(sys.rows(), 5);
        for _ in 0..50 {
            let t = sampler.sample();
            state = kaczmarz_step(&state, &sys, t).unwrap();
            let gap = sys.row(t).dot(&state.x) - sys.rhs()[t];
            assert!(gap.abs() <= 1e-12, "projection property violated: {gap}");
        }
    }

    #[test]
    fn kaczmarz_rejects_bad_inputs() {
        let sys = identity_system(array![1.0, 2.0]);
        let s = KaczmarzState::new(array![0.0, 0.0]);
        assert!(matches!(
            kaczmarz_step(&s, &sys, 0),
            Err(Error::WrongMode { .. })
        ));
        let sys = sys.normalize_rows().unwrap();
        assert!(matches!(
            kaczmarz_step(&s, &sys, 2),
            Err(Error::InvalidIndex { .. })
        ));
    }

    #[test]
    fn cd_step_examples() {
        let sys = identity_system(array![0.6, 0.8])
            .normalize_columns()
            .unwrap();
        let s0 = CdState::new(array![0.0, 0.0], &sys);
        assert_eq!(s0.r, array![0.6, 0.8]);
        let s1 = cd_step(&s0, &sys, 0).unwrap();
        assert_eq!(s1.x, array![0.6, 0.0]);
        assert_eq!(s1.r, array![0.0, 0.8]);
        // Residual orthogonal to the chosen column: step is a no-op.
        let noop = cd_step(&s1, &sys, 0).unwrap();
        assert_eq!(noop.x, s1.x);
        assert_eq!(noop.r, s1.r);
        // Completing the sweep solves the identity system.
        let s2 = cd_step(&s1, &sys, 1).unwrap();
        assert_eq!(s2.x, array![0.6, 0.8]);
        assert_eq!(s2.r, array![0.0, 0.0]);
    }

    #[test]
    fn cd_step_orthogonality_and_monotonicity() {
        let spec = ProblemSpec::new(ProblemKind::RandomConsistent, 8, 3);
        let sys = generate(&spec).unwrap().normalize_columns().unwrap();
        let mut state = CdState::new(Array1::zeros(8), &sys);
        let mut sampler = IndexSampler::uniform(sys.cols(), 9);
        for _ in 0..100 {
            let before = norm2(state.r.view());
            let t = sampler.sample();
            state = cd_step(&state, &sys, t).unwrap();
            let after = norm2(state.r.view());
            assert!(
                after <= before + 1e-12,
                "residual grew: {before} -> {after}"
            );
            let dot = sys.column(t).dot(&state.r);
            assert!(dot.abs() <= 1e-12, "column not orthogonal to residual");
        }
    }

    #[test]
    fn cd_incremental_residual_stays_accurate() {
        let spec = ProblemSpec::new(ProblemKind::RandomConsistent, 16, 21);
        let sys = generate(&spec).unwrap().normalize_columns().unwrap();
        let mut state = CdState::new(Array1::zeros(16), &sys);
        let mut sampler = IndexSampler::uniform(sys.cols(), 4);
        // No refresh here: this measures pure incremental drift.
        for _ in 0..10_000 {
            let t = sampler.sample();
            state = cd_step(&state, &sys, t).unwrap();
        }
        let direct = sys.rhs() - &sys.matrix().dot(&state.x);
        let drift = norm2((&state.r - &direct).view());
        assert!(drift <= 1e-10, "incremental residual drifted by {drift}");
    }

    #[test]
    fn kaczmarz_distance_to_solution_is_non_increasing() {
        let spec = ProblemSpec::new(ProblemKind::RandomConsistent, 8, 17);
        let sys = generate(&spec).unwrap().normalize_rows().unwrap();
        let star = sys.planted_solution().unwrap().clone();
        let mut state = KaczmarzState::new(Array1::zeros(8));
        let mut sampler = IndexSampler::uniform(sys.rows(), 2);
        let mut dist = norm2((&state.x - &star).view());
        for _ in 0..200 {
            let t = sampler.sample();
            state = kaczmarz_step(&state, &sys, t).unwrap();
            let next = norm2((&state.x - &star).view());
            assert!(next <= dist + 1e-12);
            dist = next;
        }
    }

    #[test]
    fn run_kaczmarz_identity_converges() {
        let sys = identity_system(array![0.25, -0.5, 0.125, 1.0])
            .normalize_rows()
            .unwrap();
        let mut sampler = IndexSampler::uniform(4, 7);
        let (state, records) =
            run_kaczmarz(&sys, Array1::zeros(4), &mut sampler, 200, 1e-12).unwrap();
        assert!(records.last().unwrap().residual_norm <= 1e-12);
        assert_abs_diff_eq!(state.x[3], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn run_with_zero_steps_only_records_start() {
        let sys = identity_system(array![1.0, 2.0]).normalize_rows().unwrap();
        let mut sampler = IndexSampler::uniform(2, 0);
        let (state, records) = run_kaczmarz(&sys, array![0.0, 0.0], &mut sampler, 0, 0.0).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].t, None);
        assert_eq!(state.k, 0);
    }

    #[test]
    fn norm_proportional_sampling_converges_on_consistent_systems() {
        // Median final residual over 20 seeds after 5000 steps.
        let mut finals = Vec::new();
        for seed in 0..20 {
            let spec = ProblemSpec::new(ProblemKind::RandomConsistent, 64, 100 + seed);
            let sys = generate(&spec).unwrap().normalize_rows().unwrap();
            let mut sampler = IndexSampler::for_rows(&sys, SamplerStrategy::NormProportional, seed);
            let (state, _) =
                run_kaczmarz(&sys, Array1::zeros(64), &mut sampler, 5000, 0.0).unwrap();
            finals.push(sys.residual_norm(&state.x));
        }
        finals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = finals[finals.len() / 2];
        assert!(median < 1e-3, "median residual {median} too large");
    }

    #[test]
    fn sampler_strategies_are_deterministic_and_in_range() {
        let spec = ProblemSpec::new(ProblemKind::RandomGeneral, 8, 1);
        let sys = generate(&spec).unwrap();
        for strategy in [SamplerStrategy::Uniform, SamplerStrategy::NormProportional] {
            let mut s1 = IndexSampler::for_rows(&sys, strategy, 42);
            let mut s2 = IndexSampler::for_rows(&sys, strategy, 42);
            for _ in 0..100 {
                let a = s1.sample();
                assert_eq!(a, s2.sample());
                assert!(a < sys.rows());
            }
        }
    }

    #[test]
    fn norm_proportional_matches_weights_empirically() {
        // Rows with norms 1 and 3: second row should be drawn ~9x as often.
        let sys = LinearSystem::new(array![[1.0, 0.0], [0.0, 3.0]], array![1.0, 1.0]).unwrap();
        let mut sampler = IndexSampler::for_rows(&sys, SamplerStrategy::NormProportional, 8);
        let draws = 20_000;
        let hits = (0..draws).filter(|_| sampler.sample() == 1).count();
        let frac = hits as f64 / draws as f64;
        assert!((frac - 0.9).abs() < 0.02, "empirical fraction {frac}");
    }
}
