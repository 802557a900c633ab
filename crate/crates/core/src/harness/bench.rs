//! Coarse timing of per-step cost as the ancilla count grows.
//!
//! Step cost is dominated by walking the amplitude vector, so each added
//! row-action ancilla roughly doubles the step time and each column-action
//! step roughly quadruples it (two ancillas). The numbers here are for
//! eyeballing that trend, not for precise measurement.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::config::{ProblemSource, RunConfig};
use crate::harness::engine::{EngineContext, EngineRegistry};
use crate::problem::{ProblemKind, ProblemSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchPoint {
    pub k: usize,
    pub state_amplitudes: usize,
    pub step_ms: f64,
}

/// Times each step of one run of `algorithm` at dimension `n`.
pub fn bench_steps(algorithm: &str, n: usize, steps: usize, seed: u64) -> Result<Vec<BenchPoint>> {
    let spec = ProblemSpec::new(ProblemKind::RandomConsistent, n, seed);
    let mut config = RunConfig::new(algorithm, ProblemSource::Spec(spec.clone()), steps, seed);
    config.check_every = 0; // time the bare step, not the verification
    let system = crate::problem::generate(&spec)?;
    let registry = EngineRegistry::with_builtins();
    let mut engine = registry.create(EngineContext::new(system, config))?;
    let mut points = Vec::with_capacity(steps);
    for _ in 0..steps {
        let record = engine.advance()?;
        points.push(BenchPoint {
            k: record.k,
            state_amplitudes: record.state_amplitudes,
            step_ms: record.wall_time_ms,
        });
    }
    Ok(points)
}

/// Ratio of consecutive step times, skipping the noisy first entries.
pub fn growth_ratios(points: &[BenchPoint]) -> Vec<f64> {
    points
        .windows(2)
        .map(|w| w[1].step_ms / w[0].step_ms.max(1e-9))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bench_produces_growing_state_sizes() {
        let points = bench_steps("kaczmarz", 4, 8, 1).unwrap();
        assert_eq!(points.len(), 8);
        for w in points.windows(2) {
            assert_eq!(w[1].state_amplitudes, 2 * w[0].state_amplitudes);
        }
        let points = bench_steps("cd", 4, 4, 1).unwrap();
        for w in points.windows(2) {
            assert!(w[1].state_amplitudes >= 4 * w[0].state_amplitudes / 2);
        }
    }

    #[test]
    fn ratios_have_one_entry_per_pair() {
        let points = bench_steps("kaczmarz", 4, 6, 2).unwrap();
        assert_eq!(growth_ratios(&points).len(), 5);
    }

    #[test]
    fn per_amplitude_step_time_stays_roughly_flat() {
        // Structured application is linear in the amplitude count, so
        // time/amplitude must not blow up as the state doubles; a
        // quadratic kernel would grow it 16x over these four doublings.
        // Scheduler preemption only inflates samples, so minima over
        // repeated runs plus a generous allowance keep jitter out.
        let per_amp = |p: &BenchPoint| p.step_ms / p.state_amplitudes as f64;
        let mut early = f64::INFINITY;
        let mut late = f64::INFINITY;
        for repeat in 0..3 {
            let points = bench_steps("kaczmarz", 8, 16, 3 + repeat).unwrap();
            early = points[9..13].iter().map(per_amp).fold(early, f64::min);
            late = points[13..16].iter().map(per_amp).fold(late, f64::min);
        }
        assert!(
            late <= early * 8.0,
            "per-amplitude time grew from {early:.3e} to {late:.3e} ms"
        );
    }
}
