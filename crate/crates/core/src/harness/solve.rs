//! Paired-run orchestration: build the configured engine, drive it,
//! collect the trace, enforce the block-equality contract.

use crate::error::{Error, Result};
use crate::harness::config::RunConfig;
use crate::harness::engine::{EngineContext, EngineRegistry, SolverEngine};
use crate::harness::trace::{Trace, TraceHeader};
use crate::qkaczmarz::BLOCK_EQUALITY_TOL;

pub struct SolveOutcome {
    pub trace: Trace,
    pub engine: Box<dyn SolverEngine>,
}

/// Runs `config` with the built-in engine registry.
pub fn run_solve(config: &RunConfig) -> Result<SolveOutcome> {
    run_solve_with(&EngineRegistry::with_builtins(), config)
}

/// Runs `config` against a caller-supplied registry. The trace is written
/// to `config.output` (when set) even if the run fails its block-equality
/// contract, so failures stay inspectable; the error is still returned.
pub fn run_solve_with(registry: &EngineRegistry, config: &RunConfig) -> Result<SolveOutcome> {
    let system = config.load_system()?;
    let ctx = EngineContext::new(system, config.clone());
    let mut engine = registry.create(ctx)?;
    let mut records = vec![engine.initial_record()];
    let mut violation = None;
    for _ in 0..config.steps {
        if config.residual_tol > 0.0 && engine.residual_norm() <= config.residual_tol {
            break;
        }
        let record = engine.advance()?;
        let (k, fidelity) = (record.k, record.block_fidelity);
        records.push(record);
        if let Some(f) = fidelity {
            if f > BLOCK_EQUALITY_TOL {
                violation = Some(Error::BlockEquality {
                    step: k,
                    deviation: f,
                    tolerance: BLOCK_EQUALITY_TOL,
                });
                break;
            }
        }
    }
    let trace = Trace {
        header: TraceHeader {
            version: env!("CARGO_PKG_VERSION").to_string(),
            algorithm: config.algorithm.clone(),
            config: config.clone(),
        },
        records,
    };
    if let Some(path) = &config.output {
        trace.write_to_path(path)?;
    }
    match violation {
        Some(e) => Err(e),
        None => Ok(SolveOutcome { trace, engine }),
    }
}
