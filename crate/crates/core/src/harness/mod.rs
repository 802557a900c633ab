//! Run orchestration: configuration, the engine registry, trace
//! persistence, timing, and the verification suite.

pub mod bench;
pub mod config;
pub mod engine;
pub mod solve;
pub mod trace;
pub mod verify;

pub use config::{ProblemSource, RunConfig, StartVector, AMPLITUDE_CAP_ENV};
pub use engine::{EngineContext, EngineFactory, EngineRegistry, SolverEngine};
pub use solve::{run_solve, run_solve_with, SolveOutcome};
pub use trace::{Trace, TraceHeader, TraceRecord};
pub use verify::{expectation_check, run_suite, VerifyOptions, VerifyReport};
