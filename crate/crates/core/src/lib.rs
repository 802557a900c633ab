//! Exact co-simulation of block-encoded quantum iterative linear solvers.
//!
//! Two classical row/column-action solvers and their unitary quantum
//! counterparts run side by side on the same index sequence:
//!
//! - **Kaczmarz** (row action): each step projects the iterate onto the
//!   hyperplane of one equation. The quantum engine encodes the iterate in
//!   the all-zeros-ancilla block of a statevector, one ancilla per step,
//!   with a tracked normalization constant.
//! - **Coordinate descent** (column action): each step minimizes the
//!   residual along one coordinate. The quantum engine maintains separate
//!   solution and residual states (two resp. one ancilla per step).
//!
//! Every run verifies the *block equality*: the all-zeros-ancilla block of
//! the simulated state equals the classical iterate divided by the tracked
//! normalization. The statevector is exact (real `f64` amplitudes, no
//! sampling noise), so the check is meaningful at 1e-10 tolerances.
//!
//! Modules mirror the problem structure: [`problem`] (instances, scaling,
//! padding, I/O), [`classical`] (reference iterations), [`simstate`]
//! (statevector and structured operators), [`oracles`] (state-preparation
//! reflections), [`qkaczmarz`] / [`qcd`] (the two quantum engines),
//! [`lcu`] (linear-combination-of-unitaries residual update), [`readout`]
//! (overlap estimation), and [`harness`] (engines, traces, verification).

pub mod classical;
pub mod error;
pub mod harness;
pub mod lcu;
pub mod oracles;
pub mod problem;
pub mod qcd;
pub mod qkaczmarz;
pub mod readout;
pub mod simstate;

pub use error::{Error, Result};
