use thiserror::Error;

use crate::problem::NormMode;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("row {0} has norm below 1e-14; unit-norm scaling is undefined for it")]
    ZeroRow(usize),

    #[error("column {0} has norm below 1e-14; unit-norm scaling is undefined for it")]
    ZeroColumn(usize),

    #[error("{what} must be unit norm, got {norm}")]
    NotUnitNorm { what: &'static str, norm: f64 },

    #[error("index {index} out of range (limit {limit})")]
    InvalidIndex { index: usize, limit: usize },

    #[error("qubit {qubit} out of range (state has {total} ancilla qubits)")]
    InvalidQubit { qubit: usize, total: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("branch weights must satisfy beta^2 + gamma^2 = 1, got beta={beta}, gamma={gamma}")]
    BadConvexWeights { beta: f64, gamma: f64 },

    #[error("ancilla pattern has length {pattern}, state has {qubits} qubits")]
    PatternLengthMismatch { pattern: usize, qubits: usize },

    #[error("run needs {required} amplitudes, exceeding the cap of {cap}; raise the cap or reduce steps")]
    AmplitudeCapExceeded { required: u128, cap: usize },

    #[error("system must be {expected:?}-normalized, found {found:?}")]
    WrongMode { expected: NormMode, found: NormMode },

    #[error(
        "block equality violated at step {step}: deviation {deviation:.3e} exceeds {tolerance:.1e}"
    )]
    BlockEquality {
        step: usize,
        deviation: f64,
        tolerance: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("bad configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
