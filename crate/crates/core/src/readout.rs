//! End-of-run information extraction: signed overlap of the encoded
//! iterate against a probe vector.
//!
//! The exact overlap `⟨0…0, c | state⟩` is available because amplitudes
//! are explicit. The sampled estimator draws Bernoulli shots from an
//! interference acceptance probability: the default is the signed
//! variant, acceptance `(1 + ⟨A|B⟩)/2` for real states, since the target
//! quantity `‖x_k‖⟨x_k|c⟩/μ_k` is signed; the literal two-state overlap
//! test, acceptance `1/2 + ⟨A|B⟩²/2`, is kept for magnitude-only reads.
//!
//! To land within `ε` of `x_k · c` after rescaling by `μ_k‖c‖`, the shot
//! budget targets `ε′ = ε/(μ_k‖c‖)` with `m = ⌈9/ε′²⌉` (three sigma of a
//! Bernoulli mean at worst-case variance).

use ndarray::ArrayView1;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::norm2;
use crate::simstate::SimState;

/// Shot budgets beyond this are refused (the caller asked for a tighter
/// `ε′` than plain sampling can sensibly deliver).
pub const MAX_SHOTS: u64 = 10_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapMode {
    Exact,
    Sampled,
}

/// A signed overlap estimate with its sampling metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OverlapEstimate {
    pub value: f64,
    pub samples: u64,
    pub stderr: f64,
    pub mode: OverlapMode,
}

impl OverlapEstimate {
    /// Wraps an exactly computed overlap (no shots, no error).
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            samples: 0,
            stderr: 0.0,
            mode: OverlapMode::Exact,
        }
    }
}

/// Exact signed overlap `⟨0…0, ĉ | state⟩ = block(0…0) · ĉ`.
///
/// The probe may be unnormalized; it is normalized internally (carry its
/// original norm into the rescaling separately).
pub fn overlap_exact(state: &SimState, c: ArrayView1<'_, f64>) -> Result<f64> {
    if c.len() != state.dim_sys() {
        return Err(Error::DimensionMismatch {
            expected: state.dim_sys(),
            found: c.len(),
        });
    }
    let norm = norm2(c);
    if norm < 1e-14 {
        return Err(Error::NotUnitNorm {
            what: "probe vector",
            norm,
        });
    }
    let (block, _) = state.zero_block();
    Ok(block.dot(&c) / norm)
}

fn full_overlap(a: &SimState, b: &SimState) -> Result<f64> {
    if a.len() != b.len() || a.dim_sys() != b.dim_sys() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(a.amps().iter().zip(b.amps()).map(|(x, y)| x * y).sum())
}

/// Acceptance probability of the two-state overlap test,
/// `1/2 + ⟨A|B⟩²/2`, computed exactly from amplitudes. Sign-blind.
pub fn swap_test_prob(a: &SimState, b: &SimState) -> Result<f64> {
    let ov = full_overlap(a, b)?;
    Ok(0.5 + 0.5 * ov * ov)
}

/// Acceptance probability of the signed interference test,
/// `(1 + ⟨A|B⟩)/2` for real states.
pub fn hadamard_test_prob(a: &SimState, b: &SimState) -> Result<f64> {
    let ov = full_overlap(a, b)?;
    Ok(0.5 * (1.0 + ov))
}

/// Probe state `|0⟩^{⊗q} ⊗ |ĉ⟩` matching the ancilla layout of `state`.
pub fn probe_state(state: &SimState, c: ArrayView1<'_, f64>) -> Result<SimState> {
    let norm = norm2(c);
    if norm < 1e-14 {
        return Err(Error::NotUnitNorm {
            what: "probe vector",
            norm,
        });
    }
    let unit = c.map(|x| x / norm);
    SimState::from_system_with_ancillas(state.q(), unit.as_slice().unwrap())
}

/// Signed sampled overlap with the shot budget derived from the rescaled
/// target error: `ε′ = ε/(μ‖c‖)`, `m = ⌈9/ε′²⌉` Bernoulli draws from the
/// signed-test acceptance probability.
pub fn overlap_sampled<R: Rng>(
    state: &SimState,
    c: ArrayView1<'_, f64>,
    epsilon: f64,
    mu: f64,
    c_norm: f64,
    rng: &mut R,
) -> Result<OverlapEstimate> {
    if epsilon <= 0.0 {
        return Err(Error::Config("target error must be positive".into()));
    }
    let eps_prime = epsilon / (mu * c_norm);
    let m = (9.0 / (eps_prime * eps_prime)).ceil();
    if !(m.is_finite()) || m as u64 > MAX_SHOTS {
        return Err(Error::Config(format!(
            "shot budget {m:.3e} exceeds the {MAX_SHOTS} cap; widen epsilon"
        )));
    }
    let m = (m as u64).max(1);
    let probe = probe_state(state, c)?;
    let p = hadamard_test_prob(state, &probe)?;
    let mut hits = 0u64;
    for _ in 0..m {
        if rng.random::<f64>() < p {
            hits += 1;
        }
    }
    let p_hat = hits as f64 / m as f64;
    Ok(OverlapEstimate {
        value: 2.0 * p_hat - 1.0,
        samples: m,
        stderr: 2.0 * (p_hat * (1.0 - p_hat) / m as f64).sqrt(),
        mode: OverlapMode::Sampled,
    })
}

/// Magnitude-only sampled overlap from the literal two-state test.
pub fn swap_test_sampled<R: Rng>(
    a: &SimState,
    b: &SimState,
    shots: u64,
    rng: &mut R,
) -> Result<OverlapEstimate> {
    let p = swap_test_prob(a, b)?;
    let mut hits = 0u64;
    for _ in 0..shots.max(1) {
        if rng.random::<f64>() < p {
            hits += 1;
        }
    }
    let shots = shots.max(1);
    let p_hat = hits as f64 / shots as f64;
    let value = (2.0 * p_hat - 1.0).max(0.0).sqrt();
    Ok(OverlapEstimate {
        value,
        samples: shots,
        stderr: (p_hat * (1.0 - p_hat) / shots as f64).sqrt(),
        mode: OverlapMode::Sampled,
    })
}
