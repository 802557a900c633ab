//! Quantum Kaczmarz engine: the block-encoded row-action iteration,
//! co-run with its classical counterpart on the same index sequence.
//!
//! After `k` steps the statevector carries `x_k / μ_k` in its
//! all-zeros-ancilla block, where `x_k` is the classical iterate and `μ_k`
//! the accumulated normalization with `μ_{k+1}² = μ_k² + b_{t_k}²`. Each
//! step prepends one ancilla qubit holding the weighted row state, swaps
//! it next to the system register, and applies the reflection-controlled
//! flip built from the chosen row.
//!
//! The paired classical state makes the block equality checkable per step
//! at desk scale; the check itself costs `O(n)` on top of the
//! `O(2^k · n)` step.

use ndarray::Array1;

use crate::classical::{kaczmarz_step, IndexSampler, KaczmarzState};
use crate::error::{Error, Result};
use crate::problem::{norm2, pad_vector, LinearSystem, NormMode};
use crate::simstate::{SimState, DEFAULT_AMPLITUDE_CAP};

/// Tolerance for the central block-equality contract.
pub const BLOCK_EQUALITY_TOL: f64 = 1e-10;

/// Oracle calls per step: the controlled flip conjugates by the row
/// state-preparation operator and its adjoint.
pub const ORACLE_CALLS_PER_STEP: u64 = 2;

/// A quantum Kaczmarz run paired with its classical trajectory.
#[derive(Debug, Clone)]
pub struct QKaczmarzRun {
    sys: LinearSystem,
    state: SimState,
    mu: f64,
    sum_b_squared: f64,
    k: usize,
    classical: KaczmarzState,
    oracle_calls: u64,
    structured_ops: u64,
    amplitude_cap: usize,
}

impl QKaczmarzRun {
    /// Starts a run from a unit `x₀` on a row-normalized system. The
    /// system is padded to its power-of-two dimension internally; `x₀` may
    /// be given in original or padded length.
    pub fn init(sys: &LinearSystem, x0: &Array1<f64>) -> Result<Self> {
        if sys.mode() != NormMode::RowNormalized {
            return Err(Error::WrongMode {
                expected: NormMode::RowNormalized,
                found: sys.mode(),
            });
        }
        let sys = sys.pad_to_pow2();
        let norm = norm2(x0.view());
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitNorm {
                what: "initial vector",
                norm,
            });
        }
        let x0 = pad_vector(x0, sys.n_padded());
        let state = SimState::from_system_vector(x0.as_slice().unwrap())?;
        Ok(Self {
            sys,
            state,
            mu: 1.0,
            sum_b_squared: 0.0,
            k: 0,
            classical: KaczmarzState::new(x0),
            oracle_calls: 0,
            structured_ops: 0,
            amplitude_cap: DEFAULT_AMPLITUDE_CAP,
        })
    }

    pub fn with_amplitude_cap(mut self, cap: usize) -> Self {
        self.amplitude_cap = cap;
        self
    }

    /// Amplitude count a run of `steps` steps will reach.
    pub fn required_amplitudes(n_padded: usize, steps: usize) -> u128 {
        if steps >= 100 {
            return u128::MAX;
        }
        (n_padded as u128) << steps
    }

    /// Advances one step with row `t`: weights the fresh ancilla by
    /// `β = μ/√(μ² + b_t²)` and `γ = β b_t / μ` (signed like `b_t`), then
    /// swaps it inward and applies the row's controlled flip.
    pub fn step(&mut self, t: usize) -> Result<()> {
        if t >= self.sys.rows() {
            return Err(Error::InvalidIndex {
                index: t,
                limit: self.sys.rows(),
            });
        }
        let required = (self.state.len() as u128) * 2;
        if required > self.amplitude_cap as u128 {
            return Err(Error::AmplitudeCapExceeded {
                required,
                cap: self.amplitude_cap,
            });
        }
        let b_t = self.sys.rhs()[t];
        let beta = (self.mu * self.mu / (self.mu * self.mu + b_t * b_t)).sqrt();
        let gamma = beta * b_t / self.mu;
        let a_t = self.sys.row(t);

        let row_branch = SimState::from_system_with_ancillas(self.k, a_t.as_slice().unwrap())?;
        let mut next = SimState::prepend_superposed_ancilla(&self.state, &row_branch, beta, gamma)?;
        next.swap_qubits(1, self.k + 1)?;
        next.apply_ut(a_t.as_slice().unwrap(), self.k + 1)?;
        self.structured_ops += 3;
        self.oracle_calls += ORACLE_CALLS_PER_STEP;

        self.classical = kaczmarz_step(&self.classical, &self.sys, t)?;
        self.state = next;
        self.mu /= beta;
        self.sum_b_squared += b_t * b_t;
        self.k += 1;
        debug_assert!(self.mu >= 1.0 - 1e-12);
        Ok(())
    }

    /// Runs `steps` sampled steps, checking the block equality every
    /// `check_every` steps (and at the end). Fails with
    /// [`Error::BlockEquality`] on any exceedance.
    pub fn run(
        sys: &LinearSystem,
        x0: &Array1<f64>,
        sampler: &mut IndexSampler,
        steps: usize,
        check_every: usize,
        amplitude_cap: usize,
    ) -> Result<Self> {
        let padded = sys.pad_to_pow2();
        let required = Self::required_amplitudes(padded.n_padded(), steps);
        if required > amplitude_cap as u128 {
            return Err(Error::AmplitudeCapExceeded {
                required,
                cap: amplitude_cap,
            });
        }
        let mut run = Self::init(sys, x0)?.with_amplitude_cap(amplitude_cap);
        for s in 1..=steps {
            let t = sampler.sample();
            run.step(t)?;
            if check_every != 0 && (s.is_multiple_of(check_every) || s == steps) {
                let deviation = run.block_deviation();
                if deviation > BLOCK_EQUALITY_TOL {
                    return Err(Error::BlockEquality {
                        step: s,
                        deviation,
                        tolerance: BLOCK_EQUALITY_TOL,
                    });
                }
            }
        }
        Ok(run)
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn system(&self) -> &LinearSystem {
        &self.sys
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn classical(&self) -> &KaczmarzState {
        &self.classical
    }

    pub fn oracle_calls(&self) -> u64 {
        self.oracle_calls
    }

    pub fn structured_ops(&self) -> u64 {
        self.structured_ops
    }

    /// Max entrywise deviation of `μ_k · block(0^k)` from the paired
    /// classical iterate.
    pub fn block_deviation(&self) -> f64 {
        let (block, _) = self.state.zero_block();
        block
            .iter()
            .zip(self.classical.x.iter())
            .map(|(amp, x)| (amp * self.mu - x).abs())
            .fold(0.0, f64::max)
    }

    /// `|μ_k² − 1 − Σ_{i<k} b_{t_i}²|`: deviation from the normalization
    /// recurrence.
    pub fn mu_recurrence_deviation(&self) -> f64 {
        (self.mu * self.mu - 1.0 - self.sum_b_squared).abs()
    }

    /// Probability of observing the all-zeros ancilla pattern, i.e.
    /// `(‖x_k‖/μ_k)²`.
    pub fn success_probability(&self) -> f64 {
        let (_, norm) = self.state.zero_block();
        norm * norm
    }

    pub fn classical_residual_norm(&self) -> f64 {
        self.sys.residual_norm(&self.classical.x)
    }
}
