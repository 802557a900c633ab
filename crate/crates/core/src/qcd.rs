//! Quantum coordinate-descent engine: block-encoded column-action
//! iteration with separate solution and residual states, co-run with the
//! classical recursion.
//!
//! After `k` steps the solution state carries `x_k / (k+1)` in its
//! all-zeros block (two ancillas added per step) and the residual state
//! carries `ρ · r_k` (one ancilla per step). Each step first rebuilds the
//! solution from the *current* residual state, then projects the residual
//! state itself — that ordering is fixed here and not exposed piecewise.
//!
//! When `‖r₀‖ ≠ 1` the residual is encoded with one extra leading ancilla
//! and a scale `ρ = min(1, 1/‖r₀‖)`, so `ρ‖r_k‖ ≤ 1` for all `k`. The
//! correction term then carries `ρ` through the derivation, and the
//! solution block encodes the damped iterate `x₀ + ρ (x_k − x₀)`; with
//! `ρ = 1` (which includes every `‖r₀‖ ≤ 1` start) this is `x_k` itself.

use ndarray::Array1;

use crate::classical::{cd_step, CdState, IndexSampler, RESIDUAL_REFRESH_EVERY};
use crate::error::{Error, Result};
use crate::oracles::{apply_oracle, OracleSet};
use crate::problem::{norm2, pad_vector, LinearSystem, NormMode};
use crate::qkaczmarz::BLOCK_EQUALITY_TOL;
use crate::simstate::{SimState, DEFAULT_AMPLITUDE_CAP};

/// Oracle calls per step: one column state-preparation in the solution
/// update, plus the conjugating pair inside the residual's controlled flip.
pub const ORACLE_CALLS_PER_STEP: u64 = 3;

/// A quantum coordinate-descent run paired with its classical trajectory.
#[derive(Debug, Clone)]
pub struct QCdRun {
    sys: LinearSystem,
    oracles: OracleSet,
    xstate: SimState,
    rstate: SimState,
    rho: f64,
    /// Remark-2 encoding: one extra leading ancilla on both states.
    extra_ancilla: bool,
    k: usize,
    classical: CdState,
    x0: Array1<f64>,
    oracle_calls: u64,
    structured_ops: u64,
    amplitude_cap: usize,
    converged_at_init: bool,
}

impl QCdRun {
    /// Starts a run from a unit `x₀` on a column-normalized system.
    ///
    /// `r₀ = b − A x₀` is computed classically. If `‖r₀‖ = 1` (within
    /// 1e-12) the residual is encoded directly; otherwise the rescaled
    /// encoding with `ρ = min(1, 1/‖r₀‖)` and one extra ancilla is used.
    /// A zero residual means the start is already converged; the run is
    /// still constructed and steps are no-ops on the encoded blocks.
    pub fn init(sys: &LinearSystem, x0: &Array1<f64>) -> Result<Self> {
        if sys.mode() != NormMode::ColumnNormalized {
            return Err(Error::WrongMode {
                expected: NormMode::ColumnNormalized,
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
        let oracles = OracleSet::for_columns(&sys)?;
        let classical = CdState::new(x0.clone(), &sys);
        let r0_norm = norm2(classical.r.view());
        let n = sys.n_padded();

        let (rho, extra_ancilla, rstate, converged) = if r0_norm < 1e-14 {
            // Already converged: zero block is the (zero) scaled residual,
            // full weight on the garbage branch.
            let mut amps = vec![0.0; 2 * n];
            amps[n] = 1.0;
            (1.0, true, SimState::from_amplitudes(1, n, amps)?, true)
        } else if (r0_norm - 1.0).abs() <= 1e-12 {
            let unit = &classical.r / r0_norm;
            (
                1.0,
                false,
                SimState::from_system_vector(unit.as_slice().unwrap())?,
                false,
            )
        } else {
            let rho = if r0_norm > 1.0 { 1.0 / r0_norm } else { 1.0 };
            let weight = rho * r0_norm;
            let garbage = (1.0 - weight * weight).max(0.0).sqrt();
            let unit = &classical.r / r0_norm;
            let mut amps = vec![0.0; 2 * n];
            for (i, v) in unit.iter().enumerate() {
                amps[i] = weight * v;
                amps[n + i] = garbage * v;
            }
            (rho, true, SimState::from_amplitudes(1, n, amps)?, false)
        };

        let xstate = SimState::from_system_vector(x0.as_slice().unwrap())?;
        let xstate = if extra_ancilla {
            xstate.prepend_zero_ancillas(1)
        } else {
            xstate
        };
        Ok(Self {
            sys,
            oracles,
            xstate,
            rstate,
            rho,
            extra_ancilla,
            k: 0,
            classical,
            x0,
            oracle_calls: 0,
            structured_ops: 0,
            amplitude_cap: DEFAULT_AMPLITUDE_CAP,
            converged_at_init: converged,
        })
    }

    pub fn with_amplitude_cap(mut self, cap: usize) -> Self {
        self.amplitude_cap = cap;
        self
    }

    /// Amplitude count the solution state reaches after `steps` steps.
    pub fn required_amplitudes(n_padded: usize, steps: usize, extra_ancilla: bool) -> u128 {
        let shift = 2 * steps + usize::from(extra_ancilla);
        if shift >= 100 {
            return u128::MAX;
        }
        (n_padded as u128) << shift
    }

    /// Solution update: superposes the current solution state with the
    /// column-prepared residual state, swaps the two fresh qubits inward,
    /// transfers the indexed component, and mixes with the step rotation.
    fn step_solution(&mut self, t: usize) -> Result<()> {
        let required = (self.xstate.len() as u128) * 4;
        if required > self.amplitude_cap as u128 {
            return Err(Error::AmplitudeCapExceeded {
                required,
                cap: self.amplitude_cap,
            });
        }
        let mut r_branch = self.rstate.clone();
        apply_oracle(&mut r_branch, self.oracles.column(t)?, None)?;
        self.oracle_calls += 1;
        let pad = self.xstate.q() - r_branch.q();
        let r_branch = r_branch.prepend_zero_ancillas(pad);

        let kf = self.k as f64;
        let beta = ((kf + 1.0) / (kf + 2.0)).sqrt();
        let gamma = (1.0 / (kf + 2.0)).sqrt();
        let branch_x = self.xstate.prepend_zero_ancillas(1);
        let branch_r = r_branch.prepend_zero_ancillas(1);
        let mut phi = SimState::prepend_superposed_ancilla(&branch_x, &branch_r, beta, gamma)?;

        let q_tot = phi.q();
        // Move the fresh pair next to the system register. The second swap
        // runs first so the two never collide (they share a position only
        // when q_tot = 3).
        phi.swap_qubits(2, q_tot)?;
        phi.swap_qubits(1, q_tot - 1)?;
        phi.apply_wt(t, (q_tot - 1, q_tot))?;
        phi.apply_gk(self.k, q_tot)?;
        self.structured_ops += 5;
        self.xstate = phi;
        Ok(())
    }

    /// Residual update: one fresh ancilla, then the controlled flip built
    /// from column `t` projects the encoded residual.
    fn step_residual(&mut self, t: usize) -> Result<()> {
        let required = (self.rstate.len() as u128) * 2;
        if required > self.amplitude_cap as u128 {
            return Err(Error::AmplitudeCapExceeded {
                required,
                cap: self.amplitude_cap,
            });
        }
        let mut next = self.rstate.prepend_zero_ancillas(1);
        let q_r = next.q();
        next.swap_qubits(1, q_r)?;
        next.apply_ut(self.sys.column(t).as_slice().unwrap(), q_r)?;
        self.structured_ops += 3;
        self.oracle_calls += 2;
        self.rstate = next;
        Ok(())
    }

    /// One full step with column `t`: solution update (consuming the
    /// current residual state), then residual update, then the paired
    /// classical step.
    pub fn step(&mut self, t: usize) -> Result<()> {
        if t >= self.sys.cols() {
            return Err(Error::InvalidIndex {
                index: t,
                limit: self.sys.cols(),
            });
        }
        self.step_solution(t)?;
        self.step_residual(t)?;
        self.classical = cd_step(&self.classical, &self.sys, t)?;
        if self.classical.k.is_multiple_of(RESIDUAL_REFRESH_EVERY) {
            self.classical.refresh_residual(&self.sys);
        }
        self.k += 1;
        Ok(())
    }

    /// Runs `steps` sampled steps with per-cadence block-equality checks
    /// on both states.
    pub fn run(
        sys: &LinearSystem,
        x0: &Array1<f64>,
        sampler: &mut IndexSampler,
        steps: usize,
        check_every: usize,
        amplitude_cap: usize,
    ) -> Result<Self> {
        let mut run = Self::init(sys, x0)?.with_amplitude_cap(amplitude_cap);
        let required = Self::required_amplitudes(run.sys.n_padded(), steps, run.extra_ancilla);
        if required > amplitude_cap as u128 {
            return Err(Error::AmplitudeCapExceeded {
                required,
                cap: amplitude_cap,
            });
        }
        for s in 1..=steps {
            let t = sampler.sample();
            run.step(t)?;
            if check_every != 0 && (s.is_multiple_of(check_every) || s == steps) {
                let deviation = run.solution_deviation().max(run.residual_deviation());
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

    pub fn solution_state(&self) -> &SimState {
        &self.xstate
    }

    pub fn residual_state(&self) -> &SimState {
        &self.rstate
    }

    pub fn system(&self) -> &LinearSystem {
        &self.sys
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Whether the rescaled-residual encoding (one extra leading ancilla)
    /// is in use.
    pub fn has_extra_ancilla(&self) -> bool {
        self.extra_ancilla
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn classical(&self) -> &CdState {
        &self.classical
    }

    pub fn oracle_calls(&self) -> u64 {
        self.oracle_calls
    }

    pub fn structured_ops(&self) -> u64 {
        self.structured_ops
    }

    pub fn is_converged_at_init(&self) -> bool {
        self.converged_at_init
    }

    /// The vector the solution block encodes: `x₀ + ρ (x_k − x₀)`, which
    /// is the classical iterate itself whenever `ρ = 1`.
    pub fn encoded_solution_target(&self) -> Array1<f64> {
        if self.rho == 1.0 {
            return self.classical.x.clone();
        }
        &self.x0 + &((&self.classical.x - &self.x0) * self.rho)
    }

    /// Max entrywise deviation of `(k+1) · block(0…0)` from the encoded
    /// solution target.
    pub fn solution_deviation(&self) -> f64 {
        let (block, _) = self.xstate.zero_block();
        let scale = (self.k + 1) as f64;
        let target = self.encoded_solution_target();
        block
            .iter()
            .zip(target.iter())
            .map(|(amp, x)| (amp * scale - x).abs())
            .fold(0.0, f64::max)
    }

    /// Max entrywise deviation of `block(0…0)/ρ` from the classical
    /// residual.
    pub fn residual_deviation(&self) -> f64 {
        let (block, _) = self.rstate.zero_block();
        block
            .iter()
            .zip(self.classical.r.iter())
            .map(|(amp, r)| (amp / self.rho - r).abs())
            .fold(0.0, f64::max)
    }

    /// Whether the encoded solution respects the `‖·‖ ≤ k+1` bound that
    /// keeps the block constant well-defined.
    pub fn solution_norm_bound_ok(&self) -> bool {
        norm2(self.encoded_solution_target().view()) <= (self.k + 1) as f64 + 1e-12
    }

    /// `ρ‖r_k‖`: at most one for every step, since `ρ‖r₀‖ ≤ 1` and the
    /// residual update is a projection.
    pub fn scaled_residual_weight(&self) -> f64 {
        self.rho * norm2(self.classical.r.view())
    }

    pub fn classical_residual_norm(&self) -> f64 {
        norm2(self.classical.r.view())
    }
}
