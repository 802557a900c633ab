//! State-preparation operators, modeled as explicit Householder
//! reflections rather than gate circuits.
//!
//! For every row `t` there is an orthogonal `V_t` with `V_t e₀ = a_t`; for
//! every column `j` an orthogonal `S_j` with `S_j a_j = e_j` (equivalently
//! `S_jᵀ e_j = a_j`). A reflection through the bisector of two unit
//! vectors exchanges them, so a single Householder factor realizes each
//! defining property exactly, with the image on the `+` target — no sign
//! fix needed. Reflections are symmetric involutions, hence self-adjoint:
//! applying one twice is the identity.
//!
//! Application costs `O(n)` per system block (one inner product and one
//! rank-1 update). The cost model counts each application as one oracle
//! call; see the trace documentation.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::problem::{norm2, LinearSystem};
use crate::simstate::SimState;

/// Threshold below which the reflection degenerates to the identity.
const DEGENERATE_TOL: f64 = 1e-8;

/// A Householder reflection `H = I − 2 v vᵀ`, or the identity.
///
/// Symmetric and self-inverse, so it serves as its own adjoint.
#[derive(Debug, Clone)]
pub struct Reflector {
    v: Option<Array1<f64>>,
    dim: usize,
}

impl Reflector {
    /// Reflection exchanging the unit vectors `from` and `to`; identity
    /// when they nearly coincide.
    pub fn exchanging(from: ArrayView1<'_, f64>, to: ArrayView1<'_, f64>) -> Result<Self> {
        if from.len() != to.len() {
            return Err(Error::DimensionMismatch {
                expected: from.len(),
                found: to.len(),
            });
        }
        for (what, v) in [("reflection source", from), ("reflection target", to)] {
            let norm = norm2(v);
            if (norm - 1.0).abs() > 1e-12 {
                return Err(Error::NotUnitNorm { what, norm });
            }
        }
        let diff = &to.to_owned() - &from;
        let norm = norm2(diff.view());
        if norm < DEGENERATE_TOL {
            return Ok(Self {
                v: None,
                dim: from.len(),
            });
        }
        Ok(Self {
            v: Some(diff / norm),
            dim: from.len(),
        })
    }

    /// Reflection about the hyperplane orthogonal to the unit vector `v`
    /// (i.e. `I − 2 v vᵀ`).
    pub fn about(v: ArrayView1<'_, f64>) -> Result<Self> {
        let norm = norm2(v);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitNorm {
                what: "reflection axis",
                norm,
            });
        }
        Ok(Self {
            v: Some(v.to_owned()),
            dim: v.len(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_identity(&self) -> bool {
        self.v.is_none()
    }

    /// In-place application to one system block.
    pub fn apply_slice(&self, x: &mut [f64]) {
        if let Some(v) = &self.v {
            let mut dot = 0.0;
            for (xi, vi) in x.iter().zip(v.iter()) {
                dot += xi * vi;
            }
            let scale = 2.0 * dot;
            for (xi, vi) in x.iter_mut().zip(v.iter()) {
                *xi -= scale * vi;
            }
        }
    }

    pub fn apply_vec(&self, x: &Array1<f64>) -> Array1<f64> {
        let mut out = x.to_vec();
        self.apply_slice(&mut out);
        Array1::from_vec(out)
    }

    /// Dense matrix form, for orthogonality checks at small sizes.
    pub fn to_matrix(&self) -> Array2<f64> {
        let mut m = Array2::eye(self.dim);
        if let Some(v) = &self.v {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    m[(i, j)] -= 2.0 * v[i] * v[j];
                }
            }
        }
        m
    }
}

/// Row oracle: `V_t e₀ = a_t` for a unit row vector.
pub fn build_row_oracle(a_t: ArrayView1<'_, f64>) -> Result<Reflector> {
    let mut e0 = Array1::zeros(a_t.len());
    e0[0] = 1.0;
    Reflector::exchanging(e0.view(), a_t)
}

/// Column oracle: `S_j a_j = e_j`, so its transpose maps `e_j` to `a_j`.
pub fn build_column_oracle(a_j: ArrayView1<'_, f64>, j: usize) -> Result<Reflector> {
    if j >= a_j.len() {
        return Err(Error::InvalidIndex {
            index: j,
            limit: a_j.len(),
        });
    }
    let mut ej = Array1::zeros(a_j.len());
    ej[j] = 1.0;
    Reflector::exchanging(a_j, ej.view())
}

/// All row and column oracles of a normalized, padded system.
///
/// Only original (unpadded) indices get an oracle; padded rows and columns
/// are zero and are never sampled.
#[derive(Debug, Clone)]
pub struct OracleSet {
    rows: Vec<Reflector>,
    cols: Vec<Reflector>,
    dim: usize,
}

impl OracleSet {
    /// Builds `V_t` for every original row of a row-normalized system.
    pub fn for_rows(sys: &LinearSystem) -> Result<Self> {
        let rows = (0..sys.rows())
            .map(|t| build_row_oracle(sys.row(t)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rows,
            cols: Vec::new(),
            dim: sys.matrix().ncols(),
        })
    }

    /// Builds `S_j` for every original column of a column-normalized
    /// system.
    pub fn for_columns(sys: &LinearSystem) -> Result<Self> {
        let cols = (0..sys.cols())
            .map(|j| build_column_oracle(sys.column(j), j))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            rows: Vec::new(),
            cols,
            dim: sys.matrix().nrows(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, t: usize) -> Result<&Reflector> {
        self.rows.get(t).ok_or(Error::InvalidIndex {
            index: t,
            limit: self.rows.len(),
        })
    }

    pub fn column(&self, j: usize) -> Result<&Reflector> {
        self.cols.get(j).ok_or(Error::InvalidIndex {
            index: j,
            limit: self.cols.len(),
        })
    }
}

/// Applies a reflector to the system register of a state, within every
/// ancilla block or only the block matching `controlled_on`.
///
/// Reflectors are self-adjoint, so this serves for both the operator and
/// its adjoint.
pub fn apply_oracle(
    state: &mut SimState,
    op: &Reflector,
    controlled_on: Option<&str>,
) -> Result<()> {
    if op.dim() != state.dim_sys() {
        return Err(Error::DimensionMismatch {
            expected: state.dim_sys(),
            found: op.dim(),
        });
    }
    state.for_each_system_block_mut(controlled_on, |block| op.apply_slice(block))
}

/// The factorized route to the reflection-controlled flip: conjugate the
/// flip-at-`e₀` by the state-preparation oracle,
/// `(I₂ ⊗ V) (flip at e₀) (I₂ ⊗ Vᵀ)`.
pub fn apply_ut_via_factorization(
    state: &mut SimState,
    v: &Reflector,
    target_qubit: usize,
) -> Result<()> {
    let mut e0 = vec![0.0; state.dim_sys()];
    e0[0] = 1.0;
    apply_oracle(state, v, None)?; // Vᵀ = V
    state.apply_ut(&e0, target_qubit)?;
    apply_oracle(state, v, None)
}
