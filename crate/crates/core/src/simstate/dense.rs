//! Literal dense constructions of the structured operators, used as an
//! independent oracle in tests and the verification suite.
//!
//! Each function builds the full `(2^q · n) × (2^q · n)` matrix directly
//! from the operator's defining block structure, never reusing the
//! structured application path. Intended for small sizes only.

use ndarray::{Array1, Array2};

use super::gk_matrix;

fn full_dim(q: usize, dim_sys: usize) -> usize {
    (1usize << q) * dim_sys
}

fn bit(anc: usize, q: usize, qubit: usize) -> usize {
    (anc >> (q - qubit)) & 1
}

/// Dense reflection-controlled flip: blocks `[[I−P, P], [P, I−P]]` with
/// `P = a aᵀ` on (target qubit ⊗ system), identity on other ancillas.
pub fn ut(q: usize, a: &[f64], target_qubit: usize) -> Array2<f64> {
    let n = a.len();
    let dim = full_dim(q, n);
    let mut m = Array2::zeros((dim, dim));
    for row in 0..dim {
        let (anc_r, s_r) = (row / n, row % n);
        for col in 0..dim {
            let (anc_c, s_c) = (col / n, col % n);
            let spectators_equal = (1..=q)
                .filter(|i| *i != target_qubit)
                .all(|i| bit(anc_r, q, i) == bit(anc_c, q, i));
            if !spectators_equal {
                continue;
            }
            let p = a[s_r] * a[s_c];
            let same_target = bit(anc_r, q, target_qubit) == bit(anc_c, q, target_qubit);
            m[(row, col)] = if same_target {
                (if s_r == s_c { 1.0 } else { 0.0 }) - p
            } else {
                p
            };
        }
    }
    m
}

/// Dense three-block column-transfer operator on the qubit pair `(i, j)`:
/// pair values 00 and 11 act as identity, within {01, 10} the diagonal is
/// `I − |t⟩⟨t|` and the off-diagonal is `|t⟩⟨t|`.
pub fn wt(q: usize, dim_sys: usize, t: usize, qubit_pair: (usize, usize)) -> Array2<f64> {
    let (qi, qj) = qubit_pair;
    let dim = full_dim(q, dim_sys);
    let mut m = Array2::zeros((dim, dim));
    for row in 0..dim {
        let (anc_r, s_r) = (row / dim_sys, row % dim_sys);
        for col in 0..dim {
            let (anc_c, s_c) = (col / dim_sys, col % dim_sys);
            let spectators_equal = (1..=q)
                .filter(|i| *i != qi && *i != qj)
                .all(|i| bit(anc_r, q, i) == bit(anc_c, q, i));
            if !spectators_equal {
                continue;
            }
            let pair_r = (bit(anc_r, q, qi), bit(anc_r, q, qj));
            let pair_c = (bit(anc_c, q, qi), bit(anc_c, q, qj));
            let delta = if s_r == s_c { 1.0 } else { 0.0 };
            let proj = if s_r == t && s_c == t { 1.0 } else { 0.0 };
            m[(row, col)] = match (pair_r, pair_c) {
                ((0, 0), (0, 0)) | ((1, 1), (1, 1)) => delta,
                ((0, 1), (0, 1)) | ((1, 0), (1, 0)) => delta - proj,
                ((0, 1), (1, 0)) | ((1, 0), (0, 1)) => proj,
                _ => 0.0,
            };
        }
    }
    m
}

/// Dense single-qubit rotation tensored with identities.
pub fn ancilla_rotation(q: usize, dim_sys: usize, rot: [[f64; 2]; 2], qubit: usize) -> Array2<f64> {
    let dim = full_dim(q, dim_sys);
    let mut m = Array2::zeros((dim, dim));
    for row in 0..dim {
        let (anc_r, s_r) = (row / dim_sys, row % dim_sys);
        for col in 0..dim {
            let (anc_c, s_c) = (col / dim_sys, col % dim_sys);
            if s_r != s_c {
                continue;
            }
            let spectators_equal = (1..=q)
                .filter(|i| *i != qubit)
                .all(|i| bit(anc_r, q, i) == bit(anc_c, q, i));
            if !spectators_equal {
                continue;
            }
            m[(row, col)] = rot[bit(anc_r, q, qubit)][bit(anc_c, q, qubit)];
        }
    }
    m
}

/// Dense step-`k` mixing rotation.
pub fn gk(q: usize, dim_sys: usize, k: usize, qubit: usize) -> Array2<f64> {
    ancilla_rotation(q, dim_sys, gk_matrix(k), qubit)
}

/// Dense qubit swap: permutation moving amplitude at an ancilla bitstring
/// to the string with bits `i` and `j` exchanged.
pub fn swap(q: usize, dim_sys: usize, i: usize, j: usize) -> Array2<f64> {
    let dim = full_dim(q, dim_sys);
    let mut m = Array2::zeros((dim, dim));
    for col in 0..dim {
        let (anc, s) = (col / dim_sys, col % dim_sys);
        let bi = bit(anc, q, i);
        let bj = bit(anc, q, j);
        let mut target = anc;
        if bi != bj {
            target ^= (1 << (q - i)) | (1 << (q - j));
        }
        m[(target * dim_sys + s, col)] = 1.0;
    }
    m
}

/// Applies a dense operator to a raw amplitude vector.
pub fn apply(m: &Array2<f64>, amps: &[f64]) -> Vec<f64> {
    let v = Array1::from_vec(amps.to_vec());
    m.dot(&v).to_vec()
}

/// `‖MᵀM − I‖_max`: deviation from orthogonality.
pub fn orthogonality_defect(m: &Array2<f64>) -> f64 {
    let gram = m.t().dot(m);
    let mut worst: f64 = 0.0;
    for ((i, j), v) in gram.indexed_iter() {
        let want = if i == j { 1.0 } else { 0.0 };
        worst = worst.max((v - want).abs());
    }
    worst
}
