//! Linear-system instances: construction, unit-norm scaling, power-of-two
//! padding, and reproducible random generation.
//!
//! The iteration formulas assume unit-norm rows (row action) or columns
//! (column action). [`LinearSystem::normalize_rows`] and
//! [`LinearSystem::normalize_columns`] perform that scaling while recording
//! the original norms, so the raw system can always be recovered and
//! solutions mapped back. [`LinearSystem::pad_to_pow2`] zero-extends the
//! system to the power-of-two dimension a qubit register needs; padded
//! indices are never sampled.

pub mod io;

use ndarray::{Array1, Array2, ArrayView1};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm below which a row or column counts as zero and is rejected.
pub const ZERO_NORM_TOL: f64 = 1e-14;

/// Which unit-norm scaling has been applied to the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMode {
    Raw,
    RowNormalized,
    ColumnNormalized,
}

/// A dense real system `A x = b` with scaling and padding metadata.
///
/// The matrix is stored twice, row-major and column-major, so both row and
/// column action stay contiguous. Instances are immutable after
/// construction; every transformation returns a new system.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    a: Array2<f64>,
    /// Transpose copy: row `j` of `a_cols` is column `j` of `a`.
    a_cols: Array2<f64>,
    b: Array1<f64>,
    row_scalings: Array1<f64>,
    col_scalings: Array1<f64>,
    rows: usize,
    cols: usize,
    n_padded: usize,
    mode: NormMode,
    planted: Option<Array1<f64>>,
}

impl LinearSystem {
    /// Builds a raw system, rejecting empty dimensions and zero rows or
    /// columns.
    pub fn new(a: Array2<f64>, b: Array1<f64>) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::Config(
                "a linear system needs at least one row and one column".into(),
            ));
        }
        if b.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: b.len(),
            });
        }
        let rows = a.nrows();
        let cols = a.ncols();
        let mut row_scalings = Array1::zeros(rows);
        for (i, row) in a.rows().into_iter().enumerate() {
            let norm = norm2(row);
            if norm < ZERO_NORM_TOL {
                return Err(Error::ZeroRow(i));
            }
            row_scalings[i] = norm;
        }
        let mut col_scalings = Array1::zeros(cols);
        for (j, col) in a.columns().into_iter().enumerate() {
            let norm = norm2(col);
            if norm < ZERO_NORM_TOL {
                return Err(Error::ZeroColumn(j));
            }
            col_scalings[j] = norm;
        }
        let a_cols = transpose_copy(&a);
        let n_padded = rows.max(cols).next_power_of_two();
        Ok(Self {
            a,
            a_cols,
            b,
            row_scalings,
            col_scalings,
            rows,
            cols,
            n_padded,
            mode: NormMode::Raw,
            planted: None,
        })
    }

    fn with_planted(mut self, x: Array1<f64>) -> Self {
        self.planted = Some(x);
        self
    }

    /// Original (unpadded) row count.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Original (unpadded) column count.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Smallest power of two that fits both dimensions.
    pub fn n_padded(&self) -> usize {
        self.n_padded
    }

    /// Whether the storage has been zero-extended to `n_padded` square.
    pub fn is_padded(&self) -> bool {
        self.a.nrows() == self.n_padded && self.a.ncols() == self.n_padded
    }

    pub fn mode(&self) -> NormMode {
        self.mode
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn rhs(&self) -> &Array1<f64> {
        &self.b
    }

    /// Row `t` of the (possibly padded) matrix.
    pub fn row(&self, t: usize) -> ArrayView1<'_, f64> {
        self.a.row(t)
    }

    /// Column `j` of the (possibly padded) matrix, contiguous.
    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.a_cols.row(j)
    }

    /// Original row norms (before any normalization).
    pub fn row_scalings(&self) -> &Array1<f64> {
        &self.row_scalings
    }

    /// Original column norms (before any normalization).
    pub fn col_scalings(&self) -> &Array1<f64> {
        &self.col_scalings
    }

    /// Planted solution of the *current* (scaled/padded) system, if known.
    pub fn planted_solution(&self) -> Option<&Array1<f64>> {
        self.planted.as_ref()
    }

    /// `‖b − A x‖₂` over the stored dimensions.
    pub fn residual_norm(&self, x: &Array1<f64>) -> f64 {
        let r = &self.b - &self.a.dot(x);
        norm2(r.view())
    }

    /// Scales every original row (and the matching entry of `b`) to unit
    /// norm. The solution set is unchanged; original norms land in
    /// `row_scalings`.
    pub fn normalize_rows(&self) -> Result<LinearSystem> {
        if self.mode != NormMode::Raw {
            return Err(Error::WrongMode {
                expected: NormMode::Raw,
                found: self.mode,
            });
        }
        let mut sys = self.clone();
        for i in 0..self.rows {
            let norm = norm2(self.a.row(i));
            if norm < ZERO_NORM_TOL {
                return Err(Error::ZeroRow(i));
            }
            sys.row_scalings[i] = norm;
            for j in 0..self.a.ncols() {
                sys.a[(i, j)] /= norm;
                sys.a_cols[(j, i)] /= norm;
            }
            sys.b[i] /= norm;
        }
        sys.mode = NormMode::RowNormalized;
        // Row scaling leaves the solution set untouched.
        Ok(sys)
    }

    /// Scales every original column to unit norm. A solution `y` of the
    /// scaled system maps back to the raw one via `x_j = y_j / col_scalings[j]`.
    pub fn normalize_columns(&self) -> Result<LinearSystem> {
        if self.mode != NormMode::Raw {
            return Err(Error::WrongMode {
                expected: NormMode::Raw,
                found: self.mode,
            });
        }
        let mut sys = self.clone();
        for j in 0..self.cols {
            let norm = norm2(self.column(j));
            if norm < ZERO_NORM_TOL {
                return Err(Error::ZeroColumn(j));
            }
            sys.col_scalings[j] = norm;
            for i in 0..self.a.nrows() {
                sys.a[(i, j)] /= norm;
                sys.a_cols[(j, i)] /= norm;
            }
        }
        sys.mode = NormMode::ColumnNormalized;
        if let Some(x) = &self.planted {
            // The scaled system is solved by y = D x.
            let mut y = x.clone();
            for j in 0..self.cols.min(y.len()) {
                y[j] *= sys.col_scalings[j];
            }
            sys.planted = Some(y);
        }
        Ok(sys)
    }

    /// Multiplies the recorded scalings back in, recovering the raw system.
    pub fn unnormalized(&self) -> LinearSystem {
        let mut sys = self.clone();
        match self.mode {
            NormMode::Raw => {}
            NormMode::RowNormalized => {
                for i in 0..self.rows {
                    let s = self.row_scalings[i];
                    for j in 0..self.a.ncols() {
                        sys.a[(i, j)] *= s;
                        sys.a_cols[(j, i)] *= s;
                    }
                    sys.b[i] *= s;
                }
            }
            NormMode::ColumnNormalized => {
                for j in 0..self.cols {
                    let s = self.col_scalings[j];
                    for i in 0..self.a.nrows() {
                        sys.a[(i, j)] *= s;
                        sys.a_cols[(j, i)] *= s;
                    }
                }
                if let Some(y) = &self.planted {
                    let mut x = y.clone();
                    for j in 0..self.cols.min(x.len()) {
                        x[j] /= self.col_scalings[j];
                    }
                    sys.planted = Some(x);
                }
            }
        }
        sys.mode = NormMode::Raw;
        sys
    }

    /// Zero-extends the system to `n_padded × n_padded`. Idempotent; norms
    /// of original rows and columns are unchanged by zero extension.
    pub fn pad_to_pow2(&self) -> LinearSystem {
        if self.is_padded() {
            return self.clone();
        }
        let n = self.n_padded;
        let mut a = Array2::zeros((n, n));
        for i in 0..self.a.nrows() {
            for j in 0..self.a.ncols() {
                a[(i, j)] = self.a[(i, j)];
            }
        }
        let mut b = Array1::zeros(n);
        for i in 0..self.b.len() {
            b[i] = self.b[i];
        }
        let planted = self.planted.as_ref().map(|x| {
            let mut p = Array1::zeros(n);
            for j in 0..x.len() {
                p[j] = x[j];
            }
            p
        });
        LinearSystem {
            a_cols: transpose_copy(&a),
            a,
            b,
            row_scalings: self.row_scalings.clone(),
            col_scalings: self.col_scalings.clone(),
            rows: self.rows,
            cols: self.cols,
            n_padded: n,
            mode: self.mode,
            planted,
        }
    }
}

/// Instance family for reproducible random systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Identity,
    RandomOrthogonalRows,
    /// Well-conditioned dense matrix (singular values in [0.5, 1.5]) with a
    /// planted solution, so iterative runs actually converge at desk scale.
    RandomConsistent,
    RandomGeneral,
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(Self::Identity),
            "random-orthogonal-rows" => Ok(Self::RandomOrthogonalRows),
            "random-consistent" => Ok(Self::RandomConsistent),
            "random-general" => Ok(Self::RandomGeneral),
            other => Err(Error::Config(format!("unknown problem kind '{other}'"))),
        }
    }
}

/// Recipe for a reproducible instance: same `(kind, n, seed)` always yields
/// the bit-identical system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub n: usize,
    pub seed: u64,
    /// Planted solution for consistent kinds; drawn at random when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<Vec<f64>>,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            seed,
            solution: None,
        }
    }
}

/// Generates the instance described by `spec` (raw mode).
pub fn generate(spec: &ProblemSpec) -> Result<LinearSystem> {
    if spec.n < 2 {
        return Err(Error::Config(format!(
            "instance dimension must be at least 2, got {}",
            spec.n
        )));
    }
    let n = spec.n;
    let mut rng = rand::SeedableRng::seed_from_u64(spec.seed);
    let planted = |rng: &mut ChaCha8Rng| -> Result<Array1<f64>> {
        match &spec.solution {
            Some(x) => {
                if x.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: x.len(),
                    });
                }
                Ok(Array1::from_vec(x.clone()))
            }
            None => Ok(random_unit_vector(n, rng)),
        }
    };
    match spec.kind {
        ProblemKind::Identity => {
            let x = planted(&mut rng)?;
            let sys = LinearSystem::new(Array2::eye(n), x.clone())?;
            Ok(sys.with_planted(x))
        }
        ProblemKind::RandomOrthogonalRows => {
            let q = random_orthogonal(n, &mut rng);
            let x = planted(&mut rng)?;
            let b = q.dot(&x);
            Ok(LinearSystem::new(q, b)?.with_planted(x))
        }
        ProblemKind::RandomConsistent => {
            let u = random_orthogonal(n, &mut rng);
            let v = random_orthogonal(n, &mut rng);
            // Singular values spread over [0.5, 1.5].
            let mut a = Array2::zeros((n, n));
            for (k, mut row) in u.rows().into_iter().map(|r| r.to_owned()).enumerate() {
                let sigma = 0.5 + k as f64 / (n - 1) as f64;
                row *= sigma;
                let vk = v.row(k);
                for i in 0..n {
                    for j in 0..n {
                        a[(i, j)] += row[i] * vk[j];
                    }
                }
            }
            let x = planted(&mut rng)?;
            let b = a.dot(&x);
            Ok(LinearSystem::new(a, b)?.with_planted(x))
        }
        ProblemKind::RandomGeneral => {
            let a = random_gaussian_matrix(n, n, &mut rng);
            let b = random_gaussian_vector(n, &mut rng);
            LinearSystem::new(a, b)
        }
    }
}

pub(crate) fn norm2(v: ArrayView1<'_, f64>) -> f64 {
    v.dot(&v).sqrt()
}

/// Transpose into standard layout, so rows of the result are contiguous.
fn transpose_copy(a: &Array2<f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.ncols(), a.nrows()), |(j, i)| a[(i, j)])
}

fn random_gaussian_vector(n: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    Array1::from_iter((0..n).map(|_| StandardNormal.sample(rng)))
}

fn random_gaussian_matrix(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((m, n), |_| StandardNormal.sample(rng))
}

/// Random unit vector, uniform on the sphere.
pub fn random_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    loop {
        let v = random_gaussian_vector(n, rng);
        let norm = norm2(v.view());
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// Random orthogonal matrix via Gram-Schmidt on Gaussian rows.
pub fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut q = Array2::zeros((n, n));
    let mut filled = 0;
    while filled < n {
        let mut v = random_gaussian_vector(n, rng);
        for i in 0..filled {
            let proj = q.row(i).dot(&v);
            let qi = q.row(i).to_owned();
            v -= &(qi * proj);
        }
        let norm = norm2(v.view());
        if norm < 1e-8 {
            continue; // colinear draw, retry
        }
        v /= norm;
        q.row_mut(filled).assign(&v);
        filled += 1;
    }
    q
}

/// Pads a vector with zeros to the system's padded dimension.
pub fn pad_vector(x: &Array1<f64>, n_padded: usize) -> Array1<f64> {
    if x.len() == n_padded {
        return x.clone();
    }
    let mut padded = Array1::zeros(n_padded);
    for i in 0..x.len() {
        padded[i] = x[i];
    }
    padded
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        let mut m: f64 = 0.0;
        for (x, y) in a.iter().zip(b.iter()) {
            m = m.max((x - y).abs());
        }
        m
    }

    #[test]
    fn normalize_rows_diagonal_scaling() {
        let sys = LinearSystem::new(array![[2.0, 0.0], [0.0, 1.0]], array![2.0, 3.0]).unwrap();
        let norm = sys.normalize_rows().unwrap();
        assert_eq!(norm.matrix(), &array![[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(norm.rhs(), &array![1.0, 3.0]);
        assert_eq!(norm.row_scalings(), &array![2.0, 1.0]);
    }

    #[test]
    fn normalize_rows_already_unit_is_identity() {
        let sys = LinearSystem::new(array![[0.0, 1.0], [1.0, 0.0]], array![0.5, 0.25]).unwrap();
        let norm = sys.normalize_rows().unwrap();
        assert_eq!(norm.matrix(), sys.matrix());
        assert_eq!(norm.rhs(), sys.rhs());
        assert_eq!(norm.row_scalings(), &array![1.0, 1.0]);
    }

    #[test]
    fn normalize_rows_three_four_five() {
        let sys = LinearSystem::new(array![[3.0, 4.0], [0.0, 1.0]], array![5.0, 1.0]).unwrap();
        let norm = sys.normalize_rows().unwrap();
        assert_abs_diff_eq!(norm.matrix()[(0, 0)], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(norm.matrix()[(0, 1)], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(norm.rhs()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(norm.row_scalings()[0], 5.0, epsilon = 1e-15);
    }

    #[test]
    fn normalize_columns_examples() {
        let sys = LinearSystem::new(array![[2.0, 0.0], [0.0, 1.0]], array![1.0, 1.0]).unwrap();
        let norm = sys.normalize_columns().unwrap();
        assert_eq!(norm.col_scalings(), &array![2.0, 1.0]);
        for j in 0..2 {
            assert_abs_diff_eq!(norm2(norm.column(j)), 1.0, epsilon = 1e-12);
        }

        let eye = LinearSystem::new(Array2::eye(3), array![1.0, 2.0, 3.0]).unwrap();
        let eyen = eye.normalize_columns().unwrap();
        assert_eq!(eyen.matrix(), eye.matrix());

        let sys = LinearSystem::new(array![[3.0, 0.0], [4.0, 1.0]], array![1.0, 1.0]).unwrap();
        let norm = sys.normalize_columns().unwrap();
        assert_abs_diff_eq!(norm.matrix()[(0, 0)], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(norm.matrix()[(1, 0)], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(norm.col_scalings()[0], 5.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_row_and_column_rejected() {
        let err = LinearSystem::new(array![[0.0, 0.0], [1.0, 1.0]], array![1.0, 1.0]);
        assert!(matches!(err, Err(Error::ZeroRow(0))));
        let err = LinearSystem::new(array![[1.0, 0.0], [2.0, 0.0]], array![1.0, 1.0]);
        assert!(matches!(err, Err(Error::ZeroColumn(1))));
    }

    #[test]
    fn empty_dimensions_rejected() {
        let err = LinearSystem::new(Array2::zeros((0, 0)), Array1::zeros(0));
        assert!(matches!(err, Err(Error::Config(_))));
        let err = LinearSystem::new(Array2::zeros((2, 0)), Array1::zeros(2));
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn pad_to_pow2_examples() {
        let spec = ProblemSpec::new(ProblemKind::RandomConsistent, 8, 3);
        let sys = generate(&spec).unwrap();
        assert_eq!(sys.n_padded(), 8);
        let padded = sys.pad_to_pow2();
        assert_eq!(padded.matrix().nrows(), 8);
        assert_eq!(max_abs_diff(padded.matrix(), sys.matrix()), 0.0);

        let sys3 = LinearSystem::new(Array2::eye(3), array![1.0, 1.0, 1.0]).unwrap();
        let padded = sys3.pad_to_pow2();
        assert_eq!(padded.n_padded(), 4);
        assert_eq!(padded.matrix().nrows(), 4);
        assert_eq!(padded.matrix()[(3, 3)], 0.0);
        assert_eq!(padded.rhs()[3], 0.0);
        assert_eq!(padded.rows(), 3);

        let spec5 = ProblemSpec::new(ProblemKind::RandomConsistent, 5, 11);
        let sys5 = generate(&spec5).unwrap().normalize_rows().unwrap();
        let padded = sys5.pad_to_pow2();
        assert_eq!(padded.n_padded(), 8);
        for i in 0..5 {
            assert_abs_diff_eq!(norm2(padded.row(i)), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn generate_is_deterministic() {
        let spec = ProblemSpec::new(ProblemKind::RandomConsistent, 8, 7);
        let s1 = generate(&spec).unwrap();
        let s2 = generate(&spec).unwrap();
        assert_eq!(s1.matrix(), s2.matrix());
        assert_eq!(s1.rhs(), s2.rhs());
    }

    #[test]
    fn generate_identity() {
        let spec = ProblemSpec::new(ProblemKind::Identity, 2, 42);
        let sys = generate(&spec).unwrap();
        assert_eq!(sys.matrix(), &Array2::<f64>::eye(2));
    }

    #[test]
    fn generate_consistent_has_tiny_residual() {
        let spec = ProblemSpec::new(ProblemKind::RandomConsistent, 8, 7);
        let sys = generate(&spec).unwrap();
        let x = sys.planted_solution().unwrap().clone();
        assert!(sys.residual_norm(&x) <= 1e-13);
    }

    #[test]
    fn generate_orthogonal_rows() {
        let spec = ProblemSpec::new(ProblemKind::RandomOrthogonalRows, 6, 1);
        let sys = generate(&spec).unwrap();
        let q = sys.matrix();
        let qtq = q.dot(&q.t());
        assert!(max_abs_diff(&qtq, &Array2::eye(6)) < 1e-12);
        let x = sys.planted_solution().unwrap().clone();
        assert!(sys.residual_norm(&x) <= 1e-13);
    }

    #[test]
    fn unnormalize_round_trips() {
        let spec = ProblemSpec::new(ProblemKind::RandomConsistent, 8, 5);
        let raw = generate(&spec).unwrap();
        let back = raw.normalize_rows().unwrap().unnormalized();
        assert!(max_abs_diff(back.matrix(), raw.matrix()) < 1e-12);
        for i in 0..8 {
            assert_abs_diff_eq!(back.rhs()[i], raw.rhs()[i], epsilon = 1e-12);
        }
        let back = raw.normalize_columns().unwrap().unnormalized();
        assert!(max_abs_diff(back.matrix(), raw.matrix()) < 1e-12);
    }

    #[test]
    fn planted_solution_survives_row_normalization() {
        let spec = ProblemSpec::new(ProblemKind::RandomConsistent, 8, 9);
        let sys = generate(&spec).unwrap().normalize_rows().unwrap();
        let x = sys.planted_solution().unwrap().clone();
        assert!(sys.residual_norm(&x) <= 1e-12);
    }

    #[test]
    fn planted_solution_tracks_column_scaling() {
        let spec = ProblemSpec::new(ProblemKind::RandomConsistent, 8, 9);
        let sys = generate(&spec).unwrap().normalize_columns().unwrap();
        let y = sys.planted_solution().unwrap().clone();
        assert!(sys.residual_norm(&y) <= 1e-12);
        // Mapping back through the recorded norms solves the raw system.
        let raw = sys.unnormalized();
        let x = raw.planted_solution().unwrap().clone();
        assert!(raw.residual_norm(&x) <= 1e-12);
    }

    #[test]
    fn padding_preserves_solution_on_original_coordinates() {
        let spec = ProblemSpec::new(ProblemKind::RandomConsistent, 5, 2);
        let sys = generate(&spec).unwrap();
        let padded = sys.pad_to_pow2();
        let x = padded.planted_solution().unwrap().clone();
        assert!(padded.residual_norm(&x) <= 1e-12);
        for j in 5..8 {
            assert_eq!(x[j], 0.0);
        }
    }

    #[test]
    fn generate_rejects_tiny_dimension() {
        let spec = ProblemSpec::new(ProblemKind::Identity, 1, 0);
        assert!(generate(&spec).is_err());
    }
}
