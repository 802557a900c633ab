//! Linear-combination-of-unitaries route to the residual projection,
//! as a prepare → select → unprepare circuit on one flag ancilla.
//!
//! With `U₀ = I`, `U₁ = I − 2|a⟩⟨a|` and weights `α₀ = α₁ = 1/2`, the
//! flagged zero block of the output is `(I − |a⟩⟨a|)|ψ⟩` — the same
//! projection the direct controlled-flip route produces, giving a second,
//! independently structured implementation to check it against.

use ndarray::{Array1, ArrayView1};

use crate::error::{Error, Result};
use crate::problem::norm2;
use crate::simstate::SimState;

/// A unitary term of the combination.
#[derive(Debug, Clone)]
pub enum LcuUnitary {
    Identity,
    /// `I − 2 v vᵀ` for a unit vector `v`.
    Reflection(Array1<f64>),
}

impl LcuUnitary {
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Identity => None,
            Self::Reflection(v) => Some(v.len()),
        }
    }

    pub fn apply_slice(&self, x: &mut [f64]) {
        if let Self::Reflection(v) = self {
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
}

/// Weighted combination `Σ α_j U_j` plus its prepare rotation.
#[derive(Debug, Clone)]
pub struct LcuPlan {
    unitaries: Vec<LcuUnitary>,
    weights: Vec<f64>,
    total: f64,
}

impl LcuPlan {
    pub fn new(unitaries: Vec<LcuUnitary>, weights: Vec<f64>) -> Result<Self> {
        if unitaries.len() != weights.len() || unitaries.is_empty() {
            return Err(Error::Config(
                "combination needs one positive weight per unitary".into(),
            ));
        }
        if weights.iter().any(|w| *w <= 0.0) {
            return Err(Error::Config("combination weights must be positive".into()));
        }
        let total = weights.iter().sum();
        Ok(Self {
            unitaries,
            weights,
            total,
        })
    }

    /// The projection plan of the residual update: `U₀ = I`,
    /// `U₁ = I − 2|a⟩⟨a|`, `α₀ = α₁ = 1/2`.
    pub fn projection(a: ArrayView1<'_, f64>) -> Result<Self> {
        let norm = norm2(a);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnitNorm {
                what: "reflection axis",
                norm,
            });
        }
        Self::new(
            vec![LcuUnitary::Identity, LcuUnitary::Reflection(a.to_owned())],
            vec![0.5, 0.5],
        )
    }

    pub fn total_weight(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.unitaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unitaries.is_empty()
    }

    /// Prepare rotation: column 0 is `(√(α₀/s), √(α₁/s))`.
    fn prepare_matrix(&self) -> [[f64; 2]; 2] {
        let c = (self.weights[0] / self.total).sqrt();
        let s = (self.weights[1] / self.total).sqrt();
        [[c, -s], [s, c]]
    }
}

/// Runs the prepare–select–unprepare circuit on `|0⟩|ψ⟩`.
///
/// The returned state's zero block is `(Σ_j α_j U_j |ψ⟩)/s`; the flag-1
/// block is garbage that keeps the whole map orthogonal. Only the
/// two-term case is wired up; larger plans are rejected.
pub fn lcu_apply(plan: &LcuPlan, psi: &[f64]) -> Result<SimState> {
    if plan.len() != 2 {
        return Err(Error::Unsupported(format!(
            "only two-term combinations are implemented, got {}",
            plan.len()
        )));
    }
    if let Some(dim) = plan.unitaries.iter().find_map(|u| u.dim()) {
        if dim != psi.len() {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: psi.len(),
            });
        }
    }
    let mut state = SimState::from_system_vector(psi)?.prepend_zero_ancillas(1);
    let prepare = plan.prepare_matrix();
    let unprepare = [
        [prepare[0][0], prepare[1][0]],
        [prepare[0][1], prepare[1][1]],
    ];
    state.apply_ancilla_rotation(1, prepare)?;
    // Select: U_j on the system block flagged j.
    state.for_each_system_block_mut(Some("0"), |block| plan.unitaries[0].apply_slice(block))?;
    state.for_each_system_block_mut(Some("1"), |block| plan.unitaries[1].apply_slice(block))?;
    state.apply_ancilla_rotation(1, unprepare)?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    fn random_unit(dim: usize, seed: u64) -> Array1<f64> {
        let mut rng: ChaCha8Rng = rand::SeedableRng::seed_from_u64(seed);
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        Array1::from_vec(v)
    }

    fn projected(a: &Array1<f64>, psi: &Array1<f64>) -> Array1<f64> {
        psi - &(a * a.dot(psi))
    }

    #[test]
    fn plan_validates_weights() {
        assert!(LcuPlan::new(vec![LcuUnitary::Identity], vec![]).is_err());
        assert!(LcuPlan::new(vec![LcuUnitary::Identity], vec![-1.0]).is_err());
        let plan = LcuPlan::projection(array![1.0, 0.0].view()).unwrap();
        assert_abs_diff_eq!(plan.total_weight(), 1.0, epsilon = 1e-15);
        assert!(LcuPlan::projection(array![1.0, 1.0].view()).is_err());
    }

    #[test]
    fn input_along_axis_is_annihilated() {
        let a = random_unit(8, 1);
        let plan = LcuPlan::projection(a.view()).unwrap();
        let out = lcu_apply(&plan, a.as_slice().unwrap()).unwrap();
        let (block, norm) = out.zero_block();
        assert!(norm <= 1e-14);
        assert!(block.iter().all(|x| x.abs() <= 1e-14));
    }

    #[test]
    fn orthogonal_input_passes_with_empty_garbage() {
        let a = array![1.0, 0.0, 0.0, 0.0];
        let psi = array![0.0, 0.6, 0.0, 0.8];
        let plan = LcuPlan::projection(a.view()).unwrap();
        let out = lcu_apply(&plan, psi.as_slice().unwrap()).unwrap();
        let (block, _) = out.zero_block();
        for (got, want) in block.iter().zip(psi.iter()) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-14);
        }
        let (_, garbage_norm) = out.extract_block("1").unwrap();
        assert!(garbage_norm <= 1e-14);
    }

    #[test]
    fn zero_block_equals_direct_projection() {
        for seed in 0..50 {
            let a = random_unit(8, seed);
            let psi = random_unit(8, 1000 + seed);
            let plan = LcuPlan::projection(a.view()).unwrap();
            let out = lcu_apply(&plan, psi.as_slice().unwrap()).unwrap();
            let (block, _) = out.zero_block();
            let want = projected(&a, &psi);
            for (got, want) in block.iter().zip(want.iter()) {
                assert_abs_diff_eq!(got, want, epsilon = 1e-12);
            }
            assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_block_matches_controlled_flip_branch() {
        // The direct route: controlled flip on |0⟩|ψ⟩ leaves the projection
        // in its zero branch too.
        for seed in 0..20 {
            let a = random_unit(8, 77 + seed);
            let psi = random_unit(8, 177 + seed);
            let plan = LcuPlan::projection(a.view()).unwrap();
            let via_lcu = lcu_apply(&plan, psi.as_slice().unwrap()).unwrap();

            let mut direct = SimState::from_system_vector(psi.as_slice().unwrap())
                .unwrap()
                .prepend_zero_ancillas(1);
            direct.apply_ut(a.as_slice().unwrap(), 1).unwrap();

            let (lcu_block, _) = via_lcu.zero_block();
            let (flip_block, _) = direct.zero_block();
            for (x, y) in lcu_block.iter().zip(flip_block.iter()) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn larger_plans_are_rejected() {
        let plan = LcuPlan::new(
            vec![
                LcuUnitary::Identity,
                LcuUnitary::Identity,
                LcuUnitary::Identity,
            ],
            vec![1.0, 1.0, 1.0],
        )
        .unwrap();
        assert!(matches!(
            lcu_apply(&plan, &[1.0, 0.0]),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let a = random_unit(4, 5);
        let plan = LcuPlan::projection(a.view()).unwrap();
        let psi = random_unit(8, 6);
        assert!(matches!(
            lcu_apply(&plan, psi.as_slice().unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
