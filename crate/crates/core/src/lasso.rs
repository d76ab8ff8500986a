//! Dynamic LASSO: `minimize ½‖F x − h‖² + γ‖x‖₁`, split as `A = I`, `B = −I`,
//! `c = 0`, `f = ½‖F·−h‖²`, `g = γ‖·‖₁`.
//!
//! `F` may have fewer rows than columns. `FᵀF` is then singular, but the
//! x-update matrix `FᵀF + ρI` stays positive definite for any `ρ > 0`.

use crate::error::{check_dim, structural, Result};
use crate::numerics::{Matrix, SpdFactor, Vector};
use crate::problem::{check_rho, FunctionSpec, ProblemInstance};
use crate::solver::{soft_threshold, AdmmState};

#[derive(Debug, Clone, PartialEq)]
pub struct LassoProblem {
    design: Matrix,
    target: Vector,
    gamma: f64,
}

impl LassoProblem {
    pub fn new(design: Matrix, target: Vector, gamma: f64) -> Result<Self> {
        check_dim("LASSO target", design.nrows(), target.len())?;
        if design.ncols() == 0 {
            return Err(structural("LASSO design has no columns"));
        }
        FunctionSpec::scaled_l1(gamma)?;
        Ok(Self { design, target, gamma })
    }

    pub fn design(&self) -> &Matrix {
        &self.design
    }

    pub fn target(&self) -> &Vector {
        &self.target
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn p(&self) -> usize {
        self.design.ncols()
    }

    pub fn objective(&self, x: &Vector) -> Result<f64> {
        check_dim("LASSO x", self.p(), x.len())?;
        Ok(0.5 * (&self.design * x - &self.target).norm_squared() + self.gamma * x.lp_norm(1))
    }

    pub fn assemble(&self, k: usize) -> Result<ProblemInstance> {
        let p = self.p();
        ProblemInstance::new(
            k,
            FunctionSpec::least_squares(self.design.clone(), self.target.clone())?,
            FunctionSpec::scaled_l1(self.gamma)?,
            Matrix::identity(p, p),
            -Matrix::identity(p, p),
            Vector::zeros(p),
        )
    }

    fn check_state(&self, state: &AdmmState) -> Result<()> {
        let p = self.p();
        check_dim("state x", p, state.x.len())?;
        check_dim("state z", p, state.z.len())?;
        check_dim("state λ", p, state.lambda.len())
    }

    /// Solves `(FᵀF + ρI) x = Fᵀh + ρz − λ`.
    pub fn x_update(&self, state: &AdmmState, rho: f64) -> Result<Vector> {
        check_rho(rho)?;
        self.check_state(state)?;
        let ft = self.design.transpose();
        let system = &ft * &self.design + Matrix::identity(self.p(), self.p()) * rho;
        let rhs = ft * &self.target + &state.z * rho - &state.lambda;
        SpdFactor::new(&system)?.solve(&rhs)
    }

    /// `S_{γ/ρ}(x_new + λ/ρ)`.
    pub fn z_update(&self, state: &AdmmState, rho: f64, x_new: &Vector) -> Result<Vector> {
        check_rho(rho)?;
        self.check_state(state)?;
        check_dim("x_new", self.p(), x_new.len())?;
        soft_threshold(&(x_new + &state.lambda / rho), self.gamma / rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{x_update, z_update};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rvec(n: usize, rng: &mut ChaCha8Rng) -> Vector {
        Vector::from_fn(n, |_, _| rng.random_range(-1.0..=1.0))
    }

    #[test]
    fn assemble_scalar_shapes_and_feasibility() {
        let lp = LassoProblem::new(Matrix::from_element(1, 1, 2.0), Vector::from_element(1, 1.0), 0.1).unwrap();
        let inst = lp.assemble(3).unwrap();
        assert_eq!(inst.a, Matrix::identity(1, 1));
        assert_eq!(inst.b, -Matrix::identity(1, 1));
        let x = Vector::from_element(1, 0.4);
        assert_eq!(inst.primal_residual(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn assembled_objective_matches_direct_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let f = Matrix::from_fn(6, 4, |_, _| rng.random_range(-1.0..=1.0));
        let h = rvec(6, &mut rng);
        let lp = LassoProblem::new(f.clone(), h.clone(), 0.3).unwrap();
        let inst = lp.assemble(1).unwrap();
        for _ in 0..10 {
            let x = rvec(4, &mut rng) * 2.0;
            let mut direct = 0.0;
            for i in 0..6 {
                let r: f64 = (0..4).map(|j| f[(i, j)] * x[j]).sum::<f64>() - h[i];
                direct += 0.5 * r * r;
            }
            direct += 0.3 * x.iter().map(|v| v.abs()).sum::<f64>();
            assert!((inst.objective(&x, &x).unwrap() - direct).abs() < 1e-12);
            assert!((lp.objective(&x).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn x_update_examples() {
        let lp = LassoProblem::new(Matrix::identity(3, 3), Vector::zeros(3), 0.2).unwrap();
        assert_eq!(lp.x_update(&AdmmState::zeros(3, 3), 1.0).unwrap(), Vector::zeros(3));
        let lp = LassoProblem::new(Matrix::from_element(1, 1, 1.0), Vector::from_element(1, 2.0), 0.2).unwrap();
        assert!((lp.x_update(&AdmmState::zeros(1, 1), 1.0).unwrap()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn specialized_updates_match_generic_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let lp = LassoProblem::new(
                Matrix::from_fn(6, 4, |_, _| rng.random_range(-1.0..=1.0)),
                rvec(6, &mut rng),
                0.25,
            )
            .unwrap();
            let inst = lp.assemble(1).unwrap();
            let st = AdmmState { x: rvec(4, &mut rng), z: rvec(4, &mut rng), lambda: rvec(4, &mut rng), k: 0 };
            let rho = rng.random_range(0.1..3.0);
            let x = lp.x_update(&st, rho).unwrap();
            assert!((&x - x_update(&st, &inst, rho).unwrap()).amax() < 1e-9);
            assert_eq!(lp.z_update(&st, rho, &x).unwrap(), z_update(&st, &inst, rho, &x).unwrap());
        }
    }

    #[test]
    fn wide_design_is_fine() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let lp = LassoProblem::new(
            Matrix::from_fn(10, 30, |_, _| rng.random_range(-1.0..=1.0)),
            rvec(10, &mut rng),
            0.2,
        )
        .unwrap();
        let x = lp.x_update(&AdmmState::zeros(30, 30), 1.0).unwrap();
        assert!(x.iter().all(|v| v.is_finite()));
    }
}
