//! One time-slice of the dynamic problem
//!
//! ```text
//! minimize  f_k(x) + g_k(z)   subject to  A x + B z = c
//! ```
//!
//! The cost terms come from a closed set of three families so that every ADMM
//! subproblem has an exact solution:
//!
//! * [`FunctionSpec::Quadratic`]: `h(v) = (v − θ)ᵀ Φ (v − θ)`. There is **no**
//!   ½ factor, so the gradient is `2Φ(v − θ)` and the Hessian is `2Φ`.
//! * [`FunctionSpec::LeastSquares`]: `h(v) = ½ ‖F v − h‖²`. This one **does**
//!   carry the ½ factor, so the gradient is `Fᵀ(F v − h)`.
//! * [`FunctionSpec::ScaledL1`]: `h(v) = γ ‖v‖₁`, nonsmooth.

use crate::error::{check_dim, structural, Error, Result};
use crate::numerics::{min_eigenvalue_symmetric, symmetrize, Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSpec {
    /// `(v − center)ᵀ phi (v − center)` with `phi` symmetric positive definite.
    Quadratic { phi: Matrix, center: Vector },
    /// `½ ‖design · v − target‖²`.
    LeastSquares { design: Matrix, target: Vector },
    /// `weight · ‖v‖₁` with `weight > 0`.
    ScaledL1 { weight: f64 },
}

impl FunctionSpec {
    /// Validated quadratic term; `phi` is symmetrized and must be positive definite.
    pub fn quadratic(phi: Matrix, center: Vector) -> Result<Self> {
        let phi = symmetrize(&phi)?;
        check_dim("quadratic center", phi.nrows(), center.len())?;
        let lam = min_eigenvalue_symmetric(&phi)?;
        if lam <= 0.0 {
            return Err(structural(format!(
                "quadratic weight must be positive definite (smallest eigenvalue {lam:e})"
            )));
        }
        Ok(Self::Quadratic { phi, center })
    }

    pub fn least_squares(design: Matrix, target: Vector) -> Result<Self> {
        check_dim("least-squares target", design.nrows(), target.len())?;
        if design.ncols() == 0 {
            return Err(structural("least-squares design has no columns"));
        }
        Ok(Self::LeastSquares { design, target })
    }

    pub fn scaled_l1(weight: f64) -> Result<Self> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::Domain(format!("L1 weight must be positive, got {weight}")));
        }
        Ok(Self::ScaledL1 { weight })
    }

    /// Domain dimension, `None` for the dimension-free L1 term.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Quadratic { phi, .. } => Some(phi.nrows()),
            Self::LeastSquares { design, .. } => Some(design.ncols()),
            Self::ScaledL1 { .. } => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        !matches!(self, Self::ScaledL1 { .. })
    }

    fn check_arg(&self, v: &Vector) -> Result<()> {
        match self.dim() {
            Some(n) => check_dim("function argument", n, v.len()),
            None => Ok(()),
        }
    }

    pub fn evaluate(&self, v: &Vector) -> Result<f64> {
        self.check_arg(v)?;
        Ok(match self {
            Self::Quadratic { phi, center } => {
                let d = v - center;
                d.dot(&(phi * &d))
            }
            Self::LeastSquares { design, target } => 0.5 * (design * v - target).norm_squared(),
            Self::ScaledL1 { weight } => weight * v.lp_norm(1),
        })
    }

    pub fn gradient(&self, v: &Vector) -> Result<Vector> {
        self.check_arg(v)?;
        match self {
            Self::Quadratic { phi, center } => Ok(phi * (v - center) * 2.0),
            Self::LeastSquares { design, target } => Ok(design.transpose() * (design * v - target)),
            Self::ScaledL1 { .. } => Err(Error::Unsupported(
                "gradient of the nonsmooth L1 term".into(),
            )),
        }
    }

    /// For smooth terms, `(H, r)` with `∇h(v) = H v − r` (both terms are quadratic).
    pub fn affine_gradient(&self) -> Result<(Matrix, Vector)> {
        match self {
            Self::Quadratic { phi, center } => Ok((phi * 2.0, phi * center * 2.0)),
            Self::LeastSquares { design, target } => {
                let ft = design.transpose();
                Ok((&ft * design, ft * target))
            }
            Self::ScaledL1 { .. } => Err(Error::Unsupported(
                "the L1 term has no affine gradient".into(),
            )),
        }
    }
}

/// One time-slice `(f_k, g_k, A, B, c)` with `A ∈ R^{M×N}`, `B ∈ R^{M×M}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub k: usize,
    pub f: FunctionSpec,
    pub g: FunctionSpec,
    pub a: Matrix,
    pub b: Matrix,
    pub c: Vector,
}

impl ProblemInstance {
    pub fn new(k: usize, f: FunctionSpec, g: FunctionSpec, a: Matrix, b: Matrix, c: Vector) -> Result<Self> {
        let m = a.nrows();
        if b.nrows() != b.ncols() {
            return Err(structural(format!("B must be square, got {}x{}", b.nrows(), b.ncols())));
        }
        check_dim("rows of B", m, b.nrows())?;
        check_dim("length of c", m, c.len())?;
        if let Some(n) = f.dim() {
            check_dim("domain of f (columns of A)", a.ncols(), n)?;
        }
        if let Some(n) = g.dim() {
            check_dim("domain of g (columns of B)", m, n)?;
        }
        Ok(Self { k, f, g, a, b, c })
    }

    /// `N`, the dimension of `x`.
    pub fn x_dim(&self) -> usize {
        self.a.ncols()
    }

    /// `M`, the dimension of `z`, `λ` and `c`.
    pub fn z_dim(&self) -> usize {
        self.b.nrows()
    }

    /// Same variable dimensions as `other`.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.x_dim() == other.x_dim() && self.z_dim() == other.z_dim()
    }

    pub(crate) fn check_point(&self, x: &Vector, z: &Vector) -> Result<()> {
        check_dim("x", self.x_dim(), x.len())?;
        check_dim("z", self.z_dim(), z.len())
    }

    pub(crate) fn check_dual(&self, lambda: &Vector) -> Result<()> {
        check_dim("λ", self.z_dim(), lambda.len())
    }

    /// `A x + B z − c`.
    pub fn residual_vector(&self, x: &Vector, z: &Vector) -> Result<Vector> {
        self.check_point(x, z)?;
        Ok(&self.a * x + &self.b * z - &self.c)
    }

    /// `‖A x + B z − c‖₂`.
    pub fn primal_residual(&self, x: &Vector, z: &Vector) -> Result<f64> {
        Ok(self.residual_vector(x, z)?.norm())
    }

    pub fn objective(&self, x: &Vector, z: &Vector) -> Result<f64> {
        self.check_point(x, z)?;
        Ok(self.f.evaluate(x)? + self.g.evaluate(z)?)
    }

    /// `f(x) + g(z) + λᵀ(Ax + Bz − c) + (ρ/2)‖Ax + Bz − c‖²`.
    pub fn augmented_lagrangian(&self, x: &Vector, z: &Vector, lambda: &Vector, rho: f64) -> Result<f64> {
        check_rho(rho)?;
        self.check_dual(lambda)?;
        let r = self.residual_vector(x, z)?;
        Ok(self.f.evaluate(x)? + self.g.evaluate(z)? + lambda.dot(&r) + 0.5 * rho * r.norm_squared())
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("penalty ρ must be positive, got {rho}")))
    }
}
