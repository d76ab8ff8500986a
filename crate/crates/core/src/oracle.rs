//! Offline per-step optima used as the tracking benchmark.
//!
//! Two routes: an exact solve of the linear KKT system when both terms are
//! smooth quadratics, and static ADMM (fixed instance, cached factorizations)
//! iterated until the KKT residual drops below tolerance otherwise.

use crate::error::{structural, Error, Result};
use crate::numerics::{inf_norm, solve_general, Matrix, Vector};
use crate::problem::{FunctionSpec, ProblemInstance};
use crate::solver::{l1_subgradient_violation, AdmmState, SolverConfig, StaticAdmm};

/// Residual accepted from the exact KKT solve.
pub const EXACT_KKT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    ExactKkt,
    StaticAdmm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// KKT residual target for static ADMM.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub method: OracleMethod,
    /// Penalty used by the static ADMM route, independent of any tracker's ρ.
    pub rho: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100_000,
            method: OracleMethod::StaticAdmm,
            rho: 1.0,
        }
    }
}

impl OracleConfig {
    pub fn exact() -> Self {
        Self { method: OracleMethod::ExactKkt, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalTriple {
    pub x_star: Vector,
    pub z_star: Vector,
    pub lambda_star: Vector,
    pub kkt_residual: f64,
    /// ADMM passes spent (zero for the exact route).
    pub iterations: usize,
}

impl OptimalTriple {
    pub fn as_state(&self, k: usize) -> AdmmState {
        AdmmState {
            x: self.x_star.clone(),
            z: self.z_star.clone(),
            lambda: self.lambda_star.clone(),
            k,
        }
    }
}

/// Largest violation among: x-stationarity `‖∇f(x) + Aᵀλ‖_∞`, feasibility
/// `‖Ax + Bz − c‖_∞`, and z-optimality. For smooth `g` the last term is
/// `‖∇g(z) + Bᵀλ‖_∞`; for `g = γ‖·‖₁` it is the largest violation of
/// `−Bᵀλ ∈ γ∂‖z‖₁` (with `B = −I` this reads `λ ∈ γ∂‖z‖₁`).
pub fn kkt_residual(inst: &ProblemInstance, x: &Vector, z: &Vector, lambda: &Vector) -> Result<f64> {
    inst.check_dual(lambda)?;
    let feas = inf_norm(&inst.residual_vector(x, z)?);
    let fx = match &inst.f {
        FunctionSpec::ScaledL1 { .. } => {
            return Err(Error::Unsupported("KKT residual with an L1 term in f".into()))
        }
        smooth => inf_norm(&(smooth.gradient(x)? + inst.a.transpose() * lambda)),
    };
    let gz = match &inst.g {
        FunctionSpec::ScaledL1 { weight } => {
            let w = -(inst.b.transpose() * lambda);
            l1_subgradient_violation(z, &w, *weight)
        }
        smooth => inf_norm(&(smooth.gradient(z)? + inst.b.transpose() * lambda)),
    };
    Ok(fx.max(feas).max(gz))
}

/// Solves `[H_f 0 Aᵀ; 0 H_g Bᵀ; A B 0] (x, z, λ) = (r_f, r_g, c)` where
/// `∇f(x) = H_f x − r_f` and `∇g(z) = H_g z − r_g`.
pub fn solve_exact_kkt(inst: &ProblemInstance) -> Result<OptimalTriple> {
    if !(inst.f.is_smooth() && inst.g.is_smooth()) {
        return Err(Error::Unsupported("exact KKT solve needs smooth f and g".into()));
    }
    let (hf, rf) = inst.f.affine_gradient()?;
    let (hg, rg) = inst.g.affine_gradient()?;
    let (n, m) = (inst.x_dim(), inst.z_dim());
    let dim = n + 2 * m;
    let mut kkt = Matrix::zeros(dim, dim);
    kkt.view_mut((0, 0), (n, n)).copy_from(&hf);
    kkt.view_mut((n, n), (m, m)).copy_from(&hg);
    kkt.view_mut((0, n + m), (n, m)).copy_from(&inst.a.transpose());
    kkt.view_mut((n, n + m), (m, m)).copy_from(&inst.b.transpose());
    kkt.view_mut((n + m, 0), (m, n)).copy_from(&inst.a);
    kkt.view_mut((n + m, n), (m, m)).copy_from(&inst.b);
    let mut rhs = Vector::zeros(dim);
    rhs.rows_mut(0, n).copy_from(&rf);
    rhs.rows_mut(n, m).copy_from(&rg);
    rhs.rows_mut(n + m, m).copy_from(&inst.c);

    let sol = solve_general(&kkt, &rhs).map_err(|e| match e {
        Error::Numerical(msg) => Error::Numerical(format!("KKT system: {msg}")),
        other => other,
    })?;
    let x_star = sol.rows(0, n).clone_owned();
    let z_star = sol.rows(n, m).clone_owned();
    let lambda_star = sol.rows(n + m, m).clone_owned();
    let kkt_residual = kkt_residual(inst, &x_star, &z_star, &lambda_star)?;
    if kkt_residual > EXACT_KKT_TOL {
        return Err(Error::Numerical(format!(
            "KKT solve left residual {kkt_residual:e}"
        )));
    }
    Ok(OptimalTriple { x_star, z_star, lambda_star, kkt_residual, iterations: 0 })
}

/// Static ADMM from the all-zero point.
pub fn solve_static_admm(inst: &ProblemInstance, cfg: &OracleConfig) -> Result<OptimalTriple> {
    solve_static_admm_from(inst, cfg, &AdmmState::zeros_for(inst))
}

/// Static ADMM from a given starting point, e.g. the previous step's optimum.
pub fn solve_static_admm_from(inst: &ProblemInstance, cfg: &OracleConfig, start: &AdmmState) -> Result<OptimalTriple> {
    if !(cfg.tolerance > 0.0) {
        return Err(Error::Domain(format!("oracle tolerance must be positive, got {}", cfg.tolerance)));
    }
    if start.x.len() != inst.x_dim() || start.z.len() != inst.z_dim() || start.lambda.len() != inst.z_dim() {
        return Err(structural("oracle start point does not match the instance"));
    }
    let admm = StaticAdmm::new(inst, &SolverConfig::static_mode(cfg.rho))?;
    let mut state = AdmmState { k: 0, ..start.clone() };
    let mut residual = f64::INFINITY;
    for it in 1..=cfg.max_iterations {
        state = admm.step(&state)?;
        residual = kkt_residual(inst, &state.x, &state.z, &state.lambda)?;
        if residual <= cfg.tolerance {
            return Ok(OptimalTriple {
                x_star: state.x,
                z_star: state.z,
                lambda_star: state.lambda,
                kkt_residual: residual,
                iterations: it,
            });
        }
    }
    Err(Error::Convergence { iterations: cfg.max_iterations, residual })
}

/// Dispatches on `cfg.method`.
pub fn solve(inst: &ProblemInstance, cfg: &OracleConfig) -> Result<OptimalTriple> {
    match cfg.method {
        OracleMethod::ExactKkt => solve_exact_kkt(inst),
        OracleMethod::StaticAdmm => solve_static_admm(inst, cfg),
    }
}
