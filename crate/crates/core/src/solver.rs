//! Dynamic ADMM: one exact x-update, z-update and dual update per time slice.
//!
//! Starting from `x₀ = z₀ = λ₀ = 0`, each incoming instance `k` performs
//!
//! ```text
//! x_k = argmin_x f_k(x) + λ_{k−1}ᵀ A x + (ρ/2)‖A x + B z_{k−1} − c‖²
//! z_k = argmin_z g_k(z) + λ_{k−1}ᵀ B z + (ρ/2)‖B z + A x_k − c‖²
//! λ_k = λ_{k−1} + ρ (A x_k + B z_k − c)
//! ```
//!
//! Every subproblem is solved in closed form. For smooth terms that is a
//! symmetric positive-definite linear system; for `g = γ‖·‖₁` with `B = −I`
//! it is a soft-threshold.

use crate::error::{check_dim, structural, Error, Result};
use crate::numerics::{inf_norm, Matrix, SpdFactor, Vector};
use crate::problem::{check_rho, FunctionSpec, ProblemInstance};

/// Entries with magnitude at or below this count as zero in subgradient tests.
pub const ZERO_TOL: f64 = 1e-9;

/// Iterate triple plus the time index it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub x: Vector,
    pub z: Vector,
    pub lambda: Vector,
    pub k: usize,
}

impl AdmmState {
    pub fn zeros(x_dim: usize, z_dim: usize) -> Self {
        Self {
            x: Vector::zeros(x_dim),
            z: Vector::zeros(z_dim),
            lambda: Vector::zeros(z_dim),
            k: 0,
        }
    }

    pub fn zeros_for(inst: &ProblemInstance) -> Self {
        Self::zeros(inst.x_dim(), inst.z_dim())
    }

    fn check(&self, inst: &ProblemInstance) -> Result<()> {
        check_dim("state x", inst.x_dim(), self.x.len())?;
        check_dim("state z", inst.z_dim(), self.z.len())?;
        check_dim("state λ", inst.z_dim(), self.lambda.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One ADMM pass per instance of a time-varying stream.
    Dynamic,
    /// Repeated passes over one fixed instance, reusing factorizations.
    Static,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rho: f64,
    pub mode: Mode,
}

impl SolverConfig {
    pub fn dynamic(rho: f64) -> Self {
        Self { rho, mode: Mode::Dynamic }
    }

    pub fn static_mode(rho: f64) -> Self {
        Self { rho, mode: Mode::Static }
    }
}

/// Entrywise `S_κ(a)`: `a − κ` above `κ`, `a + κ` below `−κ`, zero in between.
pub fn soft_threshold(a: &Vector, kappa: f64) -> Result<Vector> {
    if !(kappa > 0.0) {
        return Err(Error::Domain(format!("soft-threshold level must be positive, got {kappa}")));
    }
    Ok(a.map(|v| shrink(v, kappa)))
}

#[inline]
fn shrink(v: f64, kappa: f64) -> f64 {
    if v > kappa {
        v - kappa
    } else if v < -kappa {
        v + kappa
    } else {
        0.0
    }
}

fn is_negative_identity(b: &Matrix) -> bool {
    b.nrows() == b.ncols()
        && b.iter()
            .enumerate()
            .all(|(idx, &v)| if idx % b.nrows() == idx / b.nrows() { v == -1.0 } else { v == 0.0 })
}

/// Factorized x-subproblem for one instance and one ρ.
#[derive(Debug, Clone)]
pub struct XUpdate {
    factor: SpdFactor,
    linear: Vector,
    a_t: Matrix,
    rho: f64,
}

impl XUpdate {
    pub fn new(inst: &ProblemInstance, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        let (hess, linear) = match &inst.f {
            FunctionSpec::ScaledL1 { .. } => {
                return Err(Error::Unsupported("x-update with an L1 term in f".into()))
            }
            smooth => smooth.affine_gradient()?,
        };
        let a_t = inst.a.transpose();
        let system = hess + &a_t * &inst.a * rho;
        let factor = SpdFactor::new(&system).map_err(|e| match e {
            Error::Numerical(msg) => Error::Numerical(format!("x-update normal matrix: {msg}")),
            other => other,
        })?;
        Ok(Self { factor, linear, a_t, rho })
    }

    /// Solves `(H + ρAᵀA) x = r − Aᵀλ + ρAᵀ(c − Bz)`.
    pub fn solve(&self, inst: &ProblemInstance, z: &Vector, lambda: &Vector) -> Result<Vector> {
        let shifted = &inst.c - &inst.b * z;
        let rhs = &self.linear + &self.a_t * (shifted * self.rho - lambda);
        self.factor.solve(&rhs)
    }
}

#[derive(Debug, Clone)]
enum ZKind {
    Smooth { factor: SpdFactor, linear: Vector, b_t: Matrix },
    SoftThreshold { kappa: f64 },
}

/// Prepared z-subproblem for one instance and one ρ.
#[derive(Debug, Clone)]
pub struct ZUpdate {
    kind: ZKind,
    rho: f64,
}

impl ZUpdate {
    pub fn new(inst: &ProblemInstance, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        let kind = match &inst.g {
            FunctionSpec::ScaledL1 { weight } => {
                if !is_negative_identity(&inst.b) {
                    return Err(Error::Unsupported(
                        "closed-form L1 z-update needs B = −I".into(),
                    ));
                }
                ZKind::SoftThreshold { kappa: weight / rho }
            }
            smooth => {
                let (hess, linear) = smooth.affine_gradient()?;
                let b_t = inst.b.transpose();
                let system = hess + &b_t * &inst.b * rho;
                let factor = SpdFactor::new(&system).map_err(|e| match e {
                    Error::Numerical(msg) => Error::Numerical(format!("z-update normal matrix: {msg}")),
                    other => other,
                })?;
                ZKind::Smooth { factor, linear, b_t }
            }
        };
        Ok(Self { kind, rho })
    }

    pub fn solve(&self, inst: &ProblemInstance, x_new: &Vector, lambda: &Vector) -> Result<Vector> {
        let ax_minus_c = &inst.a * x_new - &inst.c;
        match &self.kind {
            // B = −I: z = S_{γ/ρ}(Ax − c + λ/ρ)
            ZKind::SoftThreshold { kappa } => {
                let arg = ax_minus_c + lambda / self.rho;
                Ok(arg.map(|v| shrink(v, *kappa)))
            }
            ZKind::Smooth { factor, linear, b_t } => {
                let rhs = linear - b_t * (lambda + ax_minus_c * self.rho);
                factor.solve(&rhs)
            }
        }
    }
}

pub fn x_update(state: &AdmmState, inst: &ProblemInstance, rho: f64) -> Result<Vector> {
    state.check(inst)?;
    XUpdate::new(inst, rho)?.solve(inst, &state.z, &state.lambda)
}

pub fn z_update(state: &AdmmState, inst: &ProblemInstance, rho: f64, x_new: &Vector) -> Result<Vector> {
    state.check(inst)?;
    check_dim("x_new", inst.x_dim(), x_new.len())?;
    ZUpdate::new(inst, rho)?.solve(inst, x_new, &state.lambda)
}

/// `λ + ρ(A x_new + B z_new − c)`.
pub fn dual_update(
    state: &AdmmState,
    inst: &ProblemInstance,
    rho: f64,
    x_new: &Vector,
    z_new: &Vector,
) -> Result<Vector> {
    check_rho(rho)?;
    inst.check_dual(&state.lambda)?;
    Ok(&state.lambda + inst.residual_vector(x_new, z_new)? * rho)
}

/// One full x → z → λ pass; the result carries time index `state.k + 1`.
pub fn step(state: &AdmmState, inst: &ProblemInstance, config: &SolverConfig) -> Result<AdmmState> {
    state.check(inst)?;
    let xu = XUpdate::new(inst, config.rho)?;
    let zu = ZUpdate::new(inst, config.rho)?;
    Ok(step_with(state, inst, config.rho, &xu, &zu))
}

fn step_with(state: &AdmmState, inst: &ProblemInstance, rho: f64, xu: &XUpdate, zu: &ZUpdate) -> AdmmState {
    // shapes were checked by the caller, so the solves below cannot fail
    let x = xu.solve(inst, &state.z, &state.lambda).expect("x-update shape");
    let z = zu.solve(inst, &x, &state.lambda).expect("z-update shape");
    let lambda = &state.lambda + (&inst.a * &x + &inst.b * &z - &inst.c) * rho;
    AdmmState { x, z, lambda, k: state.k + 1 }
}

/// Runs one pass per instance from the all-zero state.
pub fn run_dynamic(stream: &[ProblemInstance], config: &SolverConfig) -> Result<Vec<AdmmState>> {
    if config.mode != Mode::Dynamic {
        return Err(Error::Domain("run_dynamic needs a dynamic-mode config".into()));
    }
    let Some(first) = stream.first() else {
        return Ok(Vec::new());
    };
    let mut tracker = Tracker::new(first.x_dim(), first.z_dim(), config.rho)?;
    let mut out = Vec::with_capacity(stream.len());
    for (idx, inst) in stream.iter().enumerate() {
        if !inst.same_shape(first) {
            return Err(structural(format!(
                "instance {idx} has shape ({}, {}), stream started with ({}, {})",
                inst.x_dim(),
                inst.z_dim(),
                first.x_dim(),
                first.z_dim()
            )));
        }
        out.push(tracker.advance(inst)?.clone());
    }
    Ok(out)
}

/// Online form of [`run_dynamic`]: feed instances one at a time.
#[derive(Debug, Clone)]
pub struct Tracker {
    state: AdmmState,
    rho: f64,
}

impl Tracker {
    pub fn new(x_dim: usize, z_dim: usize, rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(Self { state: AdmmState::zeros(x_dim, z_dim), rho })
    }

    pub fn state(&self) -> &AdmmState {
        &self.state
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn advance(&mut self, inst: &ProblemInstance) -> Result<&AdmmState> {
        self.advance_audited(inst).map(|(s, _)| s)
    }

    /// Advances and reports how exactly the two subproblems were solved.
    pub fn advance_audited(&mut self, inst: &ProblemInstance) -> Result<(&AdmmState, StepAudit)> {
        self.state.check(inst)?;
        let xu = XUpdate::new(inst, self.rho)?;
        let zu = ZUpdate::new(inst, self.rho)?;
        let next = step_with(&self.state, inst, self.rho, &xu, &zu);
        let audit = StepAudit::of(inst, self.rho, &self.state, &next)?;
        self.state = next;
        Ok((&self.state, audit))
    }
}

/// Repeated ADMM passes over a single instance with cached factorizations.
#[derive(Debug, Clone)]
pub struct StaticAdmm<'a> {
    inst: &'a ProblemInstance,
    rho: f64,
    xu: XUpdate,
    zu: ZUpdate,
}

impl<'a> StaticAdmm<'a> {
    pub fn new(inst: &'a ProblemInstance, config: &SolverConfig) -> Result<Self> {
        if config.mode != Mode::Static {
            return Err(Error::Domain("static ADMM needs a static-mode config".into()));
        }
        Ok(Self {
            inst,
            rho: config.rho,
            xu: XUpdate::new(inst, config.rho)?,
            zu: ZUpdate::new(inst, config.rho)?,
        })
    }

    pub fn step(&self, state: &AdmmState) -> Result<AdmmState> {
        state.check(self.inst)?;
        Ok(step_with(state, self.inst, self.rho, &self.xu, &self.zu))
    }
}

/// Optimality residuals of the two subproblems solved in one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepAudit {
    /// `‖∇f(x_k) + Aᵀλ_{k−1} + ρAᵀ(Ax_k + Bz_{k−1} − c)‖_∞`.
    pub x_stationarity: f64,
    /// Smooth g: the analogous z-gradient norm. L1 g: largest violation of
    /// `λ_{k−1} + ρ(Ax_k − z_k − c) ∈ γ ∂‖z_k‖₁`.
    pub z_optimality: f64,
}

impl StepAudit {
    pub fn of(inst: &ProblemInstance, rho: f64, prev: &AdmmState, next: &AdmmState) -> Result<Self> {
        let a_t = inst.a.transpose();
        let x_res = &inst.a * &next.x + &inst.b * &prev.z - &inst.c;
        let gx = inst.f.gradient(&next.x)? + &a_t * (&prev.lambda + x_res * rho);
        let z_res = inst.residual_vector(&next.x, &next.z)?;
        let z_opt = match &inst.g {
            FunctionSpec::ScaledL1 { weight } => {
                let w = -(inst.b.transpose() * (&prev.lambda + z_res * rho));
                l1_subgradient_violation(&next.z, &w, *weight)
            }
            smooth => {
                let gz = smooth.gradient(&next.z)? + inst.b.transpose() * (&prev.lambda + z_res * rho);
                inf_norm(&gz)
            }
        };
        Ok(Self { x_stationarity: inf_norm(&gx), z_optimality: z_opt })
    }

    pub fn worst(&self) -> f64 {
        self.x_stationarity.max(self.z_optimality)
    }
}

/// Largest violation of `w ∈ γ ∂‖z‖₁`, entries with `|zᵢ| ≤ ZERO_TOL` treated as zero.
pub fn l1_subgradient_violation(z: &Vector, w: &Vector, gamma: f64) -> f64 {
    z.iter().zip(w.iter()).fold(0.0, |acc, (&zi, &wi)| {
        let v = if zi.abs() <= ZERO_TOL {
            (wi.abs() - gamma).max(0.0)
        } else {
            (wi - gamma * zi.signum()).abs()
        };
        acc.max(v)
    })
}
