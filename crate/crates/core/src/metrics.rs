//! Analysis quantities and runtime audits of the convergence inequalities.
//!
//! Everything here is measured against `u = (z, λ)` in the weighted norm
//! `‖u‖_C² = (ρ/2)‖Bz‖² + (1/2ρ)‖λ‖²`.

use crate::error::{check_dim, structural, Error, Result};
use crate::numerics::{
    max_eigenvalue_symmetric, min_eigenvalue_symmetric, min_singular_value, spectral_norm, Matrix, Vector,
};
use crate::oracle::OptimalTriple;
use crate::problem::{FunctionSpec, ProblemInstance};
use crate::solver::AdmmState;

/// Slack allowed on every audited margin.
pub const MARGIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DualPair {
    pub z: Vector,
    pub lambda: Vector,
}

impl DualPair {
    pub fn new(z: Vector, lambda: Vector) -> Result<Self> {
        check_dim("dual pair λ", z.len(), lambda.len())?;
        Ok(Self { z, lambda })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { z: Vector::zeros(dim), lambda: Vector::zeros(dim) }
    }

    pub fn of_state(s: &AdmmState) -> Self {
        Self { z: s.z.clone(), lambda: s.lambda.clone() }
    }

    pub fn of_optimum(t: &OptimalTriple) -> Self {
        Self { z: t.z_star.clone(), lambda: t.lambda_star.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { z: &self.z - &other.z, lambda: &self.lambda - &other.lambda }
    }
}

/// `B` and `ρ` with `‖B‖₂` and `α = λ_min(BᵀB)` cached.
#[derive(Debug, Clone, PartialEq)]
pub struct CNormContext {
    b: Matrix,
    rho: f64,
    norm_b: f64,
    alpha: f64,
}

impl CNormContext {
    pub fn new(b: Matrix, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Domain(format!("penalty ρ must be positive, got {rho}")));
        }
        if b.nrows() != b.ncols() {
            return Err(structural(format!("B must be square, got {}x{}", b.nrows(), b.ncols())));
        }
        let smin = min_singular_value(&b)?;
        if smin <= 0.0 {
            return Err(structural("B is singular"));
        }
        let norm_b = spectral_norm(&b)?;
        Ok(Self { b, rho, norm_b, alpha: smin * smin })
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn norm_b(&self) -> f64 {
        self.norm_b
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The block-diagonal weight `C` itself.
    pub fn matrix(&self) -> Matrix {
        let m = self.b.nrows();
        let mut c = Matrix::zeros(2 * m, 2 * m);
        c.view_mut((0, 0), (m, m)).copy_from(&(self.b.transpose() * &self.b * (self.rho / 2.0)));
        c.view_mut((m, m), (m, m)).copy_from(&(Matrix::identity(m, m) / (2.0 * self.rho)));
        c
    }
}

pub fn c_norm(u: &DualPair, ctx: &CNormContext) -> Result<f64> {
    check_dim("dual pair z", ctx.b.ncols(), u.z.len())?;
    check_dim("dual pair λ", ctx.b.nrows(), u.lambda.len())?;
    let bz = (&ctx.b * &u.z).norm_squared();
    Ok((ctx.rho / 2.0 * bz + u.lambda.norm_squared() / (2.0 * ctx.rho)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexityConstants {
    /// Strong convexity of every `g_k`.
    pub m: f64,
    /// Strong convexity of every `f_k`.
    pub m_tilde: f64,
    /// Lipschitz constant of every `∇g_k`.
    pub l: f64,
    /// `λ_min(BᵀB)`.
    pub alpha: f64,
    pub norm_a: f64,
    pub norm_b: f64,
}

impl ConvexityConstants {
    pub fn new(m: f64, m_tilde: f64, l: f64, alpha: f64, norm_a: f64, norm_b: f64) -> Result<Self> {
        for (name, v) in [("m", m), ("m̃", m_tilde), ("L", l), ("α", alpha), ("‖A‖", norm_a), ("‖B‖", norm_b)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("constant {name} must be positive, got {v}")));
            }
        }
        if l < m {
            return Err(Error::Domain(format!("L = {l} is below m = {m}")));
        }
        Ok(Self { m, m_tilde, l, alpha, norm_a, norm_b })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaParams {
    pub t: f64,
    pub delta: f64,
    pub delta_max: f64,
    pub t_star: f64,
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("penalty ρ must be positive, got {rho}")))
    }
}

/// `δ = min{2mt/(ρ‖B‖²), 2αρ(1−t)/L}`.
pub fn compute_delta(c: &ConvexityConstants, rho: f64, t: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t must lie in (0, 1), got {t}")));
    }
    let first = 2.0 * c.m * t / (rho * c.norm_b * c.norm_b);
    let second = 2.0 * c.alpha * rho * (1.0 - t) / c.l;
    Ok(first.min(second))
}

/// Maximizer `t*` of [`compute_delta`] and the resulting `δ_max`.
pub fn compute_delta_max(c: &ConvexityConstants, rho: f64) -> Result<DeltaParams> {
    check_rho(rho)?;
    let arb2 = c.alpha * rho * rho * c.norm_b * c.norm_b;
    let denom = c.m * c.l + arb2;
    let t_star = arb2 / denom;
    let delta_max = 2.0 * c.m * c.alpha * rho / denom;
    let delta = compute_delta(c, rho, t_star)?;
    Ok(DeltaParams { t: t_star, delta, delta_max, t_star })
}

/// Drift `d_k = √(ρ/2)‖B‖‖z*_{k−1} − z*_k‖ + ‖∇g_{k−1}(z*_{k−1}) − ∇g_k(z*_k)‖/√(2ρα)`.
pub fn drift(
    z_star_prev: &Vector,
    z_star_cur: &Vector,
    g_prev: &FunctionSpec,
    g_cur: &FunctionSpec,
    ctx: &CNormContext,
) -> Result<f64> {
    if !(g_prev.is_smooth() && g_cur.is_smooth()) {
        return Err(Error::Unsupported(
            "drift needs a smooth g; use optimum_displacement for L1 terms".into(),
        ));
    }
    let dg = g_prev.gradient(z_star_prev)? - g_cur.gradient(z_star_cur)?;
    Ok(optimum_displacement(z_star_prev, z_star_cur, ctx)? + dg.norm() / (2.0 * ctx.rho * ctx.alpha).sqrt())
}

/// First term of the drift alone, `√(ρ/2)‖B‖‖z*_{k−1} − z*_k‖`. This is a
/// surrogate for runs with an L1 `g`, where the gradient term does not exist.
pub fn optimum_displacement(z_star_prev: &Vector, z_star_cur: &Vector, ctx: &CNormContext) -> Result<f64> {
    check_dim("optimum displacement", z_star_prev.len(), z_star_cur.len())?;
    Ok((ctx.rho / 2.0).sqrt() * ctx.norm_b * (z_star_prev - z_star_cur).norm())
}

fn contraction(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("δ must be positive, got {delta}")));
    }
    Ok(1.0 / (1.0 + delta).sqrt())
}

/// `(1/√(1+δ))‖u_{k−1} − u_k*‖_C − ‖u_k − u_k*‖_C`.
pub fn check_prop1(u_k: &DualPair, u_star_k: &DualPair, u_prev: &DualPair, delta: f64, ctx: &CNormContext) -> Result<f64> {
    let r = contraction(delta)?;
    Ok(r * c_norm(&u_prev.sub(u_star_k), ctx)? - c_norm(&u_k.sub(u_star_k), ctx)?)
}

/// `(1/√(1+δ))(‖u_{k−1} − u_{k−1}*‖_C + d_k) − ‖u_k − u_k*‖_C`, defined for `k ≥ 2`.
#[allow(clippy::too_many_arguments)]
pub fn check_thm1(
    k: usize,
    u_k: &DualPair,
    u_star_k: &DualPair,
    u_prev: &DualPair,
    u_star_prev: &DualPair,
    delta: f64,
    d_k: f64,
    ctx: &CNormContext,
) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!("tracking bound needs k ≥ 2, got {k}")));
    }
    let r = contraction(delta)?;
    Ok(r * (c_norm(&u_prev.sub(u_star_prev), ctx)? + d_k) - c_norm(&u_k.sub(u_star_k), ctx)?)
}

/// Primal and dual error norms at one step plus the C-norm errors they are bounded by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm2Inputs {
    pub k: usize,
    pub err_x: f64,
    pub err_z: f64,
    pub err_lambda: f64,
    /// `‖u_k − u_k*‖_C`.
    pub e_k: f64,
    /// `‖u_{k−1} − u_{k−1}*‖_C`.
    pub e_prev: f64,
    pub d_k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm2Margins {
    pub x: f64,
    pub z: f64,
    pub lambda: f64,
}

/// Bound on `‖x_k − x_k*‖` from the C-norm errors at `k` and `k − 1` and the drift.
pub fn thm2_x_bound(e_k: f64, e_prev: f64, d_k: f64, c: &ConvexityConstants, rho: f64) -> f64 {
    let s = (2.0 * rho).sqrt();
    let coupling = c.norm_b * (2.0 * rho / c.alpha).sqrt();
    c.norm_a / c.m_tilde * ((s + coupling) * e_k + coupling * e_prev + s * d_k)
}

/// `√(2/(αρ)) e_k − ‖z_k − z_k*‖`, valid for every `k ≥ 1`.
pub fn thm2_z_margin(err_z: f64, e_k: f64, c: &ConvexityConstants, rho: f64) -> f64 {
    (2.0 / (c.alpha * rho)).sqrt() * e_k - err_z
}

/// `√(2ρ) e_k − ‖λ_k − λ_k*‖`, valid for every `k ≥ 1`.
pub fn thm2_lambda_margin(err_lambda: f64, e_k: f64, rho: f64) -> f64 {
    (2.0 * rho).sqrt() * e_k - err_lambda
}

/// All three primal/dual margins; the x bound involves step `k − 1`, so `k ≥ 2`.
pub fn check_thm2(inp: &Thm2Inputs, c: &ConvexityConstants, rho: f64) -> Result<Thm2Margins> {
    check_rho(rho)?;
    if inp.k < 2 {
        return Err(Error::Domain(format!("x-error bound needs k ≥ 2, got {}", inp.k)));
    }
    Ok(Thm2Margins {
        x: thm2_x_bound(inp.e_k, inp.e_prev, inp.d_k, c, rho) - inp.err_x,
        z: thm2_z_margin(inp.err_z, inp.e_k, c, rho),
        lambda: thm2_lambda_margin(inp.err_lambda, inp.e_k, rho),
    })
}

/// Limsup bounds for a drift bounded by `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateBounds {
    pub u_c: f64,
    pub x: f64,
    pub z: f64,
    pub lambda: f64,
}

pub fn steady_state_bounds(d: f64, delta: f64, c: &ConvexityConstants, rho: f64) -> Result<SteadyStateBounds> {
    check_rho(rho)?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("δ must be positive, got {delta}")));
    }
    if !(d >= 0.0 && d.is_finite()) {
        return Err(Error::Domain(format!("drift bound must be nonnegative, got {d}")));
    }
    let gap = (1.0 + delta).sqrt() - 1.0;
    let u_c = d / gap;
    let s = (2.0 * rho).sqrt();
    let x = c.norm_a / c.m_tilde * ((s + c.norm_b * (8.0 * rho / c.alpha).sqrt()) / gap + s) * d;
    Ok(SteadyStateBounds { u_c, x, z: (2.0 / (c.alpha * rho)).sqrt() * u_c, lambda: s * u_c })
}

/// `‖x‖` restricted to the coordinates outside `support`.
pub fn sparsity_deviation(x: &Vector, support: &[usize]) -> Result<f64> {
    let mut mask = vec![true; x.len()];
    for &i in support {
        if i >= x.len() {
            return Err(structural(format!("support index {i} out of range for length {}", x.len())));
        }
        mask[i] = false;
    }
    Ok(x.iter().zip(&mask).filter(|(_, &off)| off).map(|(v, _)| v * v).sum::<f64>().sqrt())
}

/// Constants over a finite stream of quadratic instances: extremes over the
/// observed `k` stand in for uniform-in-`k` constants.
pub fn constants_from_stream(stream: &[ProblemInstance]) -> Result<ConvexityConstants> {
    let first = stream.first().ok_or_else(|| structural("empty stream"))?;
    let (mut m, mut m_tilde, mut l) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    for inst in stream {
        if inst.a != first.a || inst.b != first.b {
            return Err(structural(format!("instance {} changes A or B", inst.k)));
        }
        match (&inst.f, &inst.g) {
            (FunctionSpec::Quadratic { phi, .. }, FunctionSpec::Quadratic { phi: psi, .. }) => {
                m_tilde = m_tilde.min(2.0 * min_eigenvalue_symmetric(phi)?);
                m = m.min(2.0 * min_eigenvalue_symmetric(psi)?);
                l = l.max(2.0 * max_eigenvalue_symmetric(psi)?);
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "instance {}: constants need quadratic f and g",
                    inst.k
                )))
            }
        }
    }
    let smin_b = min_singular_value(&first.b)?;
    ConvexityConstants::new(m, m_tilde, l, smin_b * smin_b, spectral_norm(&first.a)?, spectral_norm(&first.b)?)
}

/// Length of the trailing window used to estimate a limsup: the final quarter
/// of the run, at least 100 steps, never more than the run.
pub fn trailing_window_len(steps: usize) -> usize {
    steps.div_ceil(4).max(100).min(steps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub k: usize,
    pub state: AdmmState,
    pub optimum: OptimalTriple,
    pub err_x: f64,
    pub err_z: f64,
    pub err_lambda: f64,
    pub err_u_c: f64,
    /// `None` at `k = 1`.
    pub drift: Option<f64>,
    pub prop1_margin: f64,
    pub thm1_margin: Option<f64>,
    pub thm2_x_margin: Option<f64>,
    pub thm2_z_margin: f64,
    pub thm2_lambda_margin: f64,
}

impl TrajectoryRecord {
    /// Smallest margin recorded at this step.
    pub fn worst_margin(&self) -> f64 {
        [Some(self.prop1_margin), self.thm1_margin, self.thm2_x_margin, Some(self.thm2_z_margin), Some(self.thm2_lambda_margin)]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Audits a materialized run. `states[i]` is the iterate after instance
/// `stream[i]`, `optima[i]` its optimum; the run starts from zeros.
pub fn audit_run(
    stream: &[ProblemInstance],
    states: &[AdmmState],
    optima: &[OptimalTriple],
    consts: &ConvexityConstants,
    delta: f64,
    ctx: &CNormContext,
) -> Result<Vec<TrajectoryRecord>> {
    if stream.len() != states.len() || stream.len() != optima.len() {
        return Err(structural("stream, states and optima differ in length"));
    }
    let rho = ctx.rho();
    let mut out: Vec<TrajectoryRecord> = Vec::with_capacity(stream.len());
    let mut u_prev = DualPair::zeros(ctx.b.nrows());
    for (i, ((inst, state), opt)) in stream.iter().zip(states).zip(optima).enumerate() {
        let k = i + 1;
        let u_k = DualPair::of_state(state);
        let u_star = DualPair::of_optimum(opt);
        let e_k = c_norm(&u_k.sub(&u_star), ctx)?;
        let err_x = (&state.x - &opt.x_star).norm();
        let err_z = (&state.z - &opt.z_star).norm();
        let err_lambda = (&state.lambda - &opt.lambda_star).norm();
        let prop1 = check_prop1(&u_k, &u_star, &u_prev, delta, ctx)?;
        let (d, thm1, thm2x) = match out.last() {
            None => (None, None, None),
            Some(prev) => {
                let d_k = drift(&prev.optimum.z_star, &opt.z_star, &stream[i - 1].g, &inst.g, ctx)?;
                let u_star_prev = DualPair::of_optimum(&prev.optimum);
                let t1 = check_thm1(k, &u_k, &u_star, &u_prev, &u_star_prev, delta, d_k, ctx)?;
                let t2 = thm2_x_bound(e_k, prev.err_u_c, d_k, consts, rho) - err_x;
                (Some(d_k), Some(t1), Some(t2))
            }
        };
        out.push(TrajectoryRecord {
            k,
            state: state.clone(),
            optimum: opt.clone(),
            err_x,
            err_z,
            err_lambda,
            err_u_c: e_k,
            drift: d,
            prop1_margin: prop1,
            thm1_margin: thm1,
            thm2_x_margin: thm2x,
            thm2_z_margin: thm2_z_margin(err_z, e_k, consts, rho),
            thm2_lambda_margin: thm2_lambda_margin(err_lambda, e_k, rho),
        });
        u_prev = u_k;
    }
    Ok(out)
}
