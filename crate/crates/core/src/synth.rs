//! Seeded generators for the synthetic problem streams.
//!
//! All randomness flows through [`RngStream`], a ChaCha8 generator keyed by a
//! 64-bit seed, so any stream can be regenerated bit-for-bit from its seed
//! and config. Draw order inside a step is fixed and documented on each
//! generator.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, structural, Error, Result};
use crate::lasso::LassoProblem;
use crate::numerics::{min_eigenvalue_symmetric, min_singular_value, Matrix, Vector};
use crate::problem::{FunctionSpec, ProblemInstance};
use crate::sharing::{SharingBlock, SharingProblem};

/// Eigenvalues this close below the floor are left alone, so that a matrix
/// which already sits on the floor is not shifted again by roundoff.
const FLOOR_SLACK: f64 = 1e-12;

/// Seeded ChaCha8 stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform on `[−1, 1]`.
    pub fn uniform_sym(&mut self) -> f64 {
        self.rng.random_range(-1.0..=1.0)
    }

    /// Uniform on `[0, 1]`.
    pub fn uniform_unit(&mut self) -> f64 {
        self.rng.random_range(0.0..=1.0)
    }

    pub fn gaussian(&mut self, std_dev: f64) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        std_dev * z
    }

    /// `count` distinct indices from `0..len`, sorted.
    pub fn distinct_indices(&mut self, len: usize, count: usize) -> Vec<usize> {
        let mut idx = index::sample(&mut self.rng, len, count).into_vec();
        idx.sort_unstable();
        idx
    }

    pub fn uniform_vector(&mut self, n: usize) -> Vector {
        Vector::from_fn(n, |_, _| self.uniform_sym())
    }

    /// Entries uniform on `[−1, 1]`, filled row by row.
    pub fn uniform_matrix(&mut self, rows: usize, cols: usize) -> Matrix {
        let data: Vec<f64> = (0..rows * cols).map(|_| self.uniform_sym()).collect();
        DMatrix::from_row_slice(rows, cols, &data)
    }

    /// Symmetric matrix: upper triangle (with diagonal) uniform on `[−1, 1]`,
    /// drawn row by row, then mirrored.
    pub fn symmetric_matrix(&mut self, n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.uniform_sym();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }
}

/// Returns `m` if `λ_min(m) ≥ floor`, else `m + (floor − λ_min(m)) I`.
pub fn apply_eigen_floor(m: Matrix, floor: f64) -> Result<Matrix> {
    let lam = min_eigenvalue_symmetric(&m)?;
    if lam >= floor - FLOOR_SLACK {
        return Ok(m);
    }
    let n = m.nrows();
    Ok(m + Matrix::identity(n, n) * (floor - lam))
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be non-negative, got {v}")))
    }
}

/// Random symmetric matrix lifted onto the eigenvalue floor.
pub fn init_phi(p: usize, floor: f64, rng: &mut RngStream) -> Result<Matrix> {
    check_positive("eigenvalue floor", floor)?;
    if p == 0 {
        return Err(structural("matrix dimension must be positive"));
    }
    apply_eigen_floor(rng.symmetric_matrix(p), floor)
}

pub fn init_theta(p: usize, rng: &mut RngStream) -> Vector {
    rng.uniform_vector(p)
}

/// `prev + η E` with `E` symmetric uniform, then the eigenvalue floor.
pub fn next_phi(prev: &Matrix, eta: f64, floor: f64, rng: &mut RngStream) -> Result<Matrix> {
    check_nonnegative("drift scale", eta)?;
    check_positive("eigenvalue floor", floor)?;
    let e = rng.symmetric_matrix(prev.nrows());
    apply_eigen_floor(prev + e * eta, floor)
}

/// `prev + η h`, `h` uniform on `[−1, 1]` entrywise.
pub fn next_theta(prev: &Vector, eta: f64, rng: &mut RngStream) -> Result<Vector> {
    check_nonnegative("drift scale", eta)?;
    Ok(prev + rng.uniform_vector(prev.len()) * eta)
}

/// `prev + η W`, `W` uniform on `[−1, 1]` entrywise.
pub fn next_design(prev: &Matrix, eta: f64, rng: &mut RngStream) -> Result<Matrix> {
    check_nonnegative("drift scale", eta)?;
    Ok(prev + rng.uniform_matrix(prev.nrows(), prev.ncols()) * eta)
}

/// Sparse ground truth: zero outside a fixed support.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    support: Vec<usize>,
    values: Vector,
}

impl GroundTruth {
    pub fn new(support: Vec<usize>, values: Vector) -> Result<Self> {
        let mut sorted = support.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != support.len() || sorted.last().is_some_and(|&i| i >= values.len()) {
            return Err(structural("support must hold distinct in-range indices"));
        }
        for (i, v) in values.iter().enumerate() {
            if *v != 0.0 && sorted.binary_search(&i).is_err() {
                return Err(structural(format!("entry {i} is off the support but nonzero")));
            }
        }
        Ok(Self { support: sorted, values })
    }

    /// Zero-based, sorted support indices.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &Vector {
        &self.values
    }
}

/// `q` distinct support indices, support entries uniform on `[0, 1]`.
pub fn init_ground_truth(p: usize, q: usize, rng: &mut RngStream) -> Result<GroundTruth> {
    if q == 0 || q > p {
        return Err(structural(format!("support size must be in 1..={p}, got {q}")));
    }
    let support = rng.distinct_indices(p, q);
    let mut values = Vector::zeros(p);
    for &j in &support {
        values[j] = rng.uniform_unit();
    }
    GroundTruth::new(support, values)
}

/// Perturbs each support entry by `η·uniform[−1, 1]`; other entries stay zero.
pub fn next_ground_truth(prev: &GroundTruth, eta: f64, rng: &mut RngStream) -> Result<GroundTruth> {
    check_nonnegative("drift scale", eta)?;
    let mut values = prev.values.clone();
    for &j in &prev.support {
        values[j] += eta * rng.uniform_sym();
    }
    Ok(GroundTruth { support: prev.support.clone(), values })
}

/// `F · truth + v` with `v ~ N(0, σ² I)`.
pub fn sample_target(design: &Matrix, truth: &GroundTruth, sigma: f64, rng: &mut RngStream) -> Result<Vector> {
    check_nonnegative("noise standard deviation", sigma)?;
    check_dim("ground truth", design.ncols(), truth.values.len())?;
    let clean = design * &truth.values;
    Ok(Vector::from_fn(clean.len(), |i, _| clean[i] + rng.gaussian(sigma)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharingStreamConfig {
    pub n: usize,
    pub p: usize,
    /// Drift scale, shared by every subsystem and step.
    pub eta: f64,
    /// Eigenvalue floor of every `Φ`.
    pub eps: f64,
    pub gamma: f64,
}

/// Time-varying sharing problems.
///
/// Initial draws, per subsystem `i = 1..n`: `Φ₀` (symmetric, floored), then
/// `θ₀`. Each later step, per subsystem: `E` then `h`.
#[derive(Debug, Clone)]
pub struct SharingStream {
    cfg: SharingStreamConfig,
    rng: RngStream,
    blocks: Vec<SharingBlock>,
    k: usize,
}

impl SharingStream {
    pub fn new(cfg: SharingStreamConfig, seed: u64) -> Result<Self> {
        if cfg.n == 0 || cfg.p == 0 {
            return Err(structural("sharing stream needs n ≥ 1 and p ≥ 1"));
        }
        check_nonnegative("drift scale η", cfg.eta)?;
        check_positive("eigenvalue floor ε", cfg.eps)?;
        check_positive("L1 weight γ", cfg.gamma)?;
        let mut rng = RngStream::new(seed);
        let mut blocks = Vec::with_capacity(cfg.n);
        for _ in 0..cfg.n {
            let phi = init_phi(cfg.p, cfg.eps, &mut rng)?;
            let theta = init_theta(cfg.p, &mut rng);
            blocks.push(SharingBlock { phi, theta });
        }
        Ok(Self { cfg, rng, blocks, k: 0 })
    }

    /// Time index of the most recently produced problem (0 before the first call).
    pub fn k(&self) -> usize {
        self.k
    }

    /// Drifts every subsystem one step and returns the problem at the new `k`.
    pub fn next_problem(&mut self) -> Result<SharingProblem> {
        for blk in &mut self.blocks {
            blk.phi = next_phi(&blk.phi, self.cfg.eta, self.cfg.eps, &mut self.rng)?;
            blk.theta = next_theta(&blk.theta, self.cfg.eta, &mut self.rng)?;
        }
        self.k += 1;
        SharingProblem::new(self.blocks.clone(), self.cfg.gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoStreamConfig {
    pub m: usize,
    pub p: usize,
    /// Support size of the ground truth.
    pub q: usize,
    pub eta: f64,
    /// Noise standard deviation.
    pub sigma: f64,
    pub gamma: f64,
}

/// One step of the LASSO stream.
#[derive(Debug, Clone)]
pub struct LassoSlice {
    pub k: usize,
    pub problem: LassoProblem,
    pub truth: GroundTruth,
}

/// Time-varying LASSO problems with a sparse drifting ground truth.
///
/// Initial draws: `F₀` row by row, support indices, support values. Each
/// later step: `W` row by row, support perturbation, then the noise vector.
#[derive(Debug, Clone)]
pub struct LassoStream {
    cfg: LassoStreamConfig,
    rng: RngStream,
    design: Matrix,
    truth: GroundTruth,
    k: usize,
}

impl LassoStream {
    pub fn new(cfg: LassoStreamConfig, seed: u64) -> Result<Self> {
        if cfg.m == 0 || cfg.p == 0 {
            return Err(structural("LASSO stream needs m ≥ 1 and p ≥ 1"));
        }
        check_nonnegative("drift scale η", cfg.eta)?;
        check_nonnegative("noise σ", cfg.sigma)?;
        check_positive("L1 weight γ", cfg.gamma)?;
        let mut rng = RngStream::new(seed);
        let design = rng.uniform_matrix(cfg.m, cfg.p);
        let truth = init_ground_truth(cfg.p, cfg.q, &mut rng)?;
        Ok(Self { cfg, rng, design, truth, k: 0 })
    }

    pub fn support(&self) -> &[usize] {
        self.truth.support()
    }

    pub fn next_slice(&mut self) -> Result<LassoSlice> {
        self.design = next_design(&self.design, self.cfg.eta, &mut self.rng)?;
        self.truth = next_ground_truth(&self.truth, self.cfg.eta, &mut self.rng)?;
        let target = sample_target(&self.design, &self.truth, self.cfg.sigma, &mut self.rng)?;
        self.k += 1;
        Ok(LassoSlice {
            k: self.k,
            problem: LassoProblem::new(self.design.clone(), target, self.cfg.gamma)?,
            truth: self.truth.clone(),
        })
    }
}

/// Constraint matrix `B` used by the quadratic family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    /// `B = −I`, so `α = 1`.
    NegIdentity,
    /// A random well-conditioned nonsingular `B`, so `α ≠ 1`.
    RandomNonsingular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadFamilyConfig {
    pub x_dim: usize,
    pub z_dim: usize,
    pub eta: f64,
    /// Eigenvalue floor of every `Φ_k` and `Ψ_k`.
    pub floor: f64,
    pub coupling: CouplingKind,
}

/// Smallest singular value accepted for the random fixed `A` and `B`.
const MIN_SINGULAR: f64 = 0.1;

fn well_conditioned(rows: usize, cols: usize, rng: &mut RngStream) -> Result<Matrix> {
    for _ in 0..1000 {
        let m = rng.uniform_matrix(rows, cols);
        if min_singular_value(&m)? >= MIN_SINGULAR {
            return Ok(m);
        }
    }
    Err(Error::Numerical("could not draw a well-conditioned matrix".into()))
}

/// Stream on which every convergence assumption holds: `f_k(x) = (x − θ_k)ᵀΦ_k(x − θ_k)`,
/// `g_k(z) = (z − ζ_k)ᵀΨ_k(z − ζ_k)`, fixed random `A`, `B` per [`CouplingKind`], `c = 0`.
///
/// Draw order: `A`, `B` (if random), `Φ₀`, `θ₀`, `Ψ₀`, `ζ₀`; each step then
/// drifts `Φ`, `θ`, `Ψ`, `ζ` in that order. Returns instances `k = 1..=steps`.
pub fn quad_family_stream(cfg: &QuadFamilyConfig, steps: usize, rng: &mut RngStream) -> Result<Vec<ProblemInstance>> {
    check_positive("eigenvalue floor", cfg.floor)?;
    check_nonnegative("drift scale", cfg.eta)?;
    if cfg.x_dim == 0 || cfg.z_dim == 0 {
        return Err(structural("quadratic family needs positive dimensions"));
    }
    let a = well_conditioned(cfg.z_dim, cfg.x_dim, rng)?;
    let b = match cfg.coupling {
        CouplingKind::NegIdentity => -Matrix::identity(cfg.z_dim, cfg.z_dim),
        CouplingKind::RandomNonsingular => well_conditioned(cfg.z_dim, cfg.z_dim, rng)?,
    };
    let c = Vector::zeros(cfg.z_dim);
    let mut phi = init_phi(cfg.x_dim, cfg.floor, rng)?;
    let mut theta = init_theta(cfg.x_dim, rng);
    let mut psi = init_phi(cfg.z_dim, cfg.floor, rng)?;
    let mut zeta = init_theta(cfg.z_dim, rng);
    let mut out = Vec::with_capacity(steps);
    for k in 1..=steps {
        phi = next_phi(&phi, cfg.eta, cfg.floor, rng)?;
        theta = next_theta(&theta, cfg.eta, rng)?;
        psi = next_phi(&psi, cfg.eta, cfg.floor, rng)?;
        zeta = next_theta(&zeta, cfg.eta, rng)?;
        out.push(ProblemInstance::new(
            k,
            FunctionSpec::quadratic(phi.clone(), theta.clone())?,
            FunctionSpec::quadratic(psi.clone(), zeta.clone())?,
            a.clone(),
            b.clone(),
            c.clone(),
        )?);
    }
    Ok(out)
}
