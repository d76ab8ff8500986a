//! Dynamic sharing problem
//!
//! ```text
//! minimize  Σᵢ (x⁽ⁱ⁾ − θ⁽ⁱ⁾)ᵀ Φ⁽ⁱ⁾ (x⁽ⁱ⁾ − θ⁽ⁱ⁾) + γ ‖Σᵢ x⁽ⁱ⁾‖₁
//! ```
//!
//! cast as `f(x) + g(z)` with `x = [x⁽¹⁾; …; x⁽ⁿ⁾]`, `A = [I_p … I_p]`,
//! `B = −I_p`, `c = 0`, block-diagonal quadratic `f` and `g = γ‖·‖₁`.

use crate::error::{check_dim, structural, Result};
use crate::numerics::{min_eigenvalue_symmetric, Matrix, SpdFactor, Vector};
use crate::problem::{check_rho, FunctionSpec, ProblemInstance};
use crate::solver::{x_update, AdmmState};

#[derive(Debug, Clone, PartialEq)]
pub struct SharingBlock {
    pub phi: Matrix,
    pub theta: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharingProblem {
    blocks: Vec<SharingBlock>,
    gamma: f64,
}

impl SharingProblem {
    pub fn new(blocks: Vec<SharingBlock>, gamma: f64) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(structural("sharing problem needs at least one subsystem"));
        };
        let p = first.theta.len();
        if p == 0 {
            return Err(structural("subsystem dimension must be positive"));
        }
        for (i, blk) in blocks.iter().enumerate() {
            check_dim(&format!("θ of subsystem {i}"), p, blk.theta.len())?;
            if blk.phi.nrows() != p || blk.phi.ncols() != p {
                return Err(structural(format!("Φ of subsystem {i} must be {p}x{p}")));
            }
            let lam = min_eigenvalue_symmetric(&blk.phi)?;
            if lam <= 0.0 {
                return Err(structural(format!(
                    "Φ of subsystem {i} is not positive definite (smallest eigenvalue {lam:e})"
                )));
            }
        }
        FunctionSpec::scaled_l1(gamma)?;
        Ok(Self { blocks, gamma })
    }

    pub fn n(&self) -> usize {
        self.blocks.len()
    }

    pub fn p(&self) -> usize {
        self.blocks[0].theta.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn blocks(&self) -> &[SharingBlock] {
        &self.blocks
    }

    /// `[I_p … I_p]`, p × np.
    pub fn coupling_matrix(&self) -> Matrix {
        let p = self.p();
        Matrix::from_fn(p, self.n() * p, |r, c| if c % p == r { 1.0 } else { 0.0 })
    }

    pub fn stacked_phi(&self) -> Matrix {
        let p = self.p();
        let mut out = Matrix::zeros(self.n() * p, self.n() * p);
        for (i, blk) in self.blocks.iter().enumerate() {
            out.view_mut((i * p, i * p), (p, p)).copy_from(&blk.phi);
        }
        out
    }

    pub fn stacked_theta(&self) -> Vector {
        let p = self.p();
        Vector::from_fn(self.n() * p, |r, _| self.blocks[r / p].theta[r % p])
    }

    /// `Σᵢ x⁽ⁱ⁾`, computed blockwise.
    pub fn block_sum(&self, x: &Vector) -> Result<Vector> {
        let p = self.p();
        check_dim("stacked x", self.n() * p, x.len())?;
        Ok(Vector::from_fn(p, |r, _| (0..self.n()).map(|i| x[i * p + r]).sum()))
    }

    /// The objective in its direct (unsplit) form.
    pub fn objective(&self, x: &Vector) -> Result<f64> {
        let p = self.p();
        let sum = self.block_sum(x)?;
        let local: f64 = self
            .blocks
            .iter()
            .enumerate()
            .map(|(i, blk)| {
                let d = x.rows(i * p, p) - &blk.theta;
                d.dot(&(&blk.phi * &d))
            })
            .sum();
        Ok(local + self.gamma * sum.lp_norm(1))
    }

    pub fn assemble(&self, k: usize) -> Result<ProblemInstance> {
        let p = self.p();
        ProblemInstance::new(
            k,
            FunctionSpec::quadratic(self.stacked_phi(), self.stacked_theta())?,
            FunctionSpec::scaled_l1(self.gamma)?,
            self.coupling_matrix(),
            -Matrix::identity(p, p),
            Vector::zeros(p),
        )
    }

    fn check_state(&self, state: &AdmmState) -> Result<()> {
        check_dim("state x", self.n() * self.p(), state.x.len())?;
        check_dim("state z", self.p(), state.z.len())?;
        check_dim("state λ", self.p(), state.lambda.len())
    }

    /// `x = (2Φ + ρAᵀA)⁻¹ (2Φθ − Aᵀλ + ρAᵀz)` through one dense np × np solve.
    pub fn x_update(&self, state: &AdmmState, rho: f64) -> Result<Vector> {
        self.check_state(state)?;
        x_update(state, &self.assemble(state.k + 1)?, rho)
    }

    /// Same update as [`Self::x_update`], exploiting the structure: with
    /// `D = blockdiag(2Φ⁽ⁱ⁾)` and `AᵀA` made of identity blocks, the Woodbury
    /// identity reduces the system to `n` p × p solves plus one more p × p solve
    /// against `I/ρ + Σᵢ (2Φ⁽ⁱ⁾)⁻¹`.
    pub fn x_update_structured(&self, state: &AdmmState, rho: f64) -> Result<Vector> {
        check_rho(rho)?;
        self.check_state(state)?;
        let p = self.p();
        // shared part of the right-hand side: −λ + ρz, identical for every block
        let shared = &state.z * rho - &state.lambda;
        let mut factors = Vec::with_capacity(self.n());
        let mut y = Vec::with_capacity(self.n());
        let mut capacitance = Matrix::identity(p, p) / rho;
        let mut y_sum = Vector::zeros(p);
        for blk in &self.blocks {
            let two_phi = &blk.phi * 2.0;
            let fac = SpdFactor::new(&two_phi)?;
            let rhs = &two_phi * &blk.theta + &shared;
            let yi = fac.solve(&rhs)?;
            capacitance += fac_inverse(&fac, p)?;
            y_sum += &yi;
            factors.push(fac);
            y.push(yi);
        }
        let w = SpdFactor::new(&capacitance)?.solve(&y_sum)?;
        let mut x = Vector::zeros(self.n() * p);
        for (i, (fac, yi)) in factors.iter().zip(y).enumerate() {
            let xi = yi - fac.solve(&w)?;
            x.rows_mut(i * p, p).copy_from(&xi);
        }
        Ok(x)
    }

    /// Reorders the subsystems: block `i` of the result is block `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_dim("permutation", self.n(), perm.len())?;
        let mut seen = vec![false; self.n()];
        for &j in perm {
            if j >= self.n() || std::mem::replace(&mut seen[j], true) {
                return Err(structural("not a permutation"));
            }
        }
        Ok(Self {
            blocks: perm.iter().map(|&j| self.blocks[j].clone()).collect(),
            gamma: self.gamma,
        })
    }
}

fn fac_inverse(fac: &SpdFactor, p: usize) -> Result<Matrix> {
    let mut inv = Matrix::zeros(p, p);
    for j in 0..p {
        let mut e = Vector::zeros(p);
        e[j] = 1.0;
        inv.set_column(j, &fac.solve(&e)?);
    }
    Ok(inv)
}

/// Applies a block permutation to a stacked vector of `n` blocks of size `p`.
pub fn permute_blocks(x: &Vector, p: usize, perm: &[usize]) -> Vector {
    Vector::from_fn(perm.len() * p, |r, _| x[perm[r / p] * p + r % p])
}
