//! Small dense linear-algebra kernel.
//!
//! Everything here works on `nalgebra` dense storage. Matrices in this crate
//! stay at desk scale (a few hundred rows at most), so eigen-extremes come
//! from a full symmetric eigendecomposition and SPD systems from a Cholesky
//! factorization that callers may keep around and reuse.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{structural, Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative asymmetry tolerated before a matrix is rejected as non-symmetric.
pub const SYMMETRY_TOL: f64 = 1e-10;

fn check_square(m: &Matrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(structural(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.is_empty() {
        return Err(structural("empty matrix"));
    }
    Ok(())
}

/// Checks symmetry to [`SYMMETRY_TOL`] (relative to the largest entry) and
/// returns `(M + Mᵀ) / 2`.
pub fn symmetrize(m: &Matrix) -> Result<Matrix> {
    check_square(m)?;
    if let Some(bad) = m.iter().find(|v| !v.is_finite()) {
        return Err(structural(format!("non-finite entry {bad}")));
    }
    let scale = m.amax().max(1.0);
    let mt = m.transpose();
    let asym = (m - &mt).amax();
    if asym > SYMMETRY_TOL * scale {
        return Err(structural(format!(
            "matrix is not symmetric (max |M - Mᵀ| = {asym:e})"
        )));
    }
    Ok((m + mt) * 0.5)
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(m: &Matrix) -> Result<Vec<f64>> {
    let sym = symmetrize(m)?;
    let mut vals: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

pub fn min_eigenvalue_symmetric(m: &Matrix) -> Result<f64> {
    Ok(symmetric_eigenvalues(m)?[0])
}

pub fn max_eigenvalue_symmetric(m: &Matrix) -> Result<f64> {
    let vals = symmetric_eigenvalues(m)?;
    Ok(vals[vals.len() - 1])
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> Result<f64> {
    if m.is_empty() {
        return Err(structural("spectral norm of an empty matrix"));
    }
    let sv = m.clone().svd(false, false).singular_values;
    Ok(sv.iter().copied().fold(0.0, f64::max))
}

/// Smallest singular value.
pub fn min_singular_value(m: &Matrix) -> Result<f64> {
    if m.is_empty() {
        return Err(structural("singular values of an empty matrix"));
    }
    let sv = m.clone().svd(false, false).singular_values;
    Ok(sv.iter().copied().fold(f64::INFINITY, f64::min))
}

/// A reusable Cholesky factorization of a symmetric positive-definite matrix.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    chol: Cholesky<f64, Dyn>,
}

impl SpdFactor {
    pub fn new(m: &Matrix) -> Result<Self> {
        let sym = symmetrize(m)?;
        match Cholesky::new(sym.clone()) {
            Some(chol) => Ok(Self { chol }),
            None => {
                let lam = min_eigenvalue_symmetric(&sym)?;
                Err(Error::Numerical(format!(
                    "matrix is not positive definite (smallest eigenvalue {lam:e})"
                )))
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn solve(&self, b: &Vector) -> Result<Vector> {
        if b.len() != self.dim() {
            return Err(structural(format!(
                "right-hand side has length {}, factor is {}x{}",
                b.len(),
                self.dim(),
                self.dim()
            )));
        }
        Ok(self.chol.solve(b))
    }
}

/// Solves `M x = b` for symmetric positive-definite `M`.
pub fn solve_spd(m: &Matrix, b: &Vector) -> Result<Vector> {
    SpdFactor::new(m)?.solve(b)
}

/// Solves a general square system by LU with one round of iterative refinement.
pub fn solve_general(m: &Matrix, b: &Vector) -> Result<Vector> {
    check_square(m)?;
    if b.len() != m.nrows() {
        return Err(structural("right-hand side length does not match matrix"));
    }
    let lu = m.clone().full_piv_lu();
    let mut x = lu
        .solve(b)
        .ok_or_else(|| Error::Numerical("singular linear system".into()))?;
    let r = b - m * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("linear solve produced non-finite values".into()));
    }
    Ok(x)
}

/// `‖v‖_∞`, zero for empty vectors.
pub fn inf_norm(v: &Vector) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-1.0..=1.0);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let g = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0));
        &g * g.transpose() + Matrix::identity(n, n) * 0.5
    }

    /// Determinant of `M - s I` by Gaussian elimination with partial pivoting.
    fn char_poly(m: &Matrix, s: f64) -> f64 {
        let n = m.nrows();
        let mut a: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)] - if i == j { s } else { 0.0 }).collect())
            .collect();
        let mut det = 1.0;
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
                .unwrap();
            if a[piv][col] == 0.0 {
                return 0.0;
            }
            if piv != col {
                a.swap(piv, col);
                det = -det;
            }
            det *= a[col][col];
            for r in col + 1..n {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
        det
    }

    /// Smallest root of the characteristic polynomial: scan below the Gershgorin
    /// bound for the first sign change, then bisect.
    fn smallest_root_by_bisection(m: &Matrix) -> f64 {
        let n = m.nrows();
        let radius = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut lo = -radius - 1.0;
        let step = 1e-4;
        let f_lo = char_poly(m, lo);
        let mut hi = lo + step;
        while char_poly(m, hi).signum() == f_lo.signum() {
            lo = hi;
            hi += step;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if char_poly(m, mid).signum() == char_poly(m, lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn eigen_extremes_of_diagonal_matrices() {
        assert!((min_eigenvalue_symmetric(&Matrix::identity(3, 3)).unwrap() - 1.0).abs() < 1e-15);
        let d = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, -1.0]));
        assert!((min_eigenvalue_symmetric(&d).unwrap() + 1.0).abs() < 1e-15);
        assert!((max_eigenvalue_symmetric(&d).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn min_eigenvalue_matches_bisection_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let m = random_symmetric(4, &mut rng);
            let oracle = smallest_root_by_bisection(&m);
            let got = min_eigenvalue_symmetric(&m).unwrap();
            assert!((got - oracle).abs() < 1e-8, "{got} vs {oracle}");
        }
    }

    #[test]
    fn rejects_structurally_bad_input() {
        let rect = Matrix::zeros(2, 3);
        assert!(matches!(min_eigenvalue_symmetric(&rect), Err(Error::Structural(_))));
        let asym = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        assert!(matches!(min_eigenvalue_symmetric(&asym), Err(Error::Structural(_))));
        assert!(matches!(spectral_norm(&Matrix::zeros(0, 0)), Err(Error::Structural(_))));
    }

    #[test]
    fn spectral_norm_examples() {
        assert!((spectral_norm(&Matrix::identity(2, 2)).unwrap() - 1.0).abs() < 1e-14);
        let d = Matrix::from_diagonal(&Vector::from_vec(vec![3.0, -4.0]));
        assert!((spectral_norm(&d).unwrap() - 4.0).abs() < 1e-14);
        let n = Matrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        assert!((spectral_norm(&n).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn spd_solve_examples() {
        let b = Vector::from_vec(vec![0.3, -2.0, 7.5]);
        let x = solve_spd(&Matrix::identity(3, 3), &b).unwrap();
        assert!((x - &b).amax() < 1e-15);

        let m = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 4.0]));
        let x = solve_spd(&m, &Vector::from_vec(vec![2.0, 8.0])).unwrap();
        assert!((x - Vector::from_vec(vec![1.0, 2.0])).amax() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_spd(6, &mut rng);
        let b = Vector::from_fn(6, |_, _| rng.random_range(-1.0..=1.0));
        let x = solve_spd(&m, &b).unwrap();
        assert!((&m * x - b).norm() < 1e-9);
    }

    #[test]
    fn spd_solve_rejects_indefinite() {
        let m = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, -0.5]));
        match solve_spd(&m, &Vector::zeros(2)) {
            Err(Error::Numerical(msg)) => assert!(msg.contains("-5e-1"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spd_solve_residual_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for i in 0..1000 {
            let n = 1 + i % 20;
            let m = random_spd(n, &mut rng);
            let b = Vector::from_fn(n, |_, _| rng.random_range(-5.0..=5.0));
            let x = solve_spd(&m, &b).unwrap();
            assert!((&m * x - &b).norm() <= 1e-9 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn general_solve_handles_indefinite_systems() {
        let m = Matrix::from_row_slice(3, 3, &[2.0, 0.0, 1.0, 0.0, 2.0, -1.0, 1.0, -1.0, 0.0]);
        let b = Vector::from_vec(vec![0.0, 0.0, 2.0]);
        let x = solve_general(&m, &b).unwrap();
        assert!((&m * &x - b).amax() < 1e-14);
        assert!((x - Vector::from_vec(vec![1.0, -1.0, -2.0])).amax() < 1e-14);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn sym_matrix() -> impl Strategy<Value = Matrix> {
            (1usize..7).prop_flat_map(|n| {
                proptest::collection::vec(-3.0f64..3.0, n * n).prop_map(move |v| {
                    let m = Matrix::from_vec(n, n, v);
                    (&m + m.transpose()) * 0.5
                })
            })
        }

        proptest! {
            #[test]
            fn shift_moves_min_eigenvalue(m in sym_matrix(), s in -10.0f64..10.0) {
                let n = m.nrows();
                let base = min_eigenvalue_symmetric(&m).unwrap();
                let shifted = min_eigenvalue_symmetric(&(&m + Matrix::identity(n, n) * s)).unwrap();
                prop_assert!((shifted - base - s).abs() < 1e-8);
            }

            #[test]
            fn spectral_norm_transpose_and_scaling(
                v in proptest::collection::vec(-3.0f64..3.0, 12),
                c in -5.0f64..5.0,
            ) {
                let m = Matrix::from_vec(3, 4, v);
                let s = spectral_norm(&m).unwrap();
                prop_assert!((spectral_norm(&m.transpose()).unwrap() - s).abs() < 1e-10);
                prop_assert!((spectral_norm(&(&m * c)).unwrap() - c.abs() * s).abs() < 1e-9);
            }
        }
    }
}
