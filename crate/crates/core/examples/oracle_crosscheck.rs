//! The two oracle routes on the same smooth instances, plus the closed-form
//! scalar LASSO.

use dynadmm::lasso::LassoProblem;
use dynadmm::numerics::{Matrix, Vector};
use dynadmm::oracle::{solve_exact_kkt, solve_static_admm, OracleConfig};
use dynadmm::synth::{quad_family_stream, CouplingKind, QuadFamilyConfig, RngStream};

fn main() -> dynadmm::Result<()> {
    let mut rng = RngStream::new(9);
    let cfg = QuadFamilyConfig { x_dim: 6, z_dim: 4, eta: 0.0, floor: 0.5, coupling: CouplingKind::RandomNonsingular };
    let mut worst = 0.0f64;
    let mut iterations = 0;
    for _ in 0..50 {
        let inst = quad_family_stream(&cfg, 1, &mut rng)?.remove(0);
        let a = solve_exact_kkt(&inst)?;
        let b = solve_static_admm(&inst, &OracleConfig::default())?;
        worst = worst.max((&a.x_star - &b.x_star).amax()).max((&a.lambda_star - &b.lambda_star).amax());
        iterations += b.iterations;
    }
    println!("exact KKT vs static ADMM, 50 instances: max gap {worst:.2e}, mean {} ADMM passes", iterations / 50);

    for (f, h, gamma) in [(1.0, 2.0, 0.2), (1.0, 0.5, 0.6), (2.0, -1.5, 0.4)] {
        let inst = LassoProblem::new(Matrix::from_element(1, 1, f), Vector::from_element(1, h), gamma)?.assemble(1)?;
        let t = solve_static_admm(&inst, &OracleConfig::default())?;
        let fh: f64 = f * h;
        let closed = fh.signum() * (fh.abs() - gamma).max(0.0) / (f * f);
        println!("F={f} h={h} gamma={gamma}: x* = {:.10} closed form {closed:.10}", t.x_star[0]);
    }
    Ok(())
}
