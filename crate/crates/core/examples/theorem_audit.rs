//! Audit the contraction and tracking inequalities on a stream where every
//! convexity assumption holds, then compare the tail against the steady-state bounds.

use dynadmm::metrics::{
    audit_run, compute_delta_max, constants_from_stream, steady_state_bounds, trailing_window_len, CNormContext,
};
use dynadmm::oracle::solve_exact_kkt;
use dynadmm::solver::{run_dynamic, SolverConfig};
use dynadmm::synth::{quad_family_stream, CouplingKind, QuadFamilyConfig, RngStream};

fn main() -> dynadmm::Result<()> {
    let rho = 1.0;
    let cfg = QuadFamilyConfig { x_dim: 5, z_dim: 5, eta: 0.2, floor: 1.0, coupling: CouplingKind::RandomNonsingular };
    let stream = quad_family_stream(&cfg, 500, &mut RngStream::new(11))?;
    let consts = constants_from_stream(&stream)?;
    let dp = compute_delta_max(&consts, rho)?;
    println!("{consts:?}");
    println!("t* = {:.4}, delta_max = {:.4}", dp.t_star, dp.delta_max);

    let states = run_dynamic(&stream, &SolverConfig::dynamic(rho))?;
    let optima = stream.iter().map(solve_exact_kkt).collect::<dynadmm::Result<Vec<_>>>()?;
    let ctx = CNormContext::new(stream[0].b.clone(), rho)?;
    let records = audit_run(&stream, &states, &optima, &consts, dp.delta_max, &ctx)?;

    let worst = records.iter().map(|r| r.worst_margin()).fold(f64::INFINITY, f64::min);
    println!("smallest margin over {} steps: {worst:.3e}", records.len());

    let d = records.iter().filter_map(|r| r.drift).fold(0.0, f64::max);
    let b = steady_state_bounds(d, dp.delta_max, &consts, rho)?;
    let tail = &records[records.len() - trailing_window_len(records.len())..];
    let max = |f: fn(&dynadmm::metrics::TrajectoryRecord) -> f64| tail.iter().map(f).fold(0.0, f64::max);
    println!("max drift d = {d:.4}");
    println!("{:>8} {:>12} {:>12}", "", "tail max", "bound");
    println!("{:>8} {:>12.4e} {:>12.4e}", "u (C)", max(|r| r.err_u_c), b.u_c);
    println!("{:>8} {:>12.4e} {:>12.4e}", "x", max(|r| r.err_x), b.x);
    println!("{:>8} {:>12.4e} {:>12.4e}", "z", max(|r| r.err_z), b.z);
    println!("{:>8} {:>12.4e} {:>12.4e}", "lambda", max(|r| r.err_lambda), b.lambda);
    Ok(())
}
