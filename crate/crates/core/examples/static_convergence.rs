//! With no drift the tracker is plain ADMM; its C-norm error shrinks at least
//! geometrically with ratio 1/sqrt(1 + delta_max).

use dynadmm::metrics::{c_norm, compute_delta_max, constants_from_stream, CNormContext, DualPair};
use dynadmm::oracle::solve_exact_kkt;
use dynadmm::synth::{quad_family_stream, CouplingKind, QuadFamilyConfig, RngStream};
use dynadmm::Tracker;

fn main() -> dynadmm::Result<()> {
    let rho = 1.0;
    let cfg = QuadFamilyConfig { x_dim: 5, z_dim: 5, eta: 0.0, floor: 1.0, coupling: CouplingKind::NegIdentity };
    let stream = quad_family_stream(&cfg, 120, &mut RngStream::new(5))?;
    let dp = compute_delta_max(&constants_from_stream(&stream)?, rho)?;
    let ctx = CNormContext::new(stream[0].b.clone(), rho)?;
    let u_star = DualPair::of_optimum(&solve_exact_kkt(&stream[0])?);
    let e0 = c_norm(&u_star, &ctx)?;

    let mut tracker = Tracker::new(5, 5, rho)?;
    println!("{:>4} {:>12} {:>12}", "k", "error", "bound");
    for (i, inst) in stream.iter().enumerate() {
        let k = (i + 1) as f64;
        let e = c_norm(&DualPair::of_state(tracker.advance(inst)?).sub(&u_star), &ctx)?;
        if (i + 1) % 10 == 0 {
            println!("{:>4} {e:>12.3e} {:>12.3e}", i + 1, (1.0 + dp.delta_max).powf(-k / 2.0) * e0);
        }
    }
    Ok(())
}
