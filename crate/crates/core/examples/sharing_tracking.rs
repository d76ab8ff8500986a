//! Track a drifting sharing problem and print the error against the per-step optimum.

use dynadmm::oracle::{solve_static_admm_from, OracleConfig};
use dynadmm::synth::{SharingStream, SharingStreamConfig};
use dynadmm::{AdmmState, Tracker};

fn main() -> dynadmm::Result<()> {
    let cfg = SharingStreamConfig { n: 20, p: 5, eta: 0.2, eps: 1.0, gamma: 1.0 };
    let mut stream = SharingStream::new(cfg, 7)?;
    let mut tracker = Tracker::new(cfg.n * cfg.p, cfg.p, 1.0)?;
    let oracle = OracleConfig::default();
    let mut warm: Option<AdmmState> = None;

    println!("{:>3} {:>12} {:>10}", "k", "|x - x*|", "oracle it");
    for k in 1..=40 {
        let inst = stream.next_problem()?.assemble(k)?;
        let start = warm.take().unwrap_or_else(|| AdmmState::zeros_for(&inst));
        let opt = solve_static_admm_from(&inst, &oracle, &start)?;
        let x = &tracker.advance(&inst)?.x;
        if k <= 5 || k % 5 == 0 {
            println!("{k:>3} {:>12.6} {:>10}", (x - &opt.x_star).norm(), opt.iterations);
        }
        warm = Some(opt.as_state(k));
    }
    Ok(())
}
