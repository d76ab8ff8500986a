//! Dynamic LASSO: online estimate vs offline optimum vs ground truth, and the
//! support recovered by each.

use dynadmm::metrics::sparsity_deviation;
use dynadmm::oracle::{solve_static_admm_from, OracleConfig};
use dynadmm::synth::{LassoStream, LassoStreamConfig};
use dynadmm::{AdmmState, Tracker};

fn main() -> dynadmm::Result<()> {
    let cfg = LassoStreamConfig { m: 10, p: 30, q: 2, eta: 0.01, sigma: 0.1, gamma: 0.2 };
    let mut stream = LassoStream::new(cfg, 3)?;
    let mut tracker = Tracker::new(cfg.p, cfg.p, 1.0)?;
    let oracle = OracleConfig::default();
    let mut warm: Option<AdmmState> = None;
    println!("true support: {:?}", stream.support());

    println!("{:>3} {:>9} {:>9} {:>9} {:>9} {:>9}", "k", "x-x*", "x-truth", "x*-truth", "off(x)", "off(x*)");
    for k in 1..=60 {
        let slice = stream.next_slice()?;
        let inst = slice.problem.assemble(k)?;
        let start = warm.take().unwrap_or_else(|| AdmmState::zeros_for(&inst));
        let opt = solve_static_admm_from(&inst, &oracle, &start)?;
        let x = tracker.advance(&inst)?.x.clone();
        let truth = slice.truth.values();
        if k % 10 == 0 {
            println!(
                "{k:>3} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
                (&x - &opt.x_star).norm(),
                (&x - truth).norm(),
                (&opt.x_star - truth).norm(),
                sparsity_deviation(&x, slice.truth.support())?,
                sparsity_deviation(&opt.x_star, slice.truth.support())?,
            );
        }
        warm = Some(opt.as_state(k));
    }
    Ok(())
}
