//! Compare penalties on the same sharing streams through the experiment harness.

use dynadmm::experiment::{parse_csv, run, ExperimentKind, RunConfig, RunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig {
        trials: 20,
        rho_sweep: Some(vec![0.01, 0.1, 1.0]),
        ..RunConfig::defaults(ExperimentKind::Sharing)
    };
    let dir = std::env::temp_dir().join("dynadmm_rho_sweep");
    run(&cfg, &dir, RunOptions::default())?;

    for rho in cfg.rhos() {
        let table = parse_csv(&std::fs::read_to_string(dir.join(format!("sharing_rho_{rho}.csv")))?)?;
        let err: Vec<f64> = table.column("err_x").unwrap().into_iter().flatten().collect();
        let tail = &err[err.len() - 20..];
        println!("rho = {rho:<5} err_x[5] = {:.4}  final-20 mean = {:.4}", err[4], tail.iter().sum::<f64>() / 20.0);
    }
    println!("csv files in {}", dir.display());
    Ok(())
}
