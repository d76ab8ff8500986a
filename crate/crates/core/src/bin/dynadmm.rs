use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use dynadmm::experiment::{run, ExperimentKind, RunConfig, RunError, RunOptions};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Which {
    Sharing,
    Lasso,
    Bounds,
}

impl From<Which> for ExperimentKind {
    fn from(w: Which) -> Self {
        match w {
            Which::Sharing => ExperimentKind::Sharing,
            Which::Lasso => ExperimentKind::Lasso,
            Which::Bounds => ExperimentKind::Bounds,
        }
    }
}

/// Dynamic ADMM experiments: tracking on time-varying sharing and LASSO
/// streams, and bound audits on a quadratic family.
#[derive(Debug, Parser)]
#[command(name = "dynadmm", version)]
struct Cli {
    experiment: Which,
    /// key=value file with RunConfig fields.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// One penalty, or a comma-separated sweep.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    rho: Option<Vec<f64>>,
    /// Worker threads (default: one per core).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also write an SVG chart next to each CSV.
    #[arg(long)]
    plot: bool,
}

fn configure(cli: &Cli) -> Result<RunConfig, RunError> {
    let mut cfg = RunConfig::from_file(&cli.config, Some(cli.experiment.into()))?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    if let Some(s) = cli.steps {
        cfg.steps = s;
    }
    match cli.rho.as_deref() {
        Some([single]) => {
            cfg.rho = *single;
            cfg.rho_sweep = None;
        }
        Some(list) => cfg.rho_sweep = Some(list.to_vec()),
        None => {}
    }
    cfg.output_dir = Some(cli.out.clone());
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure(&cli).and_then(|cfg| run(&cfg, &cli.out, RunOptions { jobs: cli.jobs, plot: cli.plot }));
    match result {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            for v in &report.violations {
                match v.k {
                    Some(k) => eprintln!("violation: trial {} step {}: {} margin {:e}", v.trial, k, v.what, v.margin),
                    None => eprintln!("violation: trial {}: {} exceeded by {:e}", v.trial, v.what, -v.margin),
                }
            }
            ExitCode::from(report.exit_code())
        }
        Err(e) => {
            eprintln!("dynadmm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
