//! Seeded multi-trial experiments behind the `dynadmm` binary: tracking on
//! dynamic sharing and LASSO streams, and bound audits on the quadratic family.

mod bounds;
mod config;
mod lasso;
mod output;
mod sharing;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

pub use config::{parse_list, ExperimentKind, RunConfig};
pub use output::{format_float, parse_csv, Table};

use crate::error::Error as ModelError;
use crate::oracle::OracleConfig;

/// Largest subproblem residual (see [`crate::solver::StepAudit`]) tolerated in any run.
pub const STEP_AUDIT_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("oracle failed in trial {trial} at k = {k}: {source}")]
    Oracle {
        trial: usize,
        k: usize,
        #[source]
        source: ModelError,
    },
    #[error("trial {trial}: {source}")]
    Model {
        trial: usize,
        #[source]
        source: ModelError,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl RunError {
    /// Process exit status: 2 for configuration problems, 3 for oracle
    /// failures, 1 for anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Oracle { .. } => 3,
            RunError::Model { .. } | RunError::Io(_) => 1,
        }
    }
}

/// A margin below tolerance, or a trailing-window maximum above its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub trial: usize,
    /// Offending step; `None` for trailing-window comparisons.
    pub k: Option<usize>,
    pub what: String,
    pub margin: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    /// Worst subproblem residual seen at any step of any trial.
    pub max_step_residual: f64,
    pub violations: Vec<Violation>,
}

impl RunReport {
    /// 0 for a clean run, 4 when any audited margin was violated.
    pub fn exit_code(&self) -> u8 {
        if self.violations.is_empty() {
            0
        } else {
            4
        }
    }
}

/// Knobs that do not change results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Worker threads for trials; 0 means one per core.
    pub jobs: usize,
    pub plot: bool,
}

pub fn trial_seed(base: u64, trial: usize) -> u64 {
    base.wrapping_add(trial as u64)
}

pub fn run(cfg: &RunConfig, out_dir: &Path, opts: RunOptions) -> Result<RunReport, RunError> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| RunError::Io(format!("{}: {e}", out_dir.display())))?;
    match cfg.experiment {
        ExperimentKind::Sharing => sharing::run_sharing(cfg, out_dir, opts),
        ExperimentKind::Lasso => lasso::run_lasso(cfg, out_dir, opts),
        ExperimentKind::Bounds => bounds::run_bounds(cfg, out_dir, opts),
    }
}

pub use bounds::run_bounds;
pub use lasso::run_lasso;
pub use sharing::run_sharing;

fn oracle_config() -> OracleConfig {
    OracleConfig::default()
}

/// Runs `f` for every trial on at most `jobs` threads and returns results in trial order.
/// The first failing trial (by index) wins.
fn run_trials<T, F>(trials: usize, jobs: usize, f: F) -> Result<Vec<T>, RunError>
where
    T: Send,
    F: Fn(usize) -> Result<T, RunError> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| RunError::Config(format!("cannot start {jobs} workers: {e}")))?;
    let results: Vec<Result<T, RunError>> = pool.install(|| (0..trials).into_par_iter().map(&f).collect());
    results.into_iter().collect()
}

/// Per-step mean over trials, accumulated in trial order.
fn mean_over_trials(per_trial: &[Vec<f64>]) -> Vec<f64> {
    let steps = per_trial.first().map_or(0, Vec::len);
    let mut acc = vec![0.0; steps];
    for series in per_trial {
        for (a, v) in acc.iter_mut().zip(series) {
            *a += v;
        }
    }
    acc.iter().map(|a| a / per_trial.len() as f64).collect()
}

fn emit(table: &Table, dir: &Path, stem: &str, title: &str, opts: RunOptions, report: &mut RunReport) -> Result<(), RunError> {
    let csv = dir.join(format!("{stem}.csv"));
    table.write_csv(&csv)?;
    report.files.push(csv);
    if opts.plot {
        let svg = dir.join(format!("{stem}.svg"));
        table.write_svg(&svg, title)?;
        report.files.push(svg);
    }
    Ok(())
}

fn model(trial: usize) -> impl Fn(ModelError) -> RunError {
    move |source| RunError::Model { trial, source }
}

fn oracle_failure(trial: usize, k: usize) -> impl Fn(ModelError) -> RunError {
    move |source| RunError::Oracle { trial, k, source }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(RunError::Config("x".into()).exit_code(), 2);
        let source = ModelError::Convergence { iterations: 1, residual: 1.0 };
        assert_eq!(RunError::Oracle { trial: 0, k: 1, source: source.clone() }.exit_code(), 3);
        assert_eq!(RunError::Model { trial: 0, source }.exit_code(), 1);
        let mut report = RunReport::default();
        assert_eq!(report.exit_code(), 0);
        report.violations.push(Violation { trial: 0, k: Some(3), what: "theorem 1".into(), margin: -1.0 });
        assert_eq!(report.exit_code(), 4);
    }

    #[test]
    fn mean_is_per_step() {
        let m = mean_over_trials(&[vec![1.0, 2.0], vec![3.0, 6.0]]);
        assert_eq!(m, vec![2.0, 4.0]);
    }

    #[test]
    fn trials_come_back_in_order() {
        let out = run_trials(20, 3, |t| Ok(t * t)).unwrap();
        assert_eq!(out, (0..20).map(|t| t * t).collect::<Vec<_>>());
        let err = run_trials(10, 2, |t| if t >= 4 { Err(RunError::Io(format!("{t}"))) } else { Ok(t) }).unwrap_err();
        assert!(matches!(err, RunError::Io(m) if m == "4"));
    }
}
