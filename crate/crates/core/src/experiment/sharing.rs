use std::path::Path;

use super::{emit, mean_over_trials, model, oracle_config, oracle_failure, run_trials, trial_seed, RunConfig, RunError, RunOptions, RunReport, Table};
use crate::oracle::{solve_static_admm_from, OptimalTriple};
use crate::solver::{AdmmState, Tracker};
use crate::synth::{SharingStream, SharingStreamConfig};

struct SharingTrial {
    /// `err[r][k−1]` for penalty `r`.
    err: Vec<Vec<f64>>,
    max_step_residual: f64,
}

fn sharing_trial(cfg: &RunConfig, trial: usize) -> Result<SharingTrial, RunError> {
    let stream_cfg = SharingStreamConfig { n: cfg.n, p: cfg.p, eta: cfg.eta, eps: cfg.eps, gamma: cfg.gamma };
    let mut stream = SharingStream::new(stream_cfg, trial_seed(cfg.seed, trial)).map_err(model(trial))?;
    let rhos = cfg.rhos();
    let mut trackers = rhos
        .iter()
        .map(|&rho| Tracker::new(cfg.n * cfg.p, cfg.p, rho))
        .collect::<Result<Vec<_>, _>>()
        .map_err(model(trial))?;
    let oracle = oracle_config();
    let mut err = vec![Vec::with_capacity(cfg.steps); rhos.len()];
    let mut warm: Option<OptimalTriple> = None;
    let mut worst = 0.0f64;
    for k in 1..=cfg.steps {
        let inst = stream.next_problem().and_then(|p| p.assemble(k)).map_err(model(trial))?;
        let start = warm.as_ref().map_or_else(|| AdmmState::zeros_for(&inst), |w| w.as_state(k - 1));
        let opt = solve_static_admm_from(&inst, &oracle, &start).map_err(oracle_failure(trial, k))?;
        for (tracker, series) in trackers.iter_mut().zip(&mut err) {
            let (state, audit) = tracker.advance_audited(&inst).map_err(model(trial))?;
            series.push((&state.x - &opt.x_star).norm());
            worst = worst.max(audit.worst());
        }
        warm = Some(opt);
    }
    Ok(SharingTrial { err, max_step_residual: worst })
}

/// Trial-averaged `‖x_k − x_k*‖` per step, one file per penalty.
///
/// Writes `sharing.csv`, or `sharing_rho_{ρ}.csv` per value when `rho_sweep` is set.
pub fn run_sharing(cfg: &RunConfig, dir: &Path, opts: RunOptions) -> Result<RunReport, RunError> {
    let trials = run_trials(cfg.trials, opts.jobs, |t| sharing_trial(cfg, t))?;
    let mut report = RunReport {
        max_step_residual: trials.iter().map(|t| t.max_step_residual).fold(0.0, f64::max),
        ..RunReport::default()
    };
    for (r, rho) in cfg.rhos().into_iter().enumerate() {
        let per_trial: Vec<Vec<f64>> = trials.iter().map(|t| t.err[r].clone()).collect();
        let mut table = Table::new(&["err_x"]);
        for (i, v) in mean_over_trials(&per_trial).into_iter().enumerate() {
            table.push(i + 1, vec![Some(v)]);
        }
        let stem = if cfg.rho_sweep.is_some() { format!("sharing_rho_{rho}") } else { "sharing".to_string() };
        emit(&table, dir, &stem, &format!("sharing, rho = {rho}"), opts, &mut report)?;
    }
    Ok(report)
}
