use std::path::Path;

use super::{emit, mean_over_trials, model, oracle_config, oracle_failure, run_trials, trial_seed, RunConfig, RunError, RunOptions, RunReport, Table};
use crate::metrics::sparsity_deviation;
use crate::oracle::{solve_static_admm_from, OptimalTriple};
use crate::solver::{AdmmState, Tracker};
use crate::synth::{LassoStream, LassoStreamConfig};

const COLUMNS: [&str; 5] = ["err_x", "err_x_truth", "err_oracle_truth", "sparsity_admm", "sparsity_oracle"];

/// Steps sampled for the trajectory dump.
pub const TRAJECTORY_EVERY: usize = 10;

struct LassoTrial {
    /// `series[c][k−1]` for column `c` of [`COLUMNS`].
    series: Vec<Vec<f64>>,
    /// Rows `(k, admm₁, admm₂, oracle₁, oracle₂, truth₁, truth₂)`.
    trajectory: Vec<(usize, [f64; 6])>,
    max_step_residual: f64,
}

fn lasso_trial(cfg: &RunConfig, trial: usize) -> Result<LassoTrial, RunError> {
    let stream_cfg = LassoStreamConfig { m: cfg.m, p: cfg.p, q: cfg.q, eta: cfg.eta, sigma: cfg.sigma, gamma: cfg.gamma };
    let mut stream = LassoStream::new(stream_cfg, trial_seed(cfg.seed, trial)).map_err(model(trial))?;
    let mut tracker = Tracker::new(cfg.p, cfg.p, cfg.rho).map_err(model(trial))?;
    let oracle = oracle_config();
    let mut series = vec![Vec::with_capacity(cfg.steps); COLUMNS.len()];
    let mut trajectory = Vec::new();
    let mut warm: Option<OptimalTriple> = None;
    let mut worst = 0.0f64;
    for k in 1..=cfg.steps {
        let slice = stream.next_slice().map_err(model(trial))?;
        let inst = slice.problem.assemble(k).map_err(model(trial))?;
        let start = warm.as_ref().map_or_else(|| AdmmState::zeros_for(&inst), |w| w.as_state(k - 1));
        let opt = solve_static_admm_from(&inst, &oracle, &start).map_err(oracle_failure(trial, k))?;
        let (state, audit) = tracker.advance_audited(&inst).map_err(model(trial))?;
        worst = worst.max(audit.worst());
        let truth = slice.truth.values();
        let support = slice.truth.support();
        let row = [
            (&state.x - &opt.x_star).norm(),
            (&state.x - truth).norm(),
            (&opt.x_star - truth).norm(),
            sparsity_deviation(&state.x, support).map_err(model(trial))?,
            sparsity_deviation(&opt.x_star, support).map_err(model(trial))?,
        ];
        for (s, v) in series.iter_mut().zip(row) {
            s.push(v);
        }
        if k % TRAJECTORY_EVERY == 0 && support.len() >= 2 {
            let (a, b) = (support[0], support[1]);
            trajectory.push((k, [state.x[a], state.x[b], opt.x_star[a], opt.x_star[b], truth[a], truth[b]]));
        }
        warm = Some(opt);
    }
    Ok(LassoTrial { series, trajectory, max_step_residual: worst })
}

/// Trial-averaged tracking, truth-gap and sparsity series (`lasso.csv`) plus
/// the first trial's two support coordinates every tenth step
/// (`lasso_trajectory.csv`, skipped when `q < 2`).
pub fn run_lasso(cfg: &RunConfig, dir: &Path, opts: RunOptions) -> Result<RunReport, RunError> {
    let trials = run_trials(cfg.trials, opts.jobs, |t| lasso_trial(cfg, t))?;
    let mut report = RunReport {
        max_step_residual: trials.iter().map(|t| t.max_step_residual).fold(0.0, f64::max),
        ..RunReport::default()
    };
    let means: Vec<Vec<f64>> = (0..COLUMNS.len())
        .map(|c| mean_over_trials(&trials.iter().map(|t| t.series[c].clone()).collect::<Vec<_>>()))
        .collect();
    let mut table = Table::new(&COLUMNS);
    for i in 0..cfg.steps {
        table.push(i + 1, means.iter().map(|m| Some(m[i])).collect());
    }
    emit(&table, dir, "lasso", &format!("lasso, eta = {}", cfg.eta), opts, &mut report)?;

    if cfg.q >= 2 {
        let mut traj = Table::new(&["admm_1", "admm_2", "oracle_1", "oracle_2", "truth_1", "truth_2"]);
        for (k, vals) in &trials[0].trajectory {
            traj.push(*k, vals.iter().map(|&v| Some(v)).collect());
        }
        emit(&traj, dir, "lasso_trajectory", "support coordinates, trial 0", opts, &mut report)?;
    }
    Ok(report)
}
