use std::path::Path;

use super::{emit, model, oracle_failure, run_trials, trial_seed, RunConfig, RunError, RunOptions, RunReport, Table, Violation};
use crate::metrics::{
    audit_run, compute_delta_max, constants_from_stream, steady_state_bounds, trailing_window_len, CNormContext,
    SteadyStateBounds, TrajectoryRecord, MARGIN_TOL,
};
use crate::oracle::solve_exact_kkt;
use crate::solver::Tracker;
use crate::synth::{quad_family_stream, CouplingKind, QuadFamilyConfig, RngStream};

pub const SUMMARY_COLUMNS: [&str; 16] = [
    "delta_max",
    "d_max",
    "bound_u_c",
    "bound_x",
    "bound_z",
    "bound_lambda",
    "tail_max_u_c",
    "tail_max_x",
    "tail_max_z",
    "tail_max_lambda",
    "min_prop1_margin",
    "min_thm1_margin",
    "min_thm2_x_margin",
    "min_thm2_z_margin",
    "min_thm2_lambda_margin",
    "window",
];

struct BoundsTrial {
    records: Vec<TrajectoryRecord>,
    summary: Vec<Option<f64>>,
    violations: Vec<Violation>,
    max_step_residual: f64,
}

fn min_of(it: impl Iterator<Item = f64>) -> Option<f64> {
    it.fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
}

fn bounds_trial(cfg: &RunConfig, trial: usize) -> Result<BoundsTrial, RunError> {
    let seed = trial_seed(cfg.seed, trial);
    let family = QuadFamilyConfig { x_dim: cfg.p, z_dim: cfg.p, eta: cfg.eta, floor: cfg.eps, coupling: CouplingKind::NegIdentity };
    let stream = quad_family_stream(&family, cfg.steps, &mut RngStream::new(seed)).map_err(model(trial))?;
    let consts = constants_from_stream(&stream).map_err(model(trial))?;
    let dp = compute_delta_max(&consts, cfg.rho).map_err(model(trial))?;
    let ctx = CNormContext::new(stream[0].b.clone(), cfg.rho).map_err(model(trial))?;

    let mut tracker = Tracker::new(cfg.p, cfg.p, cfg.rho).map_err(model(trial))?;
    let mut states = Vec::with_capacity(stream.len());
    let mut optima = Vec::with_capacity(stream.len());
    let mut worst = 0.0f64;
    for inst in &stream {
        let (state, audit) = tracker.advance_audited(inst).map_err(model(trial))?;
        worst = worst.max(audit.worst());
        states.push(state.clone());
        optima.push(solve_exact_kkt(inst).map_err(oracle_failure(trial, inst.k))?);
    }
    let records = audit_run(&stream, &states, &optima, &consts, dp.delta_max, &ctx).map_err(model(trial))?;

    let mut violations = Vec::new();
    for r in &records {
        let margins = [
            ("proposition 1", Some(r.prop1_margin)),
            ("theorem 1", r.thm1_margin),
            ("theorem 2 (x)", r.thm2_x_margin),
            ("theorem 2 (z)", Some(r.thm2_z_margin)),
            ("theorem 2 (lambda)", Some(r.thm2_lambda_margin)),
        ];
        for (what, m) in margins {
            if let Some(m) = m.filter(|&m| !(m >= -MARGIN_TOL)) {
                violations.push(Violation { trial, k: Some(r.k), what: what.to_string(), margin: m });
            }
        }
    }

    let d_max = records.iter().filter_map(|r| r.drift).fold(0.0, f64::max);
    let b = steady_state_bounds(d_max, dp.delta_max, &consts, cfg.rho).map_err(model(trial))?;
    let window = trailing_window_len(records.len());
    // A window covering the whole run would include the start-up transient.
    let tail = (window < records.len()).then(|| &records[records.len() - window..]);
    let tail_max = |f: fn(&TrajectoryRecord) -> f64| tail.map(|t| t.iter().map(f).fold(0.0, f64::max));
    let maxima = [tail_max(|r| r.err_u_c), tail_max(|r| r.err_x), tail_max(|r| r.err_z), tail_max(|r| r.err_lambda)];
    let SteadyStateBounds { u_c, x, z, lambda } = b;
    for ((what, bound), max) in [("limsup u_c", u_c), ("limsup x", x), ("limsup z", z), ("limsup lambda", lambda)].into_iter().zip(maxima) {
        if let Some(max) = max.filter(|&m| !(m <= bound)) {
            violations.push(Violation { trial, k: None, what: what.to_string(), margin: bound - max });
        }
    }

    let summary = vec![
        Some(dp.delta_max),
        Some(d_max),
        Some(u_c),
        Some(x),
        Some(z),
        Some(lambda),
        maxima[0],
        maxima[1],
        maxima[2],
        maxima[3],
        min_of(records.iter().map(|r| r.prop1_margin)),
        min_of(records.iter().filter_map(|r| r.thm1_margin)),
        min_of(records.iter().filter_map(|r| r.thm2_x_margin)),
        min_of(records.iter().map(|r| r.thm2_z_margin)),
        min_of(records.iter().map(|r| r.thm2_lambda_margin)),
        tail.map(|_| window as f64),
    ];
    Ok(BoundsTrial { records, summary, violations, max_step_residual: worst })
}

/// Audits every step of every seed on the quadratic family.
///
/// Trial `t` uses seed `seed + t`. `bounds.csv` holds per-step trial means of the errors and drift and
/// per-step trial minima of the margins; `bounds_summary.csv` holds one row per
/// trial with δ_max, the drift bound, the steady-state bounds, the
/// trailing-window maxima they cap, and the smallest margin of each kind.
pub fn run_bounds(cfg: &RunConfig, dir: &Path, opts: RunOptions) -> Result<RunReport, RunError> {
    let trials = run_trials(cfg.trials, opts.jobs, |t| bounds_trial(cfg, t))?;
    let mut report = RunReport {
        max_step_residual: trials.iter().map(|t| t.max_step_residual).fold(0.0, f64::max),
        violations: trials.iter().flat_map(|t| t.violations.iter().cloned()).collect(),
        ..RunReport::default()
    };

    let n = trials.len() as f64;
    let mut table = Table::new(&["err_x", "err_u_c", "drift", "prop1_margin", "thm1_margin", "thm2_x_margin"]);
    for i in 0..cfg.steps {
        let recs: Vec<&TrajectoryRecord> = trials.iter().map(|t| &t.records[i]).collect();
        let mean = |f: fn(&TrajectoryRecord) -> f64| Some(recs.iter().map(|r| f(r)).sum::<f64>() / n);
        let drift = (i > 0).then(|| recs.iter().filter_map(|r| r.drift).sum::<f64>() / n);
        table.push(
            i + 1,
            vec![
                mean(|r| r.err_x),
                mean(|r| r.err_u_c),
                drift,
                min_of(recs.iter().map(|r| r.prop1_margin)),
                min_of(recs.iter().filter_map(|r| r.thm1_margin)),
                min_of(recs.iter().filter_map(|r| r.thm2_x_margin)),
            ],
        );
    }
    emit(&table, dir, "bounds", &format!("bounds audit, eta = {}", cfg.eta), opts, &mut report)?;

    let mut summary = Table::with_index("trial", &SUMMARY_COLUMNS);
    for (t, tr) in trials.iter().enumerate() {
        summary.push(t, tr.summary.clone());
    }
    let path = dir.join("bounds_summary.csv");
    summary.write_csv(&path)?;
    report.files.push(path);
    Ok(report)
}
