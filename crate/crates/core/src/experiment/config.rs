//! Flat `key=value` run configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Sharing,
    Lasso,
    Bounds,
}

impl FromStr for ExperimentKind {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        match s {
            "sharing" => Ok(Self::Sharing),
            "lasso" => Ok(Self::Lasso),
            "bounds" => Ok(Self::Bounds),
            other => Err(RunError::Config(format!("unknown experiment `{other}`"))),
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sharing => "sharing",
            Self::Lasso => "lasso",
            Self::Bounds => "bounds",
        })
    }
}

/// Everything a run needs. Counts and scalars not used by an experiment are ignored.
///
/// For `bounds`, `p` is the dimension of both `x` and `z` and `eps` the
/// eigenvalue floor of the quadratic terms.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub q: usize,
    pub eta: f64,
    pub eps: f64,
    pub gamma: f64,
    pub rho: f64,
    pub sigma: f64,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
    pub rho_sweep: Option<Vec<f64>>,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults for each experiment.
    pub fn defaults(experiment: ExperimentKind) -> Self {
        let base = Self {
            experiment,
            n: 20,
            p: 5,
            m: 10,
            q: 2,
            eta: 0.2,
            eps: 1.0,
            gamma: 1.0,
            rho: 1.0,
            sigma: 0.1,
            steps: 60,
            trials: 100,
            seed: 0,
            rho_sweep: None,
            output_dir: None,
        };
        match experiment {
            ExperimentKind::Sharing => base,
            ExperimentKind::Lasso => Self { p: 30, eta: 0.01, gamma: 0.2, steps: 100, ..base },
            ExperimentKind::Bounds => Self { steps: 500, trials: 20, ..base },
        }
    }

    /// Parses `key=value` lines; blank lines and `#` comments are skipped.
    /// `experiment` picks the defaults and may be omitted when `fallback` is given.
    pub fn parse(text: &str, fallback: Option<ExperimentKind>) -> Result<Self, RunError> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| RunError::Config(format!("line {}: expected key=value", lineno + 1)))?;
            pairs.push((lineno + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let declared = pairs
            .iter()
            .find(|(_, k, _)| k == "experiment")
            .map(|(_, _, v)| v.parse::<ExperimentKind>())
            .transpose()?;
        let kind = match (declared, fallback) {
            (Some(d), Some(f)) if d != f => {
                return Err(RunError::Config(format!("config declares experiment `{d}` but `{f}` was requested")))
            }
            (Some(d), _) => d,
            (None, Some(f)) => f,
            (None, None) => return Err(RunError::Config("no experiment given".into())),
        };
        let mut cfg = Self::defaults(kind);
        for (lineno, k, v) in pairs {
            cfg.set(&k, &v).map_err(|e| match e {
                RunError::Config(msg) => RunError::Config(format!("line {lineno}: {msg}")),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path, fallback: Option<ExperimentKind>) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, fallback)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), RunError> {
        match key {
            "experiment" => self.experiment = value.parse()?,
            "n" => self.n = num(key, value)?,
            "p" => self.p = num(key, value)?,
            "m" => self.m = num(key, value)?,
            "q" => self.q = num(key, value)?,
            "eta" | "η" => self.eta = num(key, value)?,
            "eps" | "ε" => self.eps = num(key, value)?,
            "gamma" | "γ" => self.gamma = num(key, value)?,
            "rho" | "ρ" => self.rho = num(key, value)?,
            "sigma" | "σ" => self.sigma = num(key, value)?,
            "steps" => self.steps = num(key, value)?,
            "trials" => self.trials = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "rho_sweep" => self.rho_sweep = Some(parse_list(value)?),
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            other => return Err(RunError::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Penalties to run: the sweep if set, otherwise `rho` alone.
    pub fn rhos(&self) -> Vec<f64> {
        self.rho_sweep.clone().unwrap_or_else(|| vec![self.rho])
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |msg: String| Err(RunError::Config(msg));
        if self.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        for rho in self.rhos() {
            if !(rho > 0.0 && rho.is_finite()) {
                return bad(format!("ρ must be positive, got {rho}"));
            }
        }
        if matches!(&self.rho_sweep, Some(s) if s.is_empty()) {
            return bad("rho_sweep is empty".into());
        }
        if self.rho_sweep.is_some() && self.experiment != ExperimentKind::Sharing {
            return bad(format!("rho_sweep is only supported for sharing, not {}", self.experiment));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return bad(format!("η must be nonnegative, got {}", self.eta));
        }
        match self.experiment {
            ExperimentKind::Sharing => {
                if self.n == 0 || self.p == 0 {
                    return bad("sharing needs n ≥ 1 and p ≥ 1".into());
                }
                positive("ε", self.eps)?;
                positive("γ", self.gamma)?;
            }
            ExperimentKind::Lasso => {
                if self.m == 0 || self.p == 0 {
                    return bad("lasso needs m ≥ 1 and p ≥ 1".into());
                }
                if self.q > self.p {
                    return bad(format!("support size q = {} exceeds p = {}", self.q, self.p));
                }
                positive("γ", self.gamma)?;
                if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
                    return bad(format!("σ must be nonnegative, got {}", self.sigma));
                }
            }
            ExperimentKind::Bounds => {
                if self.p == 0 {
                    return bad("bounds needs p ≥ 1".into());
                }
                positive("ε", self.eps)?;
            }
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<(), RunError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(RunError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, RunError> {
    value
        .parse()
        .map_err(|_| RunError::Config(format!("bad value `{value}` for `{key}`")))
}

/// Comma-separated list of floats.
pub fn parse_list(value: &str) -> Result<Vec<f64>, RunError> {
    value.split(',').map(|s| num("rho_sweep", s.trim())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_key() {
        let text = "experiment = lasso\n# comment\nn=3\np=12\nm=4\nq=1\nη=0.05\neps=2\ngamma=0.3\nrho=0.5\nσ=0\nsteps=7\ntrials=2\nseed=9\noutput_dir=out # trailing\n";
        let c = RunConfig::parse(text, None).unwrap();
        assert_eq!(c.experiment, ExperimentKind::Lasso);
        assert_eq!((c.n, c.p, c.m, c.q, c.steps, c.trials, c.seed), (3, 12, 4, 1, 7, 2, 9));
        assert_eq!((c.eta, c.eps, c.gamma, c.rho, c.sigma), (0.05, 2.0, 0.3, 0.5, 0.0));
        assert_eq!(c.output_dir, Some(PathBuf::from("out")));
        c.validate().unwrap();
    }

    #[test]
    fn defaults_follow_experiment() {
        let s = RunConfig::parse("", Some(ExperimentKind::Sharing)).unwrap();
        assert_eq!((s.n, s.p, s.eta, s.gamma, s.steps, s.trials), (20, 5, 0.2, 1.0, 60, 100));
        let l = RunConfig::parse("", Some(ExperimentKind::Lasso)).unwrap();
        assert_eq!((l.m, l.p, l.q, l.gamma, l.sigma, l.steps), (10, 30, 2, 0.2, 0.1, 100));
        let b = RunConfig::parse("", Some(ExperimentKind::Bounds)).unwrap();
        assert_eq!((b.p, b.steps, b.trials), (5, 500, 20));
    }

    #[test]
    fn rejects_bad_input() {
        let err = |t: &str| RunConfig::parse(t, Some(ExperimentKind::Sharing)).unwrap_err();
        assert!(matches!(err("bogus=1"), RunError::Config(m) if m.contains("unknown key `bogus`")));
        assert!(matches!(err("n=x"), RunError::Config(_)));
        assert!(matches!(err("just words"), RunError::Config(_)));
        assert!(matches!(err("experiment=lasso"), RunError::Config(_)));
        assert!(matches!(RunConfig::parse("", None), Err(RunError::Config(_))));
        for t in ["steps=0", "trials=0", "rho=0", "rho_sweep=1,-1", "eta=-1", "eps=0"] {
            let c = RunConfig::parse(t, Some(ExperimentKind::Sharing)).unwrap();
            assert!(c.validate().is_err(), "{t}");
        }
        let c = RunConfig::parse("q=40", Some(ExperimentKind::Lasso)).unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::parse("rho_sweep=0.1,1", Some(ExperimentKind::Lasso)).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn sweep_list() {
        let c = RunConfig::parse("rho_sweep = 0.01, 0.1,1", Some(ExperimentKind::Sharing)).unwrap();
        assert_eq!(c.rhos(), vec![0.01, 0.1, 1.0]);
    }
}
