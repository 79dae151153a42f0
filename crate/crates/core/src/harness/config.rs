use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::envs::{
    build_env, default_tail_cap, lower_bound_env, make_prop2_covariance, BanditEnv, Dgp, EnvSource,
};
use crate::error::{Error, Result};
use crate::policies::PolicySpec;
use crate::rng::{stream, Stream, GENERATOR};
use crate::spectrum::BenignFamily;

/// Experiment dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Setup {
    /// Number of arms.
    pub k: usize,
    /// Context dimension (ignored by the benign families, which fix their own).
    pub p: usize,
    /// Horizon.
    pub t: usize,
}

/// One environment family of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DgpSpec {
    Dgp1,
    Dgp2,
    Dgp3,
    Dgp4,
    Example1 {
        a: f64,
        #[serde(default)]
        tail_cap: Option<usize>,
    },
    Example2 {
        b: f64,
        c: f64,
    },
    /// Three arms differing only in the first coefficient; the gap is tuned to
    /// an exploration length `t0` (default `N*·K` of the family).
    LowerBound {
        family: BenignFamily,
        #[serde(default)]
        t0: Option<usize>,
        #[serde(default)]
        tail_cap: Option<usize>,
    },
}

impl DgpSpec {
    pub fn label(&self) -> &'static str {
        match self {
            DgpSpec::Dgp1 => "dgp1",
            DgpSpec::Dgp2 => "dgp2",
            DgpSpec::Dgp3 => "dgp3",
            DgpSpec::Dgp4 => "dgp4",
            DgpSpec::Example1 { .. } => "example1",
            DgpSpec::Example2 { .. } => "example2",
            DgpSpec::LowerBound { .. } => "lower_bound",
        }
    }

    fn family(&self) -> Option<BenignFamily> {
        match *self {
            DgpSpec::Example1 { a, .. } => Some(BenignFamily::Example1 { a }),
            DgpSpec::Example2 { b, c } => Some(BenignFamily::Example2 { b, c }),
            DgpSpec::LowerBound { family, .. } => Some(family),
            _ => None,
        }
    }

    /// The exploration length `N*·K` when the spectrum is a benign family.
    pub fn optimal_t0(&self, setup: &Setup) -> Result<Option<usize>> {
        if let DgpSpec::LowerBound { t0: Some(t0), .. } = *self {
            return Ok(Some(t0));
        }
        match self.family() {
            Some(f) => Ok(Some(f.optimal_exploration(setup.t, setup.k)? * setup.k)),
            None => Ok(None),
        }
    }

    /// Builds the environment for one repetition from `seed`'s env stream.
    pub fn build(&self, setup: &Setup, noise_var: f64, seed: u64) -> Result<BanditEnv> {
        let source = match *self {
            DgpSpec::Dgp1 => EnvSource::Dgp(Dgp::Dgp1),
            DgpSpec::Dgp2 => EnvSource::Dgp(Dgp::Dgp2),
            DgpSpec::Dgp3 => EnvSource::Dgp(Dgp::Dgp3),
            DgpSpec::Dgp4 => EnvSource::Dgp(Dgp::Dgp4),
            DgpSpec::Example1 { a, tail_cap } => EnvSource::Family {
                family: BenignFamily::Example1 { a },
                tail_cap,
            },
            DgpSpec::Example2 { b, c } => EnvSource::Family {
                family: BenignFamily::Example2 { b, c },
                tail_cap: None,
            },
            DgpSpec::LowerBound {
                family, tail_cap, ..
            } => {
                let t0 = self.optimal_t0(setup)?.expect("lower bound has a family");
                let cap = tail_cap.unwrap_or_else(|| default_tail_cap(setup.p, setup.t));
                let base = make_prop2_covariance(&family, setup.t, cap)?;
                return lower_bound_env(&family, t0, setup.t, &base, noise_var);
            }
        };
        build_env(
            &source,
            setup.k,
            setup.p,
            setup.t,
            noise_var,
            &mut stream(seed, Stream::Env),
        )
    }
}

impl fmt::Display for DgpSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn default_reps() -> usize {
    10
}
fn default_noise_var() -> f64 {
    0.01
}
fn default_rng() -> String {
    GENERATOR.to_string()
}

/// A complete experiment, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_noise_var")]
    pub noise_var: f64,
    /// Share one environment across repetitions instead of redrawing it.
    #[serde(default)]
    pub fixed_env: bool,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_rng")]
    pub rng: String,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Project each `θ⁽ⁱ⁾` onto the ball of this radius.
    #[serde(default)]
    pub theta_bound: Option<f64>,
    pub setup: Setup,
    pub dgp: Vec<DgpSpec>,
    pub policy: Vec<PolicySpec>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let Setup { k, p, t } = self.setup;
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if k == 0 || p == 0 || t < k {
            return Err(Error::Config(format!(
                "setup needs K >= 1, p >= 1 and T >= K, got K = {k}, p = {p}, T = {t}"
            )));
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(Error::Config(format!(
                "noise_var must be >= 0, got {}",
                self.noise_var
            )));
        }
        if self.rng != GENERATOR {
            return Err(Error::Config(format!(
                "unsupported rng {:?}; only {GENERATOR:?} is available",
                self.rng
            )));
        }
        if let Some(b) = self.theta_bound {
            if !(b > 0.0) {
                return Err(Error::Config(format!(
                    "theta_bound must be positive, got {b}"
                )));
            }
        }
        if self.dgp.is_empty() {
            return Err(Error::Config("no [[dgp]] entries".into()));
        }
        if self.policy.is_empty() {
            return Err(Error::Config("no [[policy]] entries".into()));
        }
        let mut seen = HashSet::new();
        for d in &self.dgp {
            if !seen.insert(d.label()) {
                return Err(Error::Config(format!("dgp {d} listed twice")));
            }
            if let Some(f) = d.family() {
                f.validate().map_err(|e| Error::Config(e.to_string()))?;
            }
            if matches!(d, DgpSpec::LowerBound { .. }) && k != 3 {
                return Err(Error::Config(format!(
                    "lower_bound needs K = 3, got K = {k}"
                )));
            }
            if let DgpSpec::LowerBound { .. } = d {
                let t0 = d
                    .optimal_t0(&self.setup)
                    .map_err(|e| Error::Config(format!("{d}: {e}")))?
                    .unwrap_or(0);
                if t0 < k || t0 >= t {
                    return Err(Error::Config(format!("{d}: t0 = {t0} must lie in [K, T)")));
                }
            }
        }
        let mut labels = HashSet::new();
        for pol in &self.policy {
            if !labels.insert(pol.label()) {
                return Err(Error::Config(format!(
                    "policy {} listed twice",
                    pol.label()
                )));
            }
        }
        Ok(())
    }
}
