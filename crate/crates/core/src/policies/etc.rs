use nalgebra::DVector;

use super::lasso::lasso_coordinate_descent;
use super::{fit_all_min_norm, round_robin_arm, ArmHistory, CommittedModel, Policy};
use crate::envs::RoundSample;
use crate::error::{Error, Result};
use crate::interpolate::FitOptions;

const LASSO_TOL: f64 = 1e-8;
const LASSO_MAX_ITER: usize = 10_000;

/// How per-arm parameters are estimated at commit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CommitFit {
    MinNorm,
    /// Lasso with a fixed penalty, or `σ·sqrt(2 log p / N)` when `penalty` is `None`.
    Lasso {
        penalty: Option<f64>,
        noise_sd: f64,
    },
}

impl CommitFit {
    pub fn lasso(penalty: Option<f64>, noise_sd: f64) -> Self {
        CommitFit::Lasso { penalty, noise_sd }
    }

    fn fit(&self, history: &ArmHistory) -> Result<CommittedModel> {
        match *self {
            CommitFit::MinNorm => fit_all_min_norm(history, &FitOptions::default()),
            CommitFit::Lasso { penalty, noise_sd } => {
                let thetas = (0..history.arms())
                    .map(|arm| {
                        let data = history.design(arm).map_err(|e| Error::Fit {
                            arm,
                            source: Box::new(e),
                        })?;
                        let penalty = penalty.unwrap_or_else(|| {
                            noise_sd * (2.0 * (data.p() as f64).ln() / data.n() as f64).sqrt()
                        });
                        let fit =
                            lasso_coordinate_descent(&data, penalty, LASSO_TOL, LASSO_MAX_ITER)
                                .map_err(|e| Error::Fit {
                                    arm,
                                    source: Box::new(e),
                                })?;
                        if !fit.converged {
                            log::warn!("lasso for arm {arm} stopped at {} sweeps", fit.iterations);
                        }
                        Ok(fit.theta)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(CommittedModel { thetas })
            }
        }
    }
}

/// ESTC exploration default: `T^{2/3}` rounded up to a multiple of `K`.
pub(crate) fn default_estc_t0(arms: usize, horizon: usize) -> usize {
    let raw = (horizon as f64).powf(2.0 / 3.0).ceil() as usize;
    (raw.div_ceil(arms) * arms).max(arms).min(horizon)
}

/// Explore-then-commit: round-robin for `t0` rounds, fit every arm after
/// round `t0`, then play greedily.
#[derive(Debug, Clone)]
pub struct EtcPolicy {
    name: &'static str,
    arms: usize,
    t0: usize,
    fit: CommitFit,
    history: ArmHistory,
    committed: Option<CommittedModel>,
}

impl EtcPolicy {
    pub fn new(arms: usize, dim: usize, t0: usize, fit: CommitFit) -> Result<Self> {
        if arms == 0 || t0 == 0 {
            return Err(Error::Config(format!(
                "explore-then-commit needs K >= 1 and t0 >= 1, got K = {arms}, t0 = {t0}"
            )));
        }
        if !t0.is_multiple_of(arms) {
            log::debug!("t0 = {t0} is not a multiple of K = {arms}");
        }
        let name = match fit {
            CommitFit::MinNorm => "etc",
            CommitFit::Lasso { .. } => "estc",
        };
        Ok(EtcPolicy {
            name,
            arms,
            t0,
            fit,
            history: ArmHistory::new(arms, dim),
            committed: None,
        })
    }

    pub fn t0(&self) -> usize {
        self.t0
    }

    pub fn history(&self) -> &ArmHistory {
        &self.history
    }

    pub fn committed(&self) -> Option<&CommittedModel> {
        self.committed.as_ref()
    }
}

impl Policy for EtcPolicy {
    fn name(&self) -> &str {
        self.name
    }

    fn select(&mut self, t: usize, round: &RoundSample) -> Result<usize> {
        Ok(match &self.committed {
            Some(model) => model.choose(round),
            None => round_robin_arm(t, self.arms),
        })
    }

    fn observe(&mut self, t: usize, arm: usize, context: &DVector<f64>, reward: f64) -> Result<()> {
        if self.committed.is_some() {
            return Ok(());
        }
        self.history.push(arm, context, reward)?;
        if t == self.t0 {
            self.committed = Some(self.fit.fit(&self.history)?);
        }
        Ok(())
    }

    fn commit_round(&self) -> Option<usize> {
        self.committed.as_ref().map(|_| self.t0)
    }
}
