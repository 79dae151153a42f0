//! Bandit policies.
//!
//! Rounds are numbered from 1 and arms from 0. A round is played as
//! `select` (sees every arm's context) followed by `observe` (only the chosen
//! arm's reward).

mod aetc;
mod baseline;
mod etc;
mod lasso;
mod linucb;

pub use aetc::{AetcConfig, AetcPolicy, SpectralStop, StoppingRule};
pub use baseline::{OraclePolicy, UniformPolicy};
pub use etc::{CommitFit, EtcPolicy};
pub use lasso::{lasso_coordinate_descent, LassoFit};
pub use linucb::{LinUcbConfig, LinUcbPolicy};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::envs::{argmax_first, RoundSample};
use crate::error::{Error, Result};
use crate::interpolate::{fit_min_norm_or_ols, fit_pseudo_inverse, DesignData, FitOptions};
use crate::rng::{stream, Stream};

pub trait Policy: Send {
    fn name(&self) -> &str;

    /// Chooses an arm for round `t` from all arms' contexts.
    fn select(&mut self, t: usize, round: &RoundSample) -> Result<usize>;

    /// Receives the chosen arm's reward for round `t`.
    fn observe(
        &mut self,
        _t: usize,
        _arm: usize,
        _context: &DVector<f64>,
        _reward: f64,
    ) -> Result<()> {
        Ok(())
    }

    /// Round at which an explore-then-commit policy stopped exploring.
    fn commit_round(&self) -> Option<usize> {
        None
    }
}

/// Round-robin exploration: round `t` (1-based) plays arm `(t - 1) mod K`.
pub fn round_robin_arm(t: usize, arms: usize) -> usize {
    (t - 1) % arms
}

/// Contexts and rewards collected per arm during exploration.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmHistory {
    dim: usize,
    rows: Vec<Vec<f64>>,
    rewards: Vec<Vec<f64>>,
}

impl ArmHistory {
    pub fn new(arms: usize, dim: usize) -> Self {
        ArmHistory {
            dim,
            rows: vec![Vec::new(); arms],
            rewards: vec![Vec::new(); arms],
        }
    }

    pub fn arms(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn push(&mut self, arm: usize, context: &DVector<f64>, reward: f64) -> Result<()> {
        if arm >= self.arms() || context.len() != self.dim {
            return Err(Error::domain(format!(
                "cannot record arm {arm} with a length-{} context",
                context.len()
            )));
        }
        self.rows[arm].extend(context.iter());
        self.rewards[arm].push(reward);
        Ok(())
    }

    pub fn count(&self, arm: usize) -> usize {
        self.rewards[arm].len()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.rewards.iter().map(Vec::len).collect()
    }

    /// First `n` context rows of `arm` as an `n × p` matrix.
    pub fn contexts(&self, arm: usize, n: usize) -> DMatrix<f64> {
        let n = n.min(self.count(arm));
        DMatrix::from_row_slice(n, self.dim, &self.rows[arm][..n * self.dim])
    }

    /// Every observation of `arm`.
    pub fn design(&self, arm: usize) -> Result<DesignData> {
        let n = self.count(arm);
        DesignData::new(
            self.contexts(arm, n),
            DVector::from_column_slice(&self.rewards[arm]),
        )
    }
}

/// Greedy play under fitted per-arm parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CommittedModel {
    pub thetas: Vec<DVector<f64>>,
}

impl CommittedModel {
    /// `argmax_i ⟨X⁽ⁱ⁾(t), θ̂⁽ⁱ⁾⟩`, ties to the smallest index.
    pub fn choose(&self, round: &RoundSample) -> usize {
        let scores: Vec<f64> = round
            .contexts
            .iter()
            .zip(&self.thetas)
            .map(|(x, theta)| x.dot(theta))
            .collect();
        argmax_first(&scores)
    }
}

/// Fits every arm by minimum-norm interpolation. Arms with more draws than
/// dimensions fall back to ordinary least squares, and numerically singular
/// designs to the SVD pseudo-inverse.
pub fn fit_all_min_norm(history: &ArmHistory, opts: &FitOptions) -> Result<CommittedModel> {
    let thetas = (0..history.arms())
        .map(|arm| {
            let wrap = |e| Error::Fit {
                arm,
                source: Box::new(e),
            };
            let data = history.design(arm).map_err(wrap)?;
            match fit_min_norm_or_ols(&data, opts) {
                Ok(fit) => Ok(fit.theta_hat),
                Err(Error::RankDeficient { condition }) => {
                    log::debug!(
                        "arm {arm}: Gram condition {condition:e}, using the pseudo-inverse"
                    );
                    fit_pseudo_inverse(&data).map(|f| f.theta_hat).map_err(wrap)
                }
                Err(e) => Err(wrap(e)),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CommittedModel { thetas })
}

/// A policy and its hyperparameters as written in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum PolicySpec {
    /// Explore-then-commit with a fixed exploration length.
    Etc {
        #[serde(default)]
        t0: Option<usize>,
    },
    /// Adaptive explore-then-commit.
    Aetc {
        #[serde(default = "default_c_t")]
        c_t: f64,
        #[serde(default = "default_growth")]
        checkpoint_growth: f64,
        #[serde(default)]
        min_exploration: Option<usize>,
        #[serde(default = "default_tau")]
        tau: usize,
        #[serde(default)]
        tail_cap: Option<usize>,
    },
    Linucb {
        #[serde(default = "default_one")]
        alpha: f64,
        #[serde(default = "default_one")]
        ridge: f64,
    },
    /// Explore-then-commit with a Lasso fit.
    Estc {
        #[serde(default)]
        t0: Option<usize>,
        #[serde(default)]
        penalty: Option<f64>,
    },
    Uniform {},
    Oracle {},
}

fn default_c_t() -> f64 {
    AetcConfig::default().c_t
}
fn default_growth() -> f64 {
    AetcConfig::default().checkpoint_growth
}
fn default_tau() -> usize {
    AetcConfig::default().tau
}
fn default_one() -> f64 {
    1.0
}

/// What a policy needs to know about the episode it is built for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyContext {
    pub arms: usize,
    pub dim: usize,
    pub horizon: usize,
    pub noise_var: f64,
    pub seed: u64,
    /// Exploration length used by `etc` when its config gives none.
    pub default_t0: Option<usize>,
}

impl PolicySpec {
    pub fn label(&self) -> &'static str {
        match self {
            PolicySpec::Etc { .. } => "etc",
            PolicySpec::Aetc { .. } => "aetc",
            PolicySpec::Linucb { .. } => "linucb",
            PolicySpec::Estc { .. } => "estc",
            PolicySpec::Uniform {} => "uniform",
            PolicySpec::Oracle {} => "oracle",
        }
    }

    pub fn aetc_default() -> Self {
        let d = AetcConfig::default();
        PolicySpec::Aetc {
            c_t: d.c_t,
            checkpoint_growth: d.checkpoint_growth,
            min_exploration: d.min_exploration,
            tau: d.tau,
            tail_cap: d.tail_cap,
        }
    }

    pub fn build(&self, ctx: &PolicyContext) -> Result<Box<dyn Policy>> {
        Ok(match *self {
            PolicySpec::Etc { t0 } => {
                let t0 = t0.or(ctx.default_t0).ok_or_else(|| {
                    Error::Config("etc needs t0 unless the environment fixes one".into())
                })?;
                Box::new(EtcPolicy::new(ctx.arms, ctx.dim, t0, CommitFit::MinNorm)?)
            }
            PolicySpec::Aetc {
                c_t,
                checkpoint_growth,
                min_exploration,
                tau,
                tail_cap,
            } => {
                let cfg = AetcConfig {
                    c_t,
                    checkpoint_growth,
                    min_exploration,
                    tau,
                    tail_cap,
                };
                Box::new(AetcPolicy::new(cfg, ctx.arms, ctx.dim, ctx.horizon)?)
            }
            PolicySpec::Linucb { alpha, ridge } => Box::new(LinUcbPolicy::new(
                LinUcbConfig { alpha, ridge },
                ctx.arms,
                ctx.dim,
            )?),
            PolicySpec::Estc { t0, penalty } => {
                let t0 = t0.unwrap_or_else(|| etc::default_estc_t0(ctx.arms, ctx.horizon));
                let fit = CommitFit::lasso(penalty, ctx.noise_var.sqrt());
                Box::new(EtcPolicy::new(ctx.arms, ctx.dim, t0, fit)?)
            }
            PolicySpec::Uniform {} => {
                Box::new(UniformPolicy::new(stream(ctx.seed, Stream::Policy)))
            }
            PolicySpec::Oracle {} => Box::new(OraclePolicy),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_robin_sequence() {
        let arms: Vec<usize> = (1..=6).map(|t| round_robin_arm(t, 3)).collect();
        assert_eq!(arms, vec![0, 1, 2, 0, 1, 2]);
    }

    #[test]
    fn history_keeps_rows_in_order() {
        let mut h = ArmHistory::new(2, 2);
        h.push(0, &DVector::from_vec(vec![1.0, 2.0]), 3.0).unwrap();
        h.push(0, &DVector::from_vec(vec![4.0, 5.0]), 6.0).unwrap();
        h.push(1, &DVector::from_vec(vec![7.0, 8.0]), 9.0).unwrap();
        assert_eq!(h.counts(), vec![2, 1]);
        assert_eq!(h.contexts(0, 1), DMatrix::from_row_slice(1, 2, &[1.0, 2.0]));
        let d = h.design(0).unwrap();
        assert_eq!(
            d.contexts(),
            &DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 4.0, 5.0])
        );
        assert_eq!(d.rewards(), &DVector::from_vec(vec![3.0, 6.0]));
        assert!(h.push(2, &DVector::zeros(2), 0.0).is_err());
        assert!(h.push(0, &DVector::zeros(3), 0.0).is_err());
    }

    #[test]
    fn committed_choice_is_argmax() {
        let model = CommittedModel {
            thetas: vec![DVector::from_vec(vec![1.0, 0.0]), DVector::zeros(2)],
        };
        let round = |x1: f64| RoundSample {
            contexts: vec![
                DVector::from_vec(vec![x1, 1.0]),
                DVector::from_vec(vec![9.0, 9.0]),
            ],
            true_means: vec![0.0, 0.0],
            optimal_arm: 0,
        };
        assert_eq!(model.choose(&round(5.0)), 0);
        assert_eq!(model.choose(&round(-5.0)), 1);
        // exact tie goes to arm 0
        assert_eq!(model.choose(&round(0.0)), 0);
    }

    #[test]
    fn commit_invariant_to_common_rescaling() {
        let model = CommittedModel {
            thetas: vec![
                DVector::from_vec(vec![0.3, -1.0]),
                DVector::from_vec(vec![0.5, 0.2]),
            ],
        };
        let scaled = CommittedModel {
            thetas: model.thetas.iter().map(|t| t * 3.5).collect(),
        };
        for (a, b) in [(1.0, 2.0), (-1.0, 0.5), (2.0, -3.0)] {
            let round = RoundSample {
                contexts: vec![DVector::from_vec(vec![a, b]), DVector::from_vec(vec![b, a])],
                true_means: vec![0.0, 0.0],
                optimal_arm: 0,
            };
            let mut big = round.clone();
            big.contexts.iter_mut().for_each(|x| *x *= 7.0);
            assert_eq!(model.choose(&round), scaled.choose(&big));
        }
    }

    #[test]
    fn policy_specs_parse() {
        let spec: PolicySpec = toml::from_str("name = \"aetc\"\nc_t = 3.0").unwrap();
        match spec {
            PolicySpec::Aetc { c_t, tau, .. } => {
                assert_eq!(c_t, 3.0);
                assert_eq!(tau, 10);
            }
            other => panic!("parsed {other:?}"),
        }
        assert!(toml::from_str::<PolicySpec>("name = \"aetc\"\nbogus = 1").is_err());
        assert!(toml::from_str::<PolicySpec>("name = \"dr_lasso\"").is_err());
        assert!(toml::from_str::<PolicySpec>("name = \"uniform\"\nseed = 1").is_err());
        assert_eq!(
            toml::from_str::<PolicySpec>("name = \"oracle\"").unwrap(),
            PolicySpec::Oracle {}
        );
    }
}
