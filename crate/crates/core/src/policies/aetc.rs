use nalgebra::DVector;

use super::{fit_all_min_norm, round_robin_arm, ArmHistory, CommittedModel, Policy};
use crate::envs::{default_tail_cap, RoundSample};
use crate::error::{Error, Result};
use crate::interpolate::FitOptions;
use crate::spectrum::{stop_condition, SpectralEstimate, DEFAULT_TAU};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AetcConfig {
    pub c_t: f64,
    /// Checkpoints are the rounds `⌊γ^j⌋`.
    pub checkpoint_growth: f64,
    /// First round at which stopping is considered. Defaults to
    /// `max(K·⌈log T⌉, K·(τ + 1))`.
    pub min_exploration: Option<usize>,
    pub tau: usize,
    /// Truncation of the modeled spectrum. Defaults to `max(p, 10·T)`.
    pub tail_cap: Option<usize>,
}

impl Default for AetcConfig {
    fn default() -> Self {
        AetcConfig {
            c_t: 2.0,
            checkpoint_growth: std::f64::consts::E,
            min_exploration: None,
            tau: DEFAULT_TAU,
            tail_cap: None,
        }
    }
}

impl AetcConfig {
    pub fn validate(&self, arms: usize) -> Result<()> {
        if !(self.c_t > 0.0) {
            return Err(Error::Config(format!(
                "c_t must be positive, got {}",
                self.c_t
            )));
        }
        if !(self.checkpoint_growth > 1.0) || !self.checkpoint_growth.is_finite() {
            return Err(Error::Config(format!(
                "checkpoint_growth must exceed 1, got {}",
                self.checkpoint_growth
            )));
        }
        if self.tau == 0 {
            return Err(Error::Config("tau must be at least 1".into()));
        }
        if let Some(m) = self.min_exploration {
            if m < arms {
                return Err(Error::Config(format!(
                    "min_exploration = {m} is below K = {arms}"
                )));
            }
        }
        if self.tail_cap == Some(0) {
            return Err(Error::Config("tail_cap must be positive".into()));
        }
        Ok(())
    }

    pub fn min_exploration(&self, arms: usize, horizon: usize) -> usize {
        self.min_exploration.unwrap_or_else(|| {
            let log_t = (horizon as f64).ln().ceil() as usize;
            (arms * log_t).max(arms * (self.tau + 1))
        })
    }

    /// `{⌊γ^j⌋ : j ≥ 0} ∩ [min_exploration, T]`, ascending and deduplicated.
    pub fn checkpoints(&self, arms: usize, horizon: usize) -> Vec<usize> {
        let lo = self.min_exploration(arms, horizon);
        let mut out: Vec<usize> = Vec::new();
        let mut j = 0i32;
        loop {
            let t = self.checkpoint_growth.powi(j).floor();
            if t > horizon as f64 {
                break;
            }
            let t = t as usize;
            if t >= lo && out.last() != Some(&t) {
                out.push(t);
            }
            j += 1;
        }
        out
    }
}

/// Decides, at a checkpoint, whether exploration has gone on long enough.
pub trait StoppingRule: Send {
    /// `n` is the per-arm draw count `⌊t/K⌋`; only the first `n` rows of each
    /// arm in `history` are to be used.
    fn should_stop(&mut self, n: usize, arms: usize, horizon: usize, history: &ArmHistory) -> bool;
}

/// The plug-in spectral rule: estimate trace, decay rate, `B̂` and `V̂` per
/// arm and apply [`stop_condition`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralStop {
    pub c_t: f64,
    pub tau: usize,
    pub tail_cap: usize,
}

impl StoppingRule for SpectralStop {
    fn should_stop(&mut self, n: usize, arms: usize, horizon: usize, history: &ArmHistory) -> bool {
        let mut estimates = Vec::with_capacity(arms);
        for arm in 0..arms {
            match SpectralEstimate::from_rows(&history.contexts(arm, n), self.tau, self.tail_cap) {
                Ok(est) => estimates.push(est),
                Err(e) => {
                    log::debug!("no spectral estimate for arm {arm} at N = {n}: {e}");
                    return false;
                }
            }
        }
        stop_condition(n, arms, horizon, self.c_t, &estimates)
    }
}

/// Explore-then-commit whose exploration length is chosen online.
pub struct AetcPolicy {
    arms: usize,
    horizon: usize,
    checkpoints: Vec<usize>,
    next_checkpoint: usize,
    rule: Box<dyn StoppingRule>,
    history: ArmHistory,
    committed: Option<CommittedModel>,
    t0: Option<usize>,
}

impl AetcPolicy {
    pub fn new(cfg: AetcConfig, arms: usize, dim: usize, horizon: usize) -> Result<Self> {
        let rule = SpectralStop {
            c_t: cfg.c_t,
            tau: cfg.tau,
            tail_cap: cfg
                .tail_cap
                .unwrap_or_else(|| default_tail_cap(dim, horizon)),
        };
        Self::with_rule(cfg, arms, dim, horizon, Box::new(rule))
    }

    /// AEtC with a custom stopping rule on the same checkpoint schedule.
    pub fn with_rule(
        cfg: AetcConfig,
        arms: usize,
        dim: usize,
        horizon: usize,
        rule: Box<dyn StoppingRule>,
    ) -> Result<Self> {
        if arms == 0 {
            return Err(Error::Config("aetc needs at least one arm".into()));
        }
        cfg.validate(arms)?;
        Ok(AetcPolicy {
            arms,
            horizon,
            checkpoints: cfg.checkpoints(arms, horizon),
            next_checkpoint: 0,
            rule,
            history: ArmHistory::new(arms, dim),
            committed: None,
            t0: None,
        })
    }

    pub fn checkpoints(&self) -> &[usize] {
        &self.checkpoints
    }

    pub fn history(&self) -> &ArmHistory {
        &self.history
    }
}

impl Policy for AetcPolicy {
    fn name(&self) -> &str {
        "aetc"
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
        while self
            .checkpoints
            .get(self.next_checkpoint)
            .is_some_and(|&c| c < t)
        {
            self.next_checkpoint += 1;
        }
        if self.checkpoints.get(self.next_checkpoint) != Some(&t) {
            return Ok(());
        }
        self.next_checkpoint += 1;
        let n = t / self.arms;
        if self
            .rule
            .should_stop(n, self.arms, self.horizon, &self.history)
        {
            log::debug!("aetc stops exploring at t = {t} (N = {n})");
            self.committed = Some(fit_all_min_norm(&self.history, &FitOptions::default())?);
            self.t0 = Some(t);
        }
        Ok(())
    }

    fn commit_round(&self) -> Option<usize> {
        self.t0
    }
}
