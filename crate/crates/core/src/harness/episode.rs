use crate::envs::BanditEnv;
use crate::error::Error;
use crate::policies::Policy;
use crate::rng::{stream, Stream};

/// Realized pseudo-regret path of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub policy: String,
    pub seed: u64,
    /// 0-based arm index per round.
    pub chosen: Vec<usize>,
    pub inst_regret: Vec<f64>,
    pub cum_regret: Vec<f64>,
    /// Round at which the policy committed, if it ever did.
    pub commit_round: Option<usize>,
}

impl RegretTrace {
    pub fn len(&self) -> usize {
        self.chosen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }

    pub fn final_regret(&self) -> f64 {
        self.cum_regret.last().copied().unwrap_or(0.0)
    }
}

/// An episode aborted at round `round`.
#[derive(Debug)]
pub struct EpisodeFailure {
    pub round: usize,
    pub error: Error,
}

/// Plays `policy` on `env` for the full horizon.
///
/// Contexts and reward noise come from `seed`'s dedicated streams, so every
/// policy run with the same seed sees the same contexts. Only the chosen arm's
/// reward is realized.
pub fn run_episode(
    env: &BanditEnv,
    policy: &mut dyn Policy,
    seed: u64,
) -> Result<RegretTrace, EpisodeFailure> {
    let horizon = env.horizon();
    let mut contexts = stream(seed, Stream::Contexts);
    let mut noise = stream(seed, Stream::Noise);
    let mut trace = RegretTrace {
        policy: policy.name().to_string(),
        seed,
        chosen: Vec::with_capacity(horizon),
        inst_regret: Vec::with_capacity(horizon),
        cum_regret: Vec::with_capacity(horizon),
        commit_round: None,
    };
    let mut total = 0.0;
    for t in 1..=horizon {
        let fail = |error| EpisodeFailure { round: t, error };
        let round = env.sample_round(&mut contexts);
        let arm = policy.select(t, &round).map_err(fail)?;
        if arm >= round.arms() {
            return Err(fail(Error::domain(format!(
                "policy chose arm {arm} of {}",
                round.arms()
            ))));
        }
        let reward = env
            .realize_reward(arm, &round.contexts[arm], &mut noise)
            .map_err(fail)?;
        policy
            .observe(t, arm, &round.contexts[arm], reward)
            .map_err(fail)?;
        let regret = round.regret(arm);
        total += regret;
        trace.chosen.push(arm);
        trace.inst_regret.push(regret);
        trace.cum_regret.push(total);
    }
    trace.commit_round = policy.commit_round();
    Ok(trace)
}
