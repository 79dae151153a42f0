use rand::Rng;

use super::Policy;
use crate::envs::RoundSample;
use crate::error::Result;
use crate::rng::EpisodeRng;

/// Plays a uniformly random arm every round.
#[derive(Debug, Clone)]
pub struct UniformPolicy {
    rng: EpisodeRng,
}

impl UniformPolicy {
    pub fn new(rng: EpisodeRng) -> Self {
        UniformPolicy { rng }
    }
}

impl Policy for UniformPolicy {
    fn name(&self) -> &str {
        "uniform"
    }

    fn select(&mut self, _t: usize, round: &RoundSample) -> Result<usize> {
        Ok(self.rng.random_range(0..round.arms()))
    }
}

/// Knows the true means and always plays the optimal arm.
#[derive(Debug, Clone, Copy, Default)]
pub struct OraclePolicy;

impl Policy for OraclePolicy {
    fn name(&self) -> &str {
        "oracle"
    }

    fn select(&mut self, _t: usize, round: &RoundSample) -> Result<usize> {
        Ok(round.optimal_arm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{build_env, Dgp, EnvSource};
    use crate::rng::{stream, Stream};
    use nalgebra::DVector;

    fn blank_round(arms: usize) -> RoundSample {
        RoundSample {
            contexts: vec![DVector::zeros(2); arms],
            true_means: vec![0.0; arms],
            optimal_arm: 0,
        }
    }

    #[test]
    fn oracle_has_zero_regret() {
        let env = build_env(
            &EnvSource::Dgp(Dgp::Dgp1),
            4,
            20,
            100,
            0.01,
            &mut stream(1, Stream::Env),
        )
        .unwrap();
        let mut rng = stream(1, Stream::Contexts);
        let mut oracle = OraclePolicy;
        for t in 1..=100 {
            let round = env.sample_round(&mut rng);
            let arm = oracle.select(t, &round).unwrap();
            assert_eq!(round.regret(arm), 0.0);
        }
    }

    #[test]
    fn uniform_frequencies_within_three_sigma() {
        let (arms, rounds) = (4usize, 10_000usize);
        let mut policy = UniformPolicy::new(stream(2, Stream::Policy));
        let round = blank_round(arms);
        let mut counts = vec![0usize; arms];
        for t in 1..=rounds {
            counts[policy.select(t, &round).unwrap()] += 1;
        }
        let p = 1.0 / arms as f64;
        let sd = (rounds as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!(
                (c as f64 - rounds as f64 * p).abs() <= 3.0 * sd,
                "count {c}"
            );
        }
    }

    #[test]
    fn single_arm() {
        let round = blank_round(1);
        assert_eq!(
            UniformPolicy::new(stream(3, Stream::Policy))
                .select(1, &round)
                .unwrap(),
            0
        );
        assert_eq!(OraclePolicy.select(1, &round).unwrap(), 0);
    }
}
