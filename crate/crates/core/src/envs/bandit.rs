use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use super::{default_tail_cap, make_covariance, make_prop2_covariance, CovarianceSpec, Dgp};
use crate::error::{Error, Result};
use crate::spectrum::BenignFamily;

/// Index of the first maximum. Ties resolve to the smallest index.
pub fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Where an environment's base covariance comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnvSource {
    Dgp(Dgp),
    /// A benign family; `tail_cap` truncates Example 1 (default `max(p, 10·T)`).
    Family {
        family: BenignFamily,
        tail_cap: Option<usize>,
    },
}

impl EnvSource {
    pub fn base_covariance(&self, dim: usize, horizon: usize) -> Result<CovarianceSpec> {
        match *self {
            EnvSource::Dgp(dgp) => make_covariance(dgp, dim, horizon),
            EnvSource::Family { family, tail_cap } => make_prop2_covariance(
                &family,
                horizon,
                tail_cap.unwrap_or_else(|| default_tail_cap(dim, horizon)),
            ),
        }
    }
}

/// One round's contexts for every arm and the ex-ante optimal arm.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSample {
    pub contexts: Vec<DVector<f64>>,
    pub true_means: Vec<f64>,
    pub optimal_arm: usize,
}

impl RoundSample {
    pub fn arms(&self) -> usize {
        self.contexts.len()
    }

    /// Pseudo-regret of playing `arm`: best true mean minus the chosen one.
    pub fn regret(&self, arm: usize) -> f64 {
        self.true_means[self.optimal_arm] - self.true_means[arm]
    }
}

/// `K` arms with covariances `Σ⁽ⁱ⁾`, parameters `θ⁽ⁱ⁾` and a shared noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditEnv {
    horizon: usize,
    covariances: Vec<CovarianceSpec>,
    thetas: Vec<DVector<f64>>,
    scales: Vec<f64>,
    noise_sd: f64,
    theta_scale_bound: Option<f64>,
}

impl BanditEnv {
    pub fn new(
        covariances: Vec<CovarianceSpec>,
        thetas: Vec<DVector<f64>>,
        noise_sd: f64,
        horizon: usize,
    ) -> Result<Self> {
        let arms = covariances.len();
        if arms < 2 {
            return Err(Error::domain(format!(
                "a bandit needs K >= 2 arms, got {arms}"
            )));
        }
        if thetas.len() != arms {
            return Err(Error::domain("one parameter vector per arm is required"));
        }
        let dim = covariances[0].dim();
        if covariances.iter().any(|c| c.dim() != dim) || thetas.iter().any(|t| t.len() != dim) {
            return Err(Error::domain("all arms must share the context dimension"));
        }
        if thetas.iter().any(|t| t.iter().any(|v| !v.is_finite())) {
            return Err(Error::domain("parameter vectors must be finite"));
        }
        if !(noise_sd.is_finite() && noise_sd >= 0.0) {
            return Err(Error::domain(format!(
                "noise sd must be >= 0, got {noise_sd}"
            )));
        }
        if horizon < arms {
            return Err(Error::domain(format!(
                "horizon T = {horizon} is below K = {arms}"
            )));
        }
        Ok(BanditEnv {
            horizon,
            covariances,
            thetas,
            scales: vec![1.0; arms],
            noise_sd,
            theta_scale_bound: None,
        })
    }

    /// Projects every `θ⁽ⁱ⁾` with `‖θ⁽ⁱ⁾‖₂ > bound` onto the sphere of radius `bound`.
    pub fn with_theta_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::domain(format!(
                "theta bound must be positive, got {bound}"
            )));
        }
        for theta in &mut self.thetas {
            let norm = theta.norm();
            if norm > bound {
                *theta *= bound / norm;
            }
        }
        self.theta_scale_bound = Some(bound);
        Ok(self)
    }

    pub fn arms(&self) -> usize {
        self.covariances.len()
    }

    pub fn dim(&self) -> usize {
        self.covariances[0].dim()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn covariances(&self) -> &[CovarianceSpec] {
        &self.covariances
    }

    pub fn thetas(&self) -> &[DVector<f64>] {
        &self.thetas
    }

    /// Per-arm factors `c⁽ⁱ⁾` applied to the base covariance.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn noise_sd(&self) -> f64 {
        self.noise_sd
    }

    pub fn theta_scale_bound(&self) -> Option<f64> {
        self.theta_scale_bound
    }

    /// Fresh independent contexts for every arm.
    pub fn sample_round<R: Rng + ?Sized>(&self, rng: &mut R) -> RoundSample {
        let contexts: Vec<DVector<f64>> = self.covariances.iter().map(|c| c.sample(rng)).collect();
        let true_means: Vec<f64> = contexts
            .iter()
            .zip(&self.thetas)
            .map(|(x, theta)| x.dot(theta))
            .collect();
        let optimal_arm = argmax_first(&true_means);
        RoundSample {
            contexts,
            true_means,
            optimal_arm,
        }
    }

    /// `⟨x, θ⁽ᵃʳᵐ⁾⟩ + ξ` with `ξ ~ N(0, σ²)`.
    pub fn realize_reward<R: Rng + ?Sized>(
        &self,
        arm: usize,
        context: &DVector<f64>,
        rng: &mut R,
    ) -> Result<f64> {
        let theta = self
            .thetas
            .get(arm)
            .ok_or_else(|| Error::domain(format!("arm {arm} out of range")))?;
        let mean = context.dot(theta);
        if self.noise_sd == 0.0 {
            return Ok(mean);
        }
        let noise: f64 = rng.sample(StandardNormal);
        Ok(mean + self.noise_sd * noise)
    }
}

/// Heterogeneous environment: `Σ⁽ⁱ⁾ = c⁽ⁱ⁾ Σ̄` with `c⁽ⁱ⁾ ~ U[0.5, 1.5]` and
/// `θ⁽ⁱ⁾` i.i.d. standard normal. The RNG supplies all `c⁽ⁱ⁾` first, then
/// the parameter vectors in arm order.
pub fn build_env<R: Rng + ?Sized>(
    source: &EnvSource,
    arms: usize,
    dim: usize,
    horizon: usize,
    noise_var: f64,
    rng: &mut R,
) -> Result<BanditEnv> {
    if !(noise_var.is_finite() && noise_var >= 0.0) {
        return Err(Error::domain(format!(
            "noise variance must be >= 0, got {noise_var}"
        )));
    }
    let base = source.base_covariance(dim, horizon)?;
    let scale_dist = Uniform::new_inclusive(0.5, 1.5).expect("valid range");
    let scales: Vec<f64> = (0..arms).map(|_| scale_dist.sample(rng)).collect();
    let covariances = scales
        .iter()
        .map(|&c| base.scaled(c))
        .collect::<Result<Vec<_>>>()?;
    let p = base.dim();
    let thetas = (0..arms)
        .map(|_| DVector::from_iterator(p, (0..p).map(|_| rng.sample::<f64, _>(StandardNormal))))
        .collect();
    let mut env = BanditEnv::new(covariances, thetas, noise_var.sqrt(), horizon)?;
    env.scales = scales;
    Ok(env)
}

/// Three arms with identical covariances that differ only in the first
/// coefficient: `θ⁽¹⁾₁ = 1`, `θ⁽²⁾₁ = Err(T₀/3, T)`, `θ⁽³⁾ = 0`.
pub fn lower_bound_env(
    family: &BenignFamily,
    t0: usize,
    horizon: usize,
    base_cov: &CovarianceSpec,
    noise_var: f64,
) -> Result<BanditEnv> {
    family.validate()?;
    if t0 >= horizon {
        return Err(Error::domain(format!(
            "lower-bound construction needs T0 < T, got {t0} >= {horizon}"
        )));
    }
    let gap = family.error_function(t0 as f64 / 3.0, horizon as f64);
    let p = base_cov.dim();
    let first = |v: f64| {
        let mut theta = DVector::zeros(p);
        theta[0] = v;
        theta
    };
    BanditEnv::new(
        vec![base_cov.clone(), base_cov.clone(), base_cov.clone()],
        vec![first(1.0), first(gap), DVector::zeros(p)],
        noise_var.sqrt(),
        horizon,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use approx::assert_relative_eq;

    fn diag_env(eigs: Vec<f64>, thetas: Vec<Vec<f64>>, noise_sd: f64) -> BanditEnv {
        let cov = CovarianceSpec::diagonal(crate::spectrum::EigenSequence::new(eigs).unwrap());
        BanditEnv::new(
            vec![cov; thetas.len()],
            thetas.into_iter().map(DVector::from_vec).collect(),
            noise_sd,
            100,
        )
        .unwrap()
    }

    #[test]
    fn argmax_ties_go_to_smallest() {
        assert_eq!(argmax_first(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax_first(&[0.0, 0.0]), 0);
        assert_eq!(argmax_first(&[-1.0]), 0);
    }

    #[test]
    fn build_env_is_deterministic() {
        let src = EnvSource::Dgp(Dgp::Dgp1);
        let a = build_env(&src, 3, 20, 50, 0.01, &mut stream(5, Stream::Env)).unwrap();
        let b = build_env(&src, 3, 20, 50, 0.01, &mut stream(5, Stream::Env)).unwrap();
        assert_eq!(a, b);
        let c = build_env(&src, 3, 20, 50, 0.01, &mut stream(6, Stream::Env)).unwrap();
        assert_ne!(a.thetas(), c.thetas());
    }

    #[test]
    fn scales_in_range_and_applied() {
        let src = EnvSource::Dgp(Dgp::Dgp1);
        for seed in 0..50 {
            let env = build_env(&src, 4, 10, 50, 0.01, &mut stream(seed, Stream::Env)).unwrap();
            for (c, cov) in env.scales().iter().zip(env.covariances()) {
                assert!((0.5..=1.5).contains(c));
                assert_relative_eq!(cov.eigenvalues()[0], *c, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn theta_norm_matches_chi_square_mean() {
        let src = EnvSource::Dgp(Dgp::Dgp1);
        let mut total = 0.0;
        let mut count = 0;
        for seed in 0..50 {
            let env = build_env(&src, 2, 200, 500, 0.01, &mut stream(seed, Stream::Env)).unwrap();
            for t in env.thetas() {
                total += t.norm_squared();
                count += 1;
            }
        }
        let mean = total / count as f64;
        assert!((mean - 200.0).abs() < 20.0, "mean ||theta||^2 = {mean}");
    }

    #[test]
    fn theta_bound_caps_norms() {
        let env = diag_env(vec![1.0, 1.0], vec![vec![3.0, 4.0], vec![0.1, 0.0]], 0.1)
            .with_theta_bound(1.0)
            .unwrap();
        assert_relative_eq!(env.thetas()[0].norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(env.thetas()[1][0], 0.1);
    }

    #[test]
    fn zero_parameters_tie_to_first_arm() {
        let env = diag_env(vec![1.0, 0.5], vec![vec![0.0, 0.0]; 3], 0.1);
        let round = env.sample_round(&mut stream(1, Stream::Contexts));
        assert_eq!(round.true_means, vec![0.0; 3]);
        assert_eq!(round.optimal_arm, 0);
    }

    #[test]
    fn optimal_arm_is_argmax() {
        let env = build_env(
            &EnvSource::Dgp(Dgp::Dgp4),
            5,
            8,
            50,
            0.01,
            &mut stream(2, Stream::Env),
        )
        .unwrap();
        let mut rng = stream(2, Stream::Contexts);
        for _ in 0..200 {
            let r = env.sample_round(&mut rng);
            let best = r
                .true_means
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(r.true_means[r.optimal_arm], best);
            assert!((0..r.arms()).all(|i| r.regret(i) >= 0.0));
        }
    }

    #[test]
    fn context_variance_matches_covariance() {
        let env = diag_env(vec![4.0], vec![vec![1.0], vec![0.0]], 0.0);
        let mut rng = stream(3, Stream::Contexts);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| env.sample_round(&mut rng).contexts[0][0])
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((3.9..=4.1).contains(&var), "var = {var}");
    }

    #[test]
    fn noiseless_reward_is_mean() {
        let env = diag_env(vec![1.0, 1.0], vec![vec![2.0, -1.0], vec![0.0, 0.0]], 0.0);
        let x = DVector::from_vec(vec![1.5, 0.5]);
        let r = env
            .realize_reward(0, &x, &mut stream(0, Stream::Noise))
            .unwrap();
        assert_eq!(r, 2.5);
        assert!(env
            .realize_reward(2, &x, &mut stream(0, Stream::Noise))
            .is_err());
    }

    #[test]
    fn reward_noise_moments() {
        let env = diag_env(vec![1.0, 1.0], vec![vec![2.0, -1.0], vec![0.0, 0.0]], 0.1);
        let x = DVector::from_vec(vec![1.5, 0.5]);
        let mut rng = stream(4, Stream::Noise);
        let n = 100_000;
        let rs: Vec<f64> = (0..n)
            .map(|_| env.realize_reward(0, &x, &mut rng).unwrap())
            .collect();
        let mean = rs.iter().sum::<f64>() / n as f64;
        let var = rs.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 2.5).abs() <= 3.0 * 0.1 / (n as f64).sqrt());
        assert!((var - 0.01).abs() <= 0.001, "var = {var}");
    }

    #[test]
    fn lower_bound_construction() {
        // Example 2 with b = 0.5, c = 1, T = 10^4: Err(N, T) = sqrt(100/N) = 0.2 at N = 2500.
        let family = BenignFamily::Example2 { b: 0.5, c: 1.0 };
        let base = make_prop2_covariance(&family, 100, 0).unwrap();
        let env = lower_bound_env(&family, 7500, 10_000, &base, 0.01).unwrap();
        assert_eq!(env.arms(), 3);
        assert_relative_eq!(env.thetas()[0][0], 1.0);
        assert_relative_eq!(env.thetas()[1][0], 0.2, epsilon = 1e-12);
        assert!(env.thetas()[2].iter().all(|v| *v == 0.0));
        assert!(env.thetas()[1].iter().skip(1).all(|v| *v == 0.0));
        assert_eq!(env.covariances()[0], env.covariances()[1]);
        assert_eq!(env.covariances()[1], env.covariances()[2]);
        assert!(lower_bound_env(&family, 10_000, 10_000, &base, 0.01).is_err());
    }
}
