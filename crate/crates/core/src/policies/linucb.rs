use nalgebra::{DMatrix, DVector};

use super::Policy;
use crate::envs::{argmax_first, RoundSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinUcbConfig {
    pub alpha: f64,
    pub ridge: f64,
}

impl Default for LinUcbConfig {
    fn default() -> Self {
        LinUcbConfig {
            alpha: 1.0,
            ridge: 1.0,
        }
    }
}

/// Per-arm ridge state: `A⁻¹` with `A = ridge·I + Σ x xᵀ`, and `b = Σ x·y`.
#[derive(Debug, Clone)]
struct ArmModel {
    a_inv: DMatrix<f64>,
    b: DVector<f64>,
    theta: DVector<f64>,
}

impl ArmModel {
    fn new(dim: usize, ridge: f64) -> Self {
        ArmModel {
            a_inv: DMatrix::from_diagonal_element(dim, dim, 1.0 / ridge),
            b: DVector::zeros(dim),
            theta: DVector::zeros(dim),
        }
    }

    fn score(&self, x: &DVector<f64>, alpha: f64) -> f64 {
        let width = (x.dot(&(&self.a_inv * x))).max(0.0).sqrt();
        x.dot(&self.theta) + alpha * width
    }

    /// Sherman–Morrison: `(A + xxᵀ)⁻¹ = A⁻¹ − A⁻¹x xᵀA⁻¹ / (1 + xᵀA⁻¹x)`.
    fn update(&mut self, x: &DVector<f64>, reward: f64) {
        let ax = &self.a_inv * x;
        let denom = 1.0 + x.dot(&ax);
        self.a_inv.ger(-1.0 / denom, &ax, &ax, 1.0);
        self.b.axpy(reward, x, 1.0);
        self.theta = &self.a_inv * &self.b;
    }
}

/// Disjoint LinUCB: one ridge model per arm, optimistic scores.
#[derive(Debug, Clone)]
pub struct LinUcbPolicy {
    cfg: LinUcbConfig,
    dim: usize,
    models: Vec<ArmModel>,
}

impl LinUcbPolicy {
    pub fn new(cfg: LinUcbConfig, arms: usize, dim: usize) -> Result<Self> {
        if !(cfg.alpha >= 0.0) || !(cfg.ridge > 0.0) || arms == 0 {
            return Err(Error::Config(format!(
                "linucb needs alpha >= 0, ridge > 0 and K >= 1, got alpha = {}, ridge = {}, K = {arms}",
                cfg.alpha, cfg.ridge
            )));
        }
        Ok(LinUcbPolicy {
            cfg,
            dim,
            models: vec![ArmModel::new(dim, cfg.ridge); arms],
        })
    }

    /// Current `A⁻¹` of `arm`.
    pub fn precision_inverse(&self, arm: usize) -> &DMatrix<f64> {
        &self.models[arm].a_inv
    }

    pub fn theta(&self, arm: usize) -> &DVector<f64> {
        &self.models[arm].theta
    }
}

impl Policy for LinUcbPolicy {
    fn name(&self) -> &str {
        "linucb"
    }

    fn select(&mut self, _t: usize, round: &RoundSample) -> Result<usize> {
        if round.arms() != self.models.len() {
            return Err(Error::domain(format!(
                "round has {} arms, policy has {}",
                round.arms(),
                self.models.len()
            )));
        }
        let scores: Vec<f64> = round
            .contexts
            .iter()
            .zip(&self.models)
            .map(|(x, m)| m.score(x, self.cfg.alpha))
            .collect();
        Ok(argmax_first(&scores))
    }

    fn observe(
        &mut self,
        _t: usize,
        arm: usize,
        context: &DVector<f64>,
        reward: f64,
    ) -> Result<()> {
        if arm >= self.models.len() || context.len() != self.dim {
            return Err(Error::domain(format!(
                "cannot update arm {arm} with a length-{} context",
                context.len()
            )));
        }
        self.models[arm].update(context, reward);
        Ok(())
    }
}
