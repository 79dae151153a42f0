//! Minimum-norm interpolating least squares.
//!
//! With `N <= p` observations the estimator `θ̂ = Xᵀ(XXᵀ)⁻¹Y` fits every
//! observation exactly and has the smallest `ℓ2` norm among all exact fits.
//! Only the `N × N` Gram matrix is ever factorized.

use nalgebra::{DMatrix, DVector};

use crate::envs::CovarianceSpec;
use crate::error::{Error, Result};

pub const DEFAULT_CONDITION_CEILING: f64 = 1e12;

/// Relative size of the diagonal jitter used on the single retry.
const JITTER: f64 = 1e-10;

/// Observed contexts (rows) and rewards of one arm.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignData {
    contexts: DMatrix<f64>,
    rewards: DVector<f64>,
}

impl DesignData {
    pub fn new(contexts: DMatrix<f64>, rewards: DVector<f64>) -> Result<Self> {
        let (n, p) = contexts.shape();
        if n == 0 || p == 0 {
            return Err(Error::domain(format!(
                "design must be non-empty, got {n} x {p}"
            )));
        }
        if rewards.len() != n {
            return Err(Error::domain(format!(
                "{n} context rows but {} rewards",
                rewards.len()
            )));
        }
        Ok(DesignData { contexts, rewards })
    }

    pub fn contexts(&self) -> &DMatrix<f64> {
        &self.contexts
    }

    pub fn rewards(&self) -> &DVector<f64> {
        &self.rewards
    }

    pub fn n(&self) -> usize {
        self.contexts.nrows()
    }

    pub fn p(&self) -> usize {
        self.contexts.ncols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedParameter {
    pub theta_hat: DVector<f64>,
    /// Condition estimate of the factorized Gram matrix.
    pub gram_condition: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Gram matrices with a larger condition estimate are rejected.
    pub condition_ceiling: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            condition_ceiling: DEFAULT_CONDITION_CEILING,
        }
    }
}

pub fn fit_min_norm(data: &DesignData) -> Result<FittedParameter> {
    fit_min_norm_with(data, &FitOptions::default())
}

pub fn fit_min_norm_with(data: &DesignData, opts: &FitOptions) -> Result<FittedParameter> {
    if data.n() > data.p() {
        return Err(Error::NotOverparameterized {
            n: data.n(),
            p: data.p(),
        });
    }
    let x = data.contexts();
    let gram = x * x.transpose();
    let (alpha, gram_condition) = solve_spd(gram, data.rewards(), opts.condition_ceiling)?;
    Ok(FittedParameter {
        theta_hat: x.transpose() * alpha,
        gram_condition,
    })
}

/// Ordinary least squares `(XᵀX)⁻¹XᵀY` for `N >= p`.
pub fn fit_least_squares(data: &DesignData, opts: &FitOptions) -> Result<FittedParameter> {
    if data.n() < data.p() {
        return Err(Error::domain(format!(
            "least squares needs N >= p, got N = {}, p = {}",
            data.n(),
            data.p()
        )));
    }
    let x = data.contexts();
    let xty = x.transpose() * data.rewards();
    let (theta_hat, gram_condition) = solve_spd(x.transpose() * x, &xty, opts.condition_ceiling)?;
    Ok(FittedParameter {
        theta_hat,
        gram_condition,
    })
}

/// Minimum-norm interpolation when `N <= p`, ordinary least squares otherwise.
pub fn fit_min_norm_or_ols(data: &DesignData, opts: &FitOptions) -> Result<FittedParameter> {
    if data.n() <= data.p() {
        fit_min_norm_with(data, opts)
    } else {
        fit_least_squares(data, opts)
    }
}

/// Minimum-norm least squares `X⁺Y` through an SVD, dropping singular values
/// below `max(N, p)·ε·σ_max`. Agrees with [`fit_min_norm_or_ols`] on
/// well-conditioned designs and stays defined on numerically singular ones.
pub fn fit_pseudo_inverse(data: &DesignData) -> Result<FittedParameter> {
    let x = data.contexts();
    let svd = x.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (hi, lo) = (sv.max(), sv.min());
    let cutoff = hi * x.nrows().max(x.ncols()) as f64 * f64::EPSILON;
    let theta_hat = svd
        .solve(data.rewards(), cutoff)
        .map_err(|e| Error::domain(format!("pseudo-inverse failed: {e}")))?;
    if theta_hat.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain(
            "pseudo-inverse produced non-finite coefficients",
        ));
    }
    Ok(FittedParameter {
        theta_hat,
        gram_condition: if lo > 0.0 {
            (hi / lo).powi(2)
        } else {
            f64::INFINITY
        },
    })
}

/// Cholesky solve with one jittered retry. Returns the solution and a
/// condition estimate of the original (unjittered) matrix.
fn solve_spd(
    matrix: DMatrix<f64>,
    rhs: &DVector<f64>,
    ceiling: f64,
) -> Result<(DVector<f64>, f64)> {
    if let Some(chol) = matrix.clone().cholesky() {
        let diag = chol.l_dirty().diagonal();
        let condition = (diag.max() / diag.min()).powi(2);
        if !(condition <= ceiling) {
            return Err(Error::RankDeficient { condition });
        }
        return Ok((chol.solve(rhs), condition));
    }

    let eigs = matrix.symmetric_eigenvalues();
    let (lo, hi) = (eigs.min(), eigs.max());
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= ceiling) {
        return Err(Error::RankDeficient { condition });
    }
    let n = matrix.nrows();
    let jitter = JITTER * matrix.trace() / n as f64;
    let jittered = matrix + DMatrix::from_diagonal_element(n, n, jitter);
    let chol = jittered
        .cholesky()
        .ok_or(Error::RankDeficient { condition })?;
    Ok((chol.solve(rhs), condition))
}

/// `⟨x, θ⟩`.
pub fn predict(theta: &DVector<f64>, x: &DVector<f64>) -> Result<f64> {
    if theta.len() != x.len() {
        return Err(Error::domain(format!(
            "parameter length {} does not match context length {}",
            theta.len(),
            x.len()
        )));
    }
    Ok(theta.dot(x))
}

/// `‖θ̂ − θ‖²_Σ = (θ̂ − θ)ᵀ Σ (θ̂ − θ)`.
pub fn excess_risk(
    theta_hat: &DVector<f64>,
    theta_true: &DVector<f64>,
    cov: &CovarianceSpec,
) -> Result<f64> {
    if theta_hat.len() != theta_true.len() {
        return Err(Error::domain("parameter vectors differ in length"));
    }
    cov.quad_form(&(theta_hat - theta_true))
}
