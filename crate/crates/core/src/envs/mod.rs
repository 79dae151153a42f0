//! Data-generating processes and the bandit environment.

mod bandit;
mod covariance;

pub use bandit::{argmax_first, build_env, lower_bound_env, BanditEnv, EnvSource, RoundSample};
pub use covariance::{CovarianceForm, CovarianceSpec};

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{BenignFamily, EigenSequence};

/// Base covariance configurations of the simulation study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dgp {
    /// `λ_k = k^{-1/2}`.
    Dgp1,
    /// `λ_k = exp(-k) + T·exp(-T)/p`.
    Dgp2,
    /// `λ_k = k^{-1 + 1/T}`.
    Dgp3,
    /// Compound symmetry: 0.7 on the diagonal, 0.3 elsewhere.
    Dgp4,
}

impl Dgp {
    pub const ALL: [Dgp; 4] = [Dgp::Dgp1, Dgp::Dgp2, Dgp::Dgp3, Dgp::Dgp4];

    pub fn name(self) -> &'static str {
        match self {
            Dgp::Dgp1 => "dgp1",
            Dgp::Dgp2 => "dgp2",
            Dgp::Dgp3 => "dgp3",
            Dgp::Dgp4 => "dgp4",
        }
    }

    pub fn parse(name: &str) -> Option<Dgp> {
        Dgp::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for Dgp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Values below this are flushed to zero in the DGP 2 floor term.
const UNDERFLOW_FLOOR: f64 = 1e-300;

pub fn make_covariance(dgp: Dgp, p: usize, horizon: usize) -> Result<CovarianceSpec> {
    if p < 2 || horizon < 2 {
        return Err(Error::domain(format!(
            "covariance generation needs p >= 2 and T >= 2, got p = {p}, T = {horizon}"
        )));
    }
    let t = horizon as f64;
    let powers =
        |exponent: f64| -> Vec<f64> { (1..=p).map(|k| (k as f64).powf(exponent)).collect() };
    let eigs = match dgp {
        Dgp::Dgp1 => powers(-0.5),
        Dgp::Dgp2 => {
            let floor = (t.ln() - t - (p as f64).ln()).exp();
            let floor = if floor < UNDERFLOW_FLOOR {
                log::warn!("DGP2 floor T*exp(-T)/p underflows at T = {horizon}; using 0");
                0.0
            } else {
                floor
            };
            (1..=p).map(|k| (-(k as f64)).exp() + floor).collect()
        }
        Dgp::Dgp3 => powers(-1.0 + 1.0 / t),
        Dgp::Dgp4 => {
            let m = DMatrix::from_fn(p, p, |i, j| if i == j { 0.7 } else { 0.3 });
            return CovarianceSpec::dense(m);
        }
    };
    Ok(CovarianceSpec::diagonal(EigenSequence::new(eigs)?))
}

/// Default truncation for spectra without a natural dimension: `max(p, 10·T)`.
pub fn default_tail_cap(p: usize, horizon: usize) -> usize {
    p.max(10 * horizon)
}

/// Diagonal covariance of a benign family: Example 1 is truncated at
/// `tail_cap`, Example 2 has dimension `⌊T^c⌋`.
pub fn make_prop2_covariance(
    family: &BenignFamily,
    horizon: usize,
    tail_cap: usize,
) -> Result<CovarianceSpec> {
    family.validate()?;
    let t = horizon as f64;
    let (dim, exponent) = match *family {
        BenignFamily::Example1 { a } => (tail_cap, -(1.0 + t.powf(-a))),
        BenignFamily::Example2 { b, c } => (t.powf(c).floor() as usize, -b),
    };
    if dim == 0 {
        return Err(Error::domain("family covariance has zero dimension"));
    }
    let eigs = (1..=dim).map(|k| (k as f64).powf(exponent)).collect();
    Ok(CovarianceSpec::diagonal(EigenSequence::new(eigs)?))
}
