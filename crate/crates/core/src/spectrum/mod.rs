//! Population and empirical spectral quantities.
//!
//! Eigenvalues are indexed from 1 in the math (`λ_1` is the largest) and from
//! 0 in storage, so `λ_{k+1}` is `values[k]` and "the tail beyond `k`" is the
//! slice `values[k..]`.

mod empirical;
mod family;

pub use empirical::{
    decay_rate, empirical_top_eigs, empirical_trace, modeled_tail, stop_condition, PlugInStats,
    SpectralEstimate, DEFAULT_TAU,
};
pub use family::BenignFamily;

use crate::error::{Error, Result};

/// A non-empty, strictly positive, non-increasing eigenvalue sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSequence(Vec<f64>);

impl EigenSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("eigenvalue sequence is empty"));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::domain(format!(
                "eigenvalues must be finite and positive, got {bad}"
            )));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::domain("eigenvalues must be non-increasing"));
        }
        Ok(Self(values))
    }

    /// Sorts descending before validating.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn trace(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * factor).collect())
    }

    /// `(Σ_{j>k} λ_j, Σ_{j>k} λ_j²)` for every `k` in `0..len`.
    fn tail_sums(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0); self.0.len()];
        let (mut s1, mut s2) = (0.0, 0.0);
        for (k, v) in self.0.iter().enumerate().rev() {
            s1 += v;
            s2 += v * v;
            out[k] = (s1, s2);
        }
        out
    }
}

/// Effective ranks `r_k` and `R_k`. `f64::INFINITY` stands for an empty tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankPair {
    pub r: f64,
    pub big_r: f64,
}

impl RankPair {
    const EMPTY_TAIL: RankPair = RankPair {
        r: f64::INFINITY,
        big_r: f64::INFINITY,
    };

    fn from_tail(next: f64, sum: f64, sum_sq: f64) -> Self {
        if sum <= 0.0 {
            return Self::EMPTY_TAIL;
        }
        RankPair {
            r: sum / next,
            big_r: sum * sum / sum_sq,
        }
    }
}

/// `r_k = Σ_{j>k} λ_j / λ_{k+1}` and `R_k = (Σ_{j>k} λ_j)² / Σ_{j>k} λ_j²`.
pub fn effective_ranks(eigs: &EigenSequence, k: usize) -> Result<RankPair> {
    let values = eigs.values();
    if k >= values.len() {
        return Err(Error::domain(format!(
            "rank index k = {k} must be below the spectrum length {}",
            values.len()
        )));
    }
    let tail = &values[k..];
    let sum: f64 = tail.iter().sum();
    let sum_sq: f64 = tail.iter().map(|v| v * v).sum();
    Ok(RankPair::from_tail(tail[0], sum, sum_sq))
}

/// Coherent rank `k* = min{k >= 0 : r_k >= N}`; `None` when no such `k` exists.
pub fn coherent_rank(eigs: &EigenSequence, n: usize) -> Option<usize> {
    let values = eigs.values();
    let n = n as f64;
    eigs.tail_sums()
        .iter()
        .zip(values)
        .position(|(&(sum, _), &next)| sum / next >= n)
}

/// Effective bias `B`, effective variance `V` and the coherent rank they use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasVariance {
    pub bias: f64,
    pub variance: f64,
    pub coherent_rank: usize,
}

/// `B = λ_{max(k*, 1)}`, `V = k*/N + N/R_{k*}`.
pub fn bias_variance(eigs: &EigenSequence, n: usize) -> Result<BiasVariance> {
    if n == 0 {
        return Err(Error::domain("sample count N must be positive"));
    }
    let k_star = coherent_rank(eigs, n).ok_or(Error::NotBenign { n })?;
    let ranks = effective_ranks(eigs, k_star)?;
    let nf = n as f64;
    Ok(BiasVariance {
        bias: eigs.values()[k_star.max(1) - 1],
        variance: k_star as f64 / nf + nf / ranks.big_r,
        coherent_rank: k_star,
    })
}
