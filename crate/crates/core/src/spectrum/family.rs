use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomially decaying benign covariance families.
///
/// `Example1` has `λ_k = k^{-(1 + T^{-a})}` on an infinite index set, so the
/// variance term dominates. `Example2` has `λ_k = k^{-b}` truncated at
/// `p_T = ⌊T^c⌋`, so the bias term dominates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum BenignFamily {
    Example1 { a: f64 },
    Example2 { b: f64, c: f64 },
}

impl BenignFamily {
    /// Rejects parameters outside their open intervals. For `Example2`, a `c`
    /// outside `(max(1, 2/(2-b), 1/(1-b²)), 1/(1-b))` only logs a warning.
    pub fn validate(&self) -> Result<()> {
        match *self {
            BenignFamily::Example1 { a } => {
                if !(a > 0.0 && a < 1.0) {
                    return Err(Error::domain(format!("Example1 needs a in (0,1), got {a}")));
                }
            }
            BenignFamily::Example2 { b, c } => {
                if !(b > 0.0 && b < 1.0) {
                    return Err(Error::domain(format!("Example2 needs b in (0,1), got {b}")));
                }
                if !(c.is_finite() && c > 0.0) {
                    return Err(Error::domain(format!("Example2 needs c > 0, got {c}")));
                }
                let (lo, hi) = self.c_window().expect("example2");
                if !(c > lo && c < hi) {
                    log::warn!(
                        "Example2 c = {c} lies outside the benign window ({lo:.4}, {hi:.4}) for b = {b}"
                    );
                }
            }
        }
        Ok(())
    }

    /// Open interval for `c` under which `Example2` is benign.
    pub fn c_window(&self) -> Option<(f64, f64)> {
        match *self {
            BenignFamily::Example1 { .. } => None,
            BenignFamily::Example2 { b, .. } => {
                let lo = 1.0f64.max(2.0 / (2.0 - b)).max(1.0 / (1.0 - b * b));
                Some((lo, 1.0 / (1.0 - b)))
            }
        }
    }

    /// `Err(N, T)`; continuous in both arguments and strictly decreasing in `N`.
    pub fn error_function(&self, n: f64, t: f64) -> f64 {
        match *self {
            BenignFamily::Example1 { a } => (t.powf(a) / n + t.powf(-a)).sqrt(),
            BenignFamily::Example2 { b, c } => (t.powf(c * (1.0 - b)) / n).sqrt(),
        }
    }

    /// Whether exploring `n` rounds per arm balances exploitation: `N·K >= T·Err(N, T)`.
    pub fn exploration_sufficient(&self, n: usize, horizon: usize, arms: usize) -> bool {
        (n * arms) as f64 >= horizon as f64 * self.error_function(n as f64, horizon as f64)
    }

    /// Smallest `N` in `[1, ⌊T/K⌋]` with `N·K >= T·Err(N, T)`, by bisection on
    /// the monotone predicate.
    pub fn optimal_exploration(&self, horizon: usize, arms: usize) -> Result<usize> {
        if arms == 0 || horizon < arms {
            return Err(Error::domain(format!(
                "optimal exploration needs 1 <= K <= T, got K = {arms}, T = {horizon}"
            )));
        }
        let max_n = horizon / arms;
        if !self.exploration_sufficient(max_n, horizon, arms) {
            return Err(Error::ExplorationExceedsBudget { max_n });
        }
        // Invariant: predicate false below `lo`, true at `hi`.
        let (mut lo, mut hi) = (1, max_n);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.exploration_sufficient(mid, horizon, arms) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(hi)
    }

    /// Exponent `α` of the EtC regret rate `T^α`.
    pub fn regret_exponent(&self) -> f64 {
        match *self {
            BenignFamily::Example1 { a } => ((2.0 + a) / 3.0).max(1.0 - a / 2.0),
            BenignFamily::Example2 { b, c } => (2.0 + c * (1.0 - b)) / 3.0,
        }
    }

    /// Decay exponent `β_T` of `λ_k ∝ k^{-β_T}`.
    pub fn decay_exponent(&self, horizon: f64) -> f64 {
        match *self {
            BenignFamily::Example1 { a } => 1.0 + horizon.powf(-a),
            BenignFamily::Example2 { b, .. } => b,
        }
    }
}
