use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Default number of leading eigenvalue ratios averaged by [`decay_rate`].
pub const DEFAULT_TAU: usize = 10;

/// `tr(Σ̂) = (1/N) Σ_n ‖x_n‖²` for an `N × p` matrix of context rows.
pub fn empirical_trace(rows: &DMatrix<f64>) -> Result<f64> {
    if rows.nrows() == 0 {
        return Err(Error::domain("empirical trace needs at least one row"));
    }
    Ok(rows.norm_squared() / rows.nrows() as f64)
}

/// The `m` largest eigenvalues of `Σ̂ = XᵀX / N`, descending.
///
/// Works on whichever of `XXᵀ/N` (`N × N`) and `XᵀX/N` (`p × p`) is smaller;
/// their nonzero spectra coincide.
pub fn empirical_top_eigs(rows: &DMatrix<f64>, m: usize) -> Result<Vec<f64>> {
    let (n, p) = rows.shape();
    if m == 0 || m > n.min(p) {
        return Err(Error::domain(format!(
            "requested {m} eigenvalues from a {n} x {p} sample"
        )));
    }
    let gram = if n <= p {
        rows * rows.transpose()
    } else {
        rows.transpose() * rows
    } / n as f64;
    let mut eigs: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| b.total_cmp(a));
    eigs.truncate(m);
    Ok(eigs)
}

/// Average log-ratio slope of the leading eigenvalues:
/// `β̂ = (1/τ) Σ_{k=1..τ} log(λ̂_k/λ̂_{k+1}) / log((k+1)/k)`.
///
/// `tau` is clamped to `len - 1` (with a warning) when fewer values are given.
pub fn decay_rate(top_eigs: &[f64], tau: usize) -> Result<f64> {
    if top_eigs.len() < 2 || tau == 0 {
        return Err(Error::domain(format!(
            "decay rate needs tau >= 1 and two eigenvalues, got tau = {tau}, {} values",
            top_eigs.len()
        )));
    }
    let tau = if top_eigs.len() < tau + 1 {
        log::warn!(
            "decay rate window tau = {tau} clamped to {} available ratios",
            top_eigs.len() - 1
        );
        top_eigs.len() - 1
    } else {
        tau
    };
    if let Some(bad) = top_eigs[..=tau].iter().find(|v| !(**v > 0.0)) {
        return Err(Error::domain(format!("eigenvalue {bad} is not positive")));
    }
    let total: f64 = (1..=tau)
        .map(|k| {
            let kf = k as f64;
            (top_eigs[k - 1] / top_eigs[k]).ln() / ((kf + 1.0) / kf).ln()
        })
        .sum();
    Ok(total / tau as f64)
}

/// Power-law model of the spectrum: `λ̃_k = λ̂_1 · k^{-β̂}`.
pub fn modeled_tail(lambda1_hat: f64, beta_hat: f64, k: usize) -> f64 {
    lambda1_hat * (k as f64).powf(-beta_hat)
}

/// Plug-in coherent rank, effective bias and effective variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlugInStats {
    pub k_hat: usize,
    pub b_hat: f64,
    pub v_hat: f64,
}

impl PlugInStats {
    /// Computes `k̂_N`, `B̂` and `V̂` from the modeled spectrum truncated at
    /// `tail_cap`, where `r̂_k = tr/λ̃_{k+1}` and `R̂_k = tr²/Σ_{j=k+1..P} λ̃_j²`.
    pub fn compute(
        trace_hat: f64,
        lambda1_hat: f64,
        beta_hat: f64,
        tail_cap: usize,
        n: usize,
    ) -> Result<Self> {
        let nf = n as f64;
        let k_hat = (0..tail_cap)
            .find(|&k| trace_hat / modeled_tail(lambda1_hat, beta_hat, k + 1) >= nf)
            .ok_or(Error::StatisticsUnavailable { n })?;
        let tail_energy: f64 = (k_hat + 1..=tail_cap)
            .map(|j| modeled_tail(lambda1_hat, beta_hat, j).powi(2))
            .sum();
        let big_r_hat = trace_hat * trace_hat / tail_energy;
        Ok(PlugInStats {
            k_hat,
            b_hat: modeled_tail(lambda1_hat, beta_hat, k_hat.max(1)),
            v_hat: k_hat as f64 / nf + nf / big_r_hat,
        })
    }

    pub fn error_estimate(&self) -> f64 {
        (self.b_hat + self.v_hat).sqrt()
    }
}

/// Everything the adaptive stopping rule needs to know about one arm.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEstimate {
    pub n: usize,
    pub trace_hat: f64,
    pub top_eigs: Vec<f64>,
    pub beta_hat: f64,
    pub lambda1_hat: f64,
    pub tail_cap: usize,
    /// `None` when no `k < tail_cap` reaches `r̂_k >= N`.
    pub plug_in: Option<PlugInStats>,
}

impl SpectralEstimate {
    /// Builds the estimate from an arm's `N × p` exploration contexts.
    pub fn from_rows(rows: &DMatrix<f64>, tau: usize, tail_cap: usize) -> Result<Self> {
        let m = (tau + 1).min(rows.nrows()).min(rows.ncols());
        let trace_hat = empirical_trace(rows)?;
        let top_eigs = empirical_top_eigs(rows, m)?;
        let beta_hat = decay_rate(&top_eigs, tau)?;
        Ok(Self::from_parts(
            rows.nrows(),
            trace_hat,
            top_eigs,
            beta_hat,
            tail_cap,
        ))
    }

    pub fn from_parts(
        n: usize,
        trace_hat: f64,
        top_eigs: Vec<f64>,
        beta_hat: f64,
        tail_cap: usize,
    ) -> Self {
        let lambda1_hat = top_eigs[0];
        let plug_in = PlugInStats::compute(trace_hat, lambda1_hat, beta_hat, tail_cap, n).ok();
        SpectralEstimate {
            n,
            trace_hat,
            top_eigs,
            beta_hat,
            lambda1_hat,
            tail_cap,
            plug_in,
        }
    }
}

/// The AEtC stopping predicate: every arm must satisfy both
/// `N > C_T·tr(Σ̂)` and `N·K >= T·sqrt(B̂ + V̂)`. An arm without plug-in
/// statistics makes the whole predicate false.
pub fn stop_condition(
    n: usize,
    arms: usize,
    horizon: usize,
    c_t: f64,
    per_arm: &[SpectralEstimate],
) -> bool {
    let nf = n as f64;
    let budget = (n * arms) as f64;
    per_arm.iter().all(|est| match est.plug_in {
        Some(stats) => {
            nf > c_t * est.trace_hat && budget >= horizon as f64 * stats.error_estimate()
        }
        None => false,
    })
}
