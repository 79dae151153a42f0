use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The coherent rank is infinite, so effective bias/variance are undefined.
    #[error("covariance is not benign at N = {n}: no k with r_k >= N")]
    NotBenign { n: usize },

    /// Plug-in statistics could not be formed (no k within the tail cap reaches N).
    #[error("stopping statistics unavailable at N = {n}")]
    StatisticsUnavailable { n: usize },

    #[error("no exploration length N <= {max_n} satisfies N*K >= T*Err(N, T)")]
    ExplorationExceedsBudget { max_n: usize },

    #[error("rank-deficient design: Gram condition estimate {condition:e}")]
    RankDeficient { condition: f64 },

    #[error("design is not overparameterized: N = {n} > p = {p}")]
    NotOverparameterized { n: usize, p: usize },

    #[error("fit failed for arm {arm}: {source}")]
    Fit {
        arm: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by the user's configuration rather than a run.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_))
    }
}
