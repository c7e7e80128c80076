//! Error type shared by every analysis module.

use thiserror::Error;

use crate::arma::ArmaParams;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("series too short: need at least {needed} observations, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("lag {lag} too large for a series of length {n}")]
    LagTooLarge { lag: usize, n: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("invalid ARMA parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("sigma must be positive, got {0}")]
    InvalidSigma(f64),

    #[error("optimizer failed to converge for ARMA({p},{q}); best log-likelihood {loglik}")]
    ConvergenceFailure {
        p: usize,
        q: usize,
        best: Box<ArmaParams>,
        loglik: f64,
    },

    #[error("no candidate ARMA order could be fitted")]
    AllFitsFailed,

    #[error("singular regression: regressors are collinear")]
    SingularRegression,

    #[error("degenerate series: increments have zero variance")]
    DegenerateSeries,

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("insufficient data: need more than {needed} usable rows, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("panel is empty")]
    EmptyPanel,

    #[error("no unit observed in year {0}")]
    EmptyYear(i64),
}
