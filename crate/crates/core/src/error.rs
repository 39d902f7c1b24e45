use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("normalized transmission terms are undefined when the direct-link term is zero")]
    UndefinedNormalization,

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        /// Last iterate of the normalized relay terms.
        last: Vec<f64>,
    },

    #[error("target not bracketed on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("grid oracle refuses m = {0} partners (at most 3)")]
    TooManyPartners(usize),

    #[error("candidate list is empty")]
    EmptyCandidates,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
