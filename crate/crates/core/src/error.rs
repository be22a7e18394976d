use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid precision: {0}")]
    InvalidPrecision(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("series needs {needed} terms but the cap is {cap}")]
    MaxTermsExceeded { needed: u64, cap: u64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("integrand is not finite at x = {0}")]
    NonFiniteEvaluation(String),

    #[error("root is not bracketed: f({low}) and f({high}) share a sign")]
    BracketFailure { low: String, high: String },
}

impl Error {
    /// True for the failures that mean "ran out of budget" rather than "bad input".
    pub fn is_convergence_failure(&self) -> bool {
        matches!(
            self,
            Error::MaxTermsExceeded { .. } | Error::NoConvergence(_) | Error::NonFiniteEvaluation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
