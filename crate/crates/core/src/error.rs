use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole: linear fractional map has a zero denominator at the evaluation point")]
    Pole,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("transfer operator diverges for t - v = {0} (need t - v > 0)")]
    Divergent(f64),
    #[error("power iteration did not converge after {iterations} iterations (last estimate {lambda})")]
    NonConvergence { iterations: usize, lambda: f64 },
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("worst-case bound violated for ({p}, {q}): {detail}")]
    BoundViolation { p: String, q: String, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
