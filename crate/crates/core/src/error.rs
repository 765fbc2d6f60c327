use thiserror::Error;

/// Errors raised by the sampling-bound computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A root bracket could not be established.
    #[error("bracket expansion failed for {what}: last bracket [{lo}, {hi}]")]
    Bracket { what: String, lo: f64, hi: f64 },

    /// An iterative numerical procedure failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A function value overflowed the f64 range.
    #[error("overflow evaluating {what} at z = {z}")]
    Overflow { what: &'static str, z: f64 },

    /// The requested combination is not implemented.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A density or perturbation precondition of a bound is violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}

pub(crate) fn ensure_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        invalid(format!("{name} must be finite, got {v}"))
    }
}
