use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Shapes or index sets that do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    /// A factorization or solve that broke down numerically.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The requested operation has no closed form for this function variant.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A scalar parameter outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// An iterative solve ran out of iterations.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn check_dim(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(structural(format!("{what}: expected length {expected}, got {got}")))
    }
}
