use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// A matrix that must be invertible is (numerically) singular.
    #[error("singular matrix: {0}")]
    Singular(String),
    /// Inconsistent dimensions between related arguments.
    #[error("shape mismatch: {0}")]
    Shape(String),
    /// The SDP backend failed to reach a conclusive status.
    #[error("solver failure: {0}")]
    Solver(String),
    /// An iterative routine exhausted its budget or produced NaNs.
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
