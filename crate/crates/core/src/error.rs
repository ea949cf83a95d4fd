use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: expected {expected} degrees of freedom, got {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error(
        "covariance factorization failed for a {size}x{size} matrix (alpha = {alpha}, \
         max jitter {max_jitter:e}, min eigenvalue estimate {min_eigenvalue:e})"
    )]
    Factorization {
        size: usize,
        alpha: f64,
        max_jitter: f64,
        min_eigenvalue: f64,
    },

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("expression error: {0}")]
    Expr(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
