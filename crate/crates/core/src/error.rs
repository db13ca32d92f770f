use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input: empty lists, unsorted times, mismatched sizes.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A factorization or solver failed numerically.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A truncation or grid is too coarse for the requested accuracy.
    #[error("insufficient precision: {message}")]
    Precision { message: String, suggested: Option<usize> },

    #[error("did not converge: {0}")]
    Convergence(String),

    /// A Monte Carlo quantity left the range where its transform is stable.
    #[error("out of range: {0}")]
    Range(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn argument<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
