use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed or inadmissible input (labels, weights, families).
    #[error("validation error: {0}")]
    Validation(String),
    /// A truncation index is too small for the ratio-test majorant.
    #[error("cutoff too small: {0}")]
    CutoffTooSmall(String),
    /// The requested accuracy or size exceeds the resource guard.
    #[error("resource limit: {message} (best bound achieved: {best_bound:e})")]
    Resource { message: String, best_bound: f64 },
    /// A series is evaluated outside its convergence region.
    #[error("convergence error: {0}")]
    Convergence(String),
}

impl Error {
    pub(crate) fn resource(message: impl Into<String>, best_bound: f64) -> Self {
        Error::Resource {
            message: message.into(),
            best_bound,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
