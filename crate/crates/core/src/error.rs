use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure categories shared by every module.
///
/// The CLI maps [`Error::category`] onto exit codes and machine-readable
/// error records, so new variants must pick one of the existing categories.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("boundary conflict: {0}")]
    BoundaryConflict(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("no convergence after {iterations} iterations (best residual {best_residual:.3e})")]
    Convergence {
        iterations: usize,
        best_residual: f64,
    },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("ambiguous input: {0}")]
    Ambiguity(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) | Error::BoundaryConflict(_) | Error::Ambiguity(_) => "domain",
            Error::Resource(_) => "resource",
            Error::Convergence { .. } => "convergence",
            Error::Construction(_) => "construction",
            Error::Format(_) | Error::Io(_) | Error::Json(_) => "io",
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
}
