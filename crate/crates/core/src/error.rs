use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("rejection sampling gave up after {attempts} attempts (acceptance rate {acceptance_rate:.3e}, {accepted} of {wanted} accepted)")]
    Sampling {
        attempts: u64,
        accepted: usize,
        wanted: usize,
        acceptance_rate: f64,
    },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("exhaustive search refused: {vertices} vertices exceeds the budget of {budget}")]
    OracleBudget { vertices: usize, budget: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable class name, used by the command line for its
    /// single-line error report.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Sampling { .. } => "sampling",
            Error::DegenerateGeometry(_) => "degenerate_geometry",
            Error::OracleBudget { .. } => "oracle_budget",
            Error::Parse { .. } => "parse",
            Error::Shape(_) => "shape",
            Error::Training(_) => "training",
            Error::UndefinedCorrelation(_) => "undefined_correlation",
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                "not_found"
            }
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
        }
    }
}
