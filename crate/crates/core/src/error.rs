use thiserror::Error;

/// Errors produced anywhere in the pipeline.
///
/// The variants are grouped so a front end can map them onto distinct exit
/// statuses (see [`Error::category`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("ingestion error at row {row}, column {column}: {reason}")]
    Ingest {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("too many rejected rows: {rejected} of {total} (more than half)")]
    TooManyRejected { rejected: usize, total: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("labels contain a single class ({0}); both risk and no-risk students are required")]
    SingleClass(String),

    #[error("graph error: {0}")]
    Graph(String),

    #[error("power iteration did not converge after {iterations} iterations (last change {last_delta:e})")]
    NoConvergence {
        iterations: usize,
        last_delta: f64,
        last_iterate: Vec<f64>,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("malformed tree: {0}")]
    MalformedTree(String),

    #[error("exact Shapley enumeration over {used} used features exceeds the limit of {limit}; use tree_shap instead")]
    TooManyFeatures { used: usize, limit: usize },

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("unknown feature {name:?}; valid names: {valid}")]
    UnknownFeature { name: String, valid: String },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Coarse error classes used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Io,
    Schema,
    SingleClass,
    Numerical,
    Input,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Io { .. } => ErrorCategory::Io,
            Error::Schema(_)
            | Error::Ingest { .. }
            | Error::TooManyRejected { .. }
            | Error::Json(_)
            | Error::Csv(_)
            | Error::UnknownFeature { .. } => ErrorCategory::Schema,
            Error::SingleClass(_) => ErrorCategory::SingleClass,
            Error::NoConvergence { .. } | Error::Diverged(_) | Error::MalformedTree(_) => {
                ErrorCategory::Numerical
            }
            _ => ErrorCategory::Input,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
