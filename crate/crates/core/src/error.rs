use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dimension error: expected {expected}, got {actual}")]
    Dimension { expected: String, actual: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("static system, dt undefined")]
    StaticSystem,

    #[error("non-finite value in {context} at flat index {index}")]
    NonFinite { context: String, index: usize },

    #[error("positivity violated: {quantity} = {value:e} at cell {cell} (t = {time})")]
    Positivity {
        quantity: &'static str,
        value: f64,
        cell: usize,
        time: f64,
    },

    #[error("steady state not reached after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("{rejected} of {total} samples rejected (limit 1%)")]
    Rejected { rejected: usize, total: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("nRMSE undefined: reference has zero norm ({0})")]
    UndefinedMetric(String),

    #[error("inverse estimation failed: {0}")]
    Inverse(String),

    #[error("dataset {path}: {message}")]
    Dataset { path: PathBuf, message: String },

    #[error(transparent)]
    Hdf5(#[from] hdf5::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Yaml(#[from] serde_yaml::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input or I/O).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::Positivity { .. }
                | Error::NotConverged { .. }
                | Error::Inverse(_)
                | Error::Rejected { .. }
        )
    }
}
