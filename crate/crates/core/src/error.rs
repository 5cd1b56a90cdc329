use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error(
        "parse error at data row {row}, column `{column}`: cannot parse `{value}` as a number"
    )]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("degenerate time grid: {0}")]
    DegenerateGrid(String),

    #[error("estimation error: {0}")]
    Estimation(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("tree fit error: {0}")]
    Fit(String),

    #[error("prediction error: {0}")]
    Prediction(String),

    #[error("distance error: {0}")]
    Distance(String),

    #[error(
        "no neighbours within widened epsilon {epsilon_used}; per-machine minimum distances: {min_distances:?}"
    )]
    NoNeighbors {
        epsilon_used: f64,
        min_distances: Vec<f64>,
    },

    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("tuning failed on fold {fold}: {source}")]
    Tuning {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dataset `{name}` failed: {source}")]
    Dataset {
        name: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the failure traces back to bad input (files, schema, config)
    /// rather than an internal fault.
    pub fn is_user_error(&self) -> bool {
        match self {
            Error::Schema(_)
            | Error::Parse { .. }
            | Error::Validation(_)
            | Error::Params(_)
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::Json(_) => true,
            Error::Dataset { source, .. } | Error::Tuning { source, .. } => source.is_user_error(),
            _ => false,
        }
    }
}
