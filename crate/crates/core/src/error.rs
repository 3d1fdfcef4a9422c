use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// [`Error::is_numerical`] separates numerical failures (solver did not
/// converge, polytope too large, ...) from invalid input; the CLI maps
/// them to distinct exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("column `{0}` not found in header")]
    MissingColumn(String),
    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },
    #[error("classification target has {0} distinct labels, expected 2")]
    NonBinaryTarget(usize),
    #[error("target column is constant")]
    ConstantTarget,
    #[error("every predictor column has zero variance")]
    AllColumnsConstant,
    #[error("too few samples: {0}")]
    TooFewSamples(String),
    #[error("empty lambda grid: {0}")]
    EmptyGrid(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("sign vector inconsistent with coefficients: {0}")]
    InvalidSigns(String),
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("data appear separable: unpenalized logistic coefficients diverge")]
    SeparableData,
    #[error("fold too small: {0}")]
    FoldTooSmall(String),
    #[error("polyhedron is unbounded")]
    Unbounded,
    #[error("polytope is infeasible")]
    Infeasible,
    #[error("reduced dimension {dim} exceeds the cap of {cap} (raise --dim-cap to allow it)")]
    DimensionTooLarge { dim: usize, cap: usize },
    #[error("reference solution has an empty support")]
    EmptySupport,
    #[error("mean is zero")]
    ZeroMean,
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::SeparableData
                | Error::Unbounded
                | Error::Infeasible
                | Error::DimensionTooLarge { .. }
                | Error::EmptySupport
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
