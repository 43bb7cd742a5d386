use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty ({rows} rows, {features} features, {labels} labels)")]
    EmptyDataset {
        rows: usize,
        features: usize,
        labels: usize,
    },

    #[error("label value {value} at row {row}, label {label} is not -1 or +1 (offending rows: {rows:?})")]
    BadLabelValue {
        row: usize,
        label: usize,
        value: f64,
        rows: Vec<usize>,
    },

    #[error("non-finite feature at row {row}, column {column} (offending rows: {rows:?})")]
    NonFiniteFeature {
        row: usize,
        column: usize,
        rows: Vec<usize>,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("kernel matrix is not symmetric: max |K - K^T| = {max_asymmetry:e} exceeds {tolerance:e}")]
    AsymmetricKernel { max_asymmetry: f64, tolerance: f64 },

    #[error("singular value decomposition did not converge")]
    SvdFailure,

    #[error("objective became non-finite at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },

    #[error("no usable rows for {metric}")]
    NoUsableRows { metric: &'static str },

    #[error("label predictions are not the sign of the scores at row {row}, label {label}")]
    InconsistentPredictions { row: usize, label: usize },

    #[error("invalid hyper-parameters: {0}")]
    InvalidHyperParams(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("label token {token:?} at line {line} is outside {{0, 1, -1, +1}}")]
    LabelOutOfRange { line: usize, token: String },

    #[error("line {line} has {found} fields, expected {expected}")]
    InconsistentWidth {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("cannot build {folds} folds from {rows} rows")]
    TooFewRows { rows: usize, folds: usize },

    #[error("unsupported model file version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("invalid model file: {0}")]
    InvalidModelFile(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse failure classes, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parse,
    Validation,
    Numeric,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse { .. }
            | Error::LabelOutOfRange { .. }
            | Error::InconsistentWidth { .. }
            | Error::InvalidModelFile(_)
            | Error::Io(_)
            | Error::Json(_) => ErrorClass::Parse,
            Error::SvdFailure
            | Error::NonFiniteObjective { .. }
            | Error::AsymmetricKernel { .. } => ErrorClass::Numeric,
            _ => ErrorClass::Validation,
        }
    }
}
