use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, IgtError>;

#[derive(Debug, Error)]
pub enum IgtError {
    #[error("dimension mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("singular value decomposition did not converge after {iterations} iterations")]
    SvdNoConvergence { iterations: usize },

    #[error("power iteration did not converge after {iterations} iterations (last relative change {last_change:e})")]
    PowerIterationNoConvergence { iterations: usize, last_change: f64 },

    #[error("non-finite gradient in layer {layer} at epoch {epoch}")]
    NonFiniteGradient { layer: usize, epoch: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero normalizer in expected operator (n1={n1}, n2={n2}, p={p}, q={q})")]
    ZeroNormalizer { n1: usize, n2: usize, p: f64, q: f64 },

    #[error("ergodicity premise violated: mean deviation {deviation:.6e} exceeds 3 standard errors ({standard_error:.6e})")]
    ErgodicityViolated {
        deviation: f64,
        standard_error: f64,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("missing dataset file {path}; expected layout: graph.txt, features.txt, labels.txt, optional split_train.txt/split_val.txt/split_test.txt")]
    MissingDatasetFile { path: PathBuf },

    #[error("dataset {dataset}: {what} mismatch, expected {expected}, found {found}")]
    DatasetMismatch {
        dataset: String,
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("insufficient nodes: {0}")]
    InsufficientNodes(String),

    #[error("empty training split")]
    EmptyTrainSplit,

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("model format error: {0}")]
    ModelFormat(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
