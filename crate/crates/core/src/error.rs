use alloc::string::String;

use crate::linalg::Rank1Triplet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("empty matrix")]
    Empty,
    #[error("tolerance must be positive and max_iter at least 1")]
    InvalidParameter,
    #[error("power iteration did not converge (residual {residual:e})")]
    NotConverged { best: Rank1Triplet, residual: f64 },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("sparsity {s} exceeds signal dimension {m}")]
    SparsityTooLarge { s: usize, m: usize },
    #[error("dimension mismatch: {what} expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("column {index}: {source}")]
    Column {
        index: usize,
        #[source]
        source: alloc::boxed::Box<Error>,
    },
    #[error("atom {index} is not unit norm (norm {norm})")]
    NotNormalized { index: usize, norm: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("all rows annihilated; reduce λ")]
    AllRowsAnnihilated,
    #[error("model has an empty support set")]
    EmptySupport,
    #[error("dataset has no inliers")]
    NoInliers,
    #[error("dataset has no labels")]
    MissingLabels,
    #[error("balanced accuracy needs both classes among the labels")]
    SingleClass,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
