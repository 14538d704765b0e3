//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by datasets, models, references and explainers.
#[derive(Debug, Error)]
pub enum Error {
    /// Filesystem-level failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Malformed CSV input (quoting, ragged rows, bad cells).
    #[error("csv error: {0}")]
    Csv(String),

    /// A column name that does not exist in the dataset or reference.
    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    /// Two columns share the same name.
    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),

    /// An operation received an empty vector, dataset or reference where
    /// at least one element is required.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A filter produced zero rows where a non-empty reference is required.
    /// An empty context is never silently substituted.
    #[error("empty reference: {0}")]
    EmptyReference(String),

    /// NaN or infinity encountered where finite values are required.
    #[error("non-finite value in column {column:?} at row {row}")]
    NonFinite { column: String, row: usize },

    /// Predictor declares features the supplied data does not provide.
    #[error("feature mismatch: data lacks predictor features {missing:?}")]
    FeatureMismatch { missing: Vec<String> },

    /// The permutation-importance ratio divides by the baseline loss,
    /// which is zero on this data.
    #[error("undefined importance ratio: baseline loss is zero")]
    ZeroBaselineLoss,

    /// Feature takes a single value, so no grid, bins or ranks exist for it.
    #[error("constant feature {0:?}: {1}")]
    ConstantFeature(String, String),

    /// Exact Shapley enumerates 2^p coalitions; p is capped.
    #[error("{n_features} features exceed the exact-Shapley guard of {max}; use shapley_sampled instead")]
    TooManyFeatures { n_features: usize, max: usize },

    /// Violation of the line protocol spoken with an external model process.
    #[error("subprocess protocol error: {0}")]
    Protocol(String),

    /// Catch-all for argument validation (documented per operation).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
