//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by any tripeval operation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv parse error: {0}")]
    Csv(#[from] csv::Error),

    #[error("line {line}: expected {expected} fields, found {found}")]
    RowArity {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("unknown column {0:?}")]
    UnknownColumn(String),

    #[error("header mismatch: schema column {0:?} missing from file")]
    MissingColumn(String),

    #[error("no column named {0:?} in table")]
    NoSuchColumn(String),

    #[error("column {0:?} is not categorical")]
    NotCategorical(String),

    #[error("column {0:?} is not a float column")]
    NotFloat(String),

    #[error("refusing to drop target column {0:?}")]
    DropTarget(String),

    #[error("invalid schema: {0}")]
    Schema(String),

    #[error("split sizes {requested} exceed available rows {available}")]
    SplitTooLarge { requested: usize, available: usize },

    #[error("tables were encoded with different descriptors ({left} vs {right} features)")]
    EncoderMismatch { left: usize, right: usize },

    #[error("empty graph: table has no rows")]
    EmptyGraph,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error(
        "sinkhorn did not converge within {iterations} iterations \
         (marginal violation {violation:.3e}, tolerance {tolerance:.3e})"
    )]
    SinkhornDiverged {
        iterations: usize,
        violation: f64,
        tolerance: f64,
    },

    #[error("undefined R^2: true values are constant")]
    UndefinedRSquared,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("{0}")]
    Config(String),
}

impl Error {
    /// Process exit code category: 2 for data/usage problems with inputs,
    /// 3 for numeric failures inside a computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SinkhornDiverged { .. } | Error::UndefinedRSquared | Error::NonFinite(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
