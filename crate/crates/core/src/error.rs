use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("cannot parse `{value}` at row {row}, column `{column}` as a number")]
    UnparseableCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("label `{value}` at row {row} is not a valid class label")]
    InvalidLabel { row: usize, value: String },
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("dataset is degenerate: {0}")]
    Degenerate(String),
    #[error("column `{0}` is constant; run clean() before normalizing")]
    ConstantColumn(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),
    #[error("class {class} has {count} rows, need at least {needed}")]
    ClassTooSmall {
        class: u8,
        count: usize,
        needed: usize,
    },
    #[error("training rows contain a single class")]
    SingleClass,
    #[error("feature mask selects no features")]
    EmptyMask,
    #[error("empty row set")]
    EmptyRows,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("empty confusion matrix")]
    EmptyConfusion,
    #[error("no combinations to run")]
    EmptyGrid,
    #[error("every combination failed")]
    AllFailed,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Whether the failure stems from the input data rather than from
    /// parameters or internal invariants.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Csv(_)
                | Error::MissingLabelColumn(_)
                | Error::DuplicateColumn(_)
                | Error::UnparseableCell { .. }
                | Error::InvalidLabel { .. }
                | Error::InvalidDataset(_)
                | Error::Degenerate(_)
                | Error::ConstantColumn(_)
                | Error::UndefinedCorrelation(_)
                | Error::ClassTooSmall { .. }
                | Error::SingleClass
                | Error::EmptyRows
        )
    }
}
