//! Loading, cleaning, encoding, scaling, splitting and synthesizing
//! ADHD-200-style phenotypic tables.

mod csv_io;
mod features;
mod labels;
mod preprocess;
mod schema;
mod split;
mod synth;
mod table;

use std::path::PathBuf;

pub use csv_io::{load_csv, read_csv, CsvOptions};
pub use features::FeatureMatrix;
pub use labels::{make_labels, LabelVector, Task};
pub use preprocess::{
    apply_impute, apply_standardize, encode_categoricals, impute_mean, standardize,
    PreprocessState, MISSING_CATEGORY,
};
pub use schema::{
    adhd200_schema, ColumnKind, ColumnSchema, Schema, ADHD200_COLUMNS, DX_COLUMN, SUBJECT_COLUMN,
};
pub use split::{split, split_indices, SplitData, SplitIndices};
pub use synth::{synth_generate, ADHD200_CLASS_COUNTS, MISSING_RATE};
pub use table::{merge_tables, Column, ColumnValues, DataTable};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("header mismatch: absent columns {absent:?}, unknown columns {unknown:?}")]
    HeaderMismatch {
        absent: Vec<String>,
        unknown: Vec<String>,
    },
    #[error("table has no data rows")]
    EmptyTable,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("duplicate column name '{0}'")]
    DuplicateColumn(String),
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("numeric column '{0}' has no observed values")]
    AllMissingColumn(String),
    #[error("column '{0}' still has missing cells")]
    UnimputedMissing(String),
    #[error("column '{0}' is not numerically encoded")]
    NotEncoded(String),
    #[error("unknown category '{value}' in column '{column}'")]
    UnknownCategory { column: String, value: String },
    #[error("invalid DX value '{value}' at row {row}")]
    InvalidDxValue { row: usize, value: String },
    #[error("degenerate split: {train} of {n} rows in training part")]
    DegenerateSplit { n: usize, train: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value in feature matrix")]
    NonFinite,
    #[error("empty input")]
    EmptyInput,
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
