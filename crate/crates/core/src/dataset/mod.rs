//! Daily series ingestion, descriptive statistics, regime windows and
//! chronological train/validation/test splitting.

mod csv_io;
mod frame;
mod regime;
mod stats;
pub mod synthetic;

use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub use csv_io::{
    load_csv, read_csv, read_table, save_csv, write_csv, FillPolicy, LoadOptions, Schema, Table,
};
pub use frame::{Column, ColumnRole, ObservationRow, TimeSeriesFrame};
pub use regime::{
    check_disjoint, chronological_split, slice_regime, BlockAccess, RegimeSpec, SplitFractions,
    SplitFrame, MIN_SPLIT_ROWS,
};
pub use stats::{column_stats, descriptive_stats, ColumnStats, DescriptiveStats};
pub use synthetic::generate_synthetic;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(String),
    #[error("missing column '{0}'")]
    MissingColumn(String),
    #[error("first header field must be 'date', found '{0}'")]
    MissingDateColumn(String),
    #[error("invalid column name '{0}'")]
    InvalidColumnName(String),
    #[error("duplicate column '{0}'")]
    DuplicateColumn(String),
    #[error("frame has no input column")]
    NoInputColumn,
    #[error("frame has no target column")]
    NoTargetColumn,
    #[error("row {row}: expected {expected} values, found {found}")]
    RowWidth {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: unparseable date '{raw}'")]
    BadDate { row: usize, raw: String },
    #[error("dates not strictly increasing at row {row} ({date})")]
    NonMonotonicDates { row: usize, date: NaiveDate },
    #[error("row {row}, column '{column}': missing or non-finite value '{raw}'")]
    NonFiniteValue {
        column: String,
        row: usize,
        raw: String,
    },
    #[error("row {row}, column '{column}': log transform needs a positive value, found {value}")]
    NonPositiveLog {
        column: String,
        row: usize,
        value: f64,
    },
    #[error("column '{column}' has {rows} rows, need at least 2")]
    InsufficientRows { column: String, rows: usize },
    #[error("regime '{name}': start {start} must precede end {end}")]
    InvalidRegime {
        name: String,
        start: NaiveDate,
        end: NaiveDate,
    },
    #[error("regimes '{0}' and '{1}' overlap")]
    OverlappingRegimes(String, String),
    #[error("regime '{0}' selects no rows")]
    EmptyRegime(String),
    #[error("bad split fractions: {0}")]
    BadFractions(String),
    #[error("frame too small: {rows} rows, need at least {minimum}")]
    FrameTooSmall { rows: usize, minimum: usize },
    #[error("frames have different columns")]
    ColumnMismatch,
    #[error("invalid synthetic spec: {0}")]
    InvalidSynthetic(String),
}
