use std::path::PathBuf;

use thiserror::Error;

/// Where in a score table a problem was found. Rows are 1-based data rows
/// (the header is row 0), columns are 1-based CSV columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub row: usize,
    pub column: usize,
    pub header: Option<String>,
}

impl std::fmt::Display for Location {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "row {}, column {}", self.row, self.column)?;
        if let Some(h) = &self.header {
            write!(f, " ({h})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: malformed header: {reason}")]
    MalformedHeader { path: PathBuf, reason: String },

    #[error("{path}: {location}: {reason}")]
    MalformedCell {
        path: PathBuf,
        location: Location,
        reason: String,
    },

    #[error("{path}: row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        path: PathBuf,
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("{path}: table has no data rows")]
    EmptyTable { path: PathBuf },

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("attribute sets differ: missing from generated [{}], missing from reference [{}]", missing_in_gen.join(", "), missing_in_ref.join(", "))]
    AttributeMismatch {
        missing_in_gen: Vec<String>,
        missing_in_ref: Vec<String>,
    },

    #[error("no decision threshold for attribute `{0}`")]
    MissingThreshold(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("subsample size {size} exceeds population of {population} rows")]
    SizeExceedsPopulation { size: usize, population: usize },

    #[error("invalid resample plan: {0}")]
    InvalidPlan(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the caller's data rather than by the
    /// environment.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::AttributeMismatch { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
