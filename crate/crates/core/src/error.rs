use thiserror::Error;

use crate::month::Month;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numeric,
}

#[derive(Error, Debug)]
pub enum Error {
    #[error("parse error at line {line}: expected {expected} fields, got {got}")]
    Ragged {
        line: usize,
        expected: usize,
        got: usize,
    },

    #[error("parse error at line {line}, field {field}: {message}")]
    Parse {
        line: usize,
        field: usize,
        message: String,
    },

    #[error("empty input")]
    EmptyInput,

    #[error("value out of range: {0}")]
    Range(String),

    #[error("duplicate location id '{0}'")]
    DuplicateLocation(String),

    #[error("location '{0}' is missing at some but not all time steps")]
    PartialMissing(String),

    #[error("base period has no data for calendar month index {0}")]
    InsufficientCoverage(u8),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("series shorter than one window ({months} months, window {window})")]
    NoBlocks { months: usize, window: usize },

    #[error("irregular coordinate lattice: {0}")]
    Lattice(String),

    #[error("variable {0} is not available")]
    MissingVariable(String),

    #[error("layout error: {0}")]
    Layout(String),

    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    #[error("per-row normalization needs at least 2 locations, got {0}")]
    DegenerateNormalization(usize),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("no training rows")]
    EmptyTraining,

    #[error("training diverged at epoch {0}")]
    Divergence(usize),

    #[error("offset {offset} is not a multiple of base offset {base}")]
    UnsupportedOffset { offset: usize, base: usize },

    #[error("unknown location '{0}'")]
    UnknownLocation(String),

    #[error("no present (prediction, truth) pairs to compare")]
    EmptyComparison,

    #[error("persistence baseline incomplete: {0}")]
    IncompleteBaseline(String),

    #[error("invalid split assignment: {0}")]
    Split(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("month {0} is outside the series")]
    MonthOutOfRange(Month),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::UnsupportedOffset { .. } => ErrorKind::Usage,
            Error::Numeric(_) | Error::Divergence(_) => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        }
    }

    /// Short stable identifier for machine-parsable error lines.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Ragged { .. } | Error::Parse { .. } => "parse",
            Error::EmptyInput => "empty_input",
            Error::Range(_) => "range",
            Error::DuplicateLocation(_) => "duplicate_location",
            Error::PartialMissing(_) => "partial_missing",
            Error::InsufficientCoverage(_) => "insufficient_coverage",
            Error::Shape(_) => "shape",
            Error::NoBlocks { .. } => "no_blocks",
            Error::Lattice(_) => "lattice",
            Error::MissingVariable(_) => "missing_variable",
            Error::Layout(_) => "layout",
            Error::InsufficientHistory(_) => "insufficient_history",
            Error::DegenerateNormalization(_) => "degenerate_normalization",
            Error::Numeric(_) => "numeric",
            Error::EmptyTraining => "empty_training",
            Error::Divergence(_) => "divergence",
            Error::UnsupportedOffset { .. } => "unsupported_offset",
            Error::UnknownLocation(_) => "unknown_location",
            Error::EmptyComparison => "empty_comparison",
            Error::IncompleteBaseline(_) => "incomplete_baseline",
            Error::Split(_) => "split",
            Error::Config(_) => "config",
            Error::MonthOutOfRange(_) => "month_out_of_range",
            Error::ModelFormat(_) => "model_format",
            Error::Io { .. } => "io",
        }
    }
}
