use std::fmt;
use std::path::PathBuf;

use crate::optim::OptimTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Where in an input file a problem was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    /// 1-based line number of a text file.
    Line(usize),
    /// Byte offset into a binary file.
    Byte(u64),
    /// The problem is something missing from the whole file.
    EndOfFile,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Line(n) => write!(f, "line {n}"),
            Location::Byte(n) => write!(f, "byte {n}"),
            Location::EndOfFile => f.write_str("end of file"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatCategory {
    /// The bytes could not be decoded at all.
    Parse,
    /// Decoded fine but the values break a domain invariant.
    Validation,
}

impl fmt::Display for FormatCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatCategory::Parse => f.write_str("parse error"),
            FormatCategory::Validation => f.write_str("validation error"),
        }
    }
}

/// A located parse or validation failure in one of the dataset formats.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {location}: {category}: {message}")]
pub struct FormatError {
    pub path: String,
    pub location: Location,
    pub category: FormatCategory,
    pub message: String,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("underdetermined fit: {points} points cannot determine a degree-{degree} curve")]
    Underdetermined { points: usize, degree: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("optimization failed after {} iterations: {reason}", trace.iterations)]
    OptimizationFailed {
        reason: String,
        trace: Box<OptimTrace>,
    },

    #[error("measurement rejected: {reason} (valid fraction {valid_fraction:.3})")]
    MeasurementRejected { reason: String, valid_fraction: f64 },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
