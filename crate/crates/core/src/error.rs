use thiserror::Error;

/// Errors raised anywhere in the laboratory.
///
/// The variants map onto the CLI exit codes: configuration problems are
/// reported before any simulation starts, everything else is a runtime error.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PvError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("precision error: {0}")]
    Precision(String),
    #[error("degenerate statistic: {0}")]
    Degenerate(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl PvError {
    pub fn is_config(&self) -> bool {
        matches!(self, PvError::Config(_))
    }
}

impl From<std::io::Error> for PvError {
    fn from(e: std::io::Error) -> Self {
        PvError::Io(e.to_string())
    }
}

impl From<csv::Error> for PvError {
    fn from(e: csv::Error) -> Self {
        PvError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for PvError {
    fn from(e: serde_json::Error) -> Self {
        PvError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PvError>;
