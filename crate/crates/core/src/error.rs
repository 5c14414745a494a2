use thiserror::Error;

/// Errors produced by every module of the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A box or regression target has zero width or height.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A scalar argument lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Tensor, matrix or map dimensions are inconsistent.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Two sequences that must have equal length do not.
    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    /// An operation that needs at least one element received none.
    #[error("empty input: {0}")]
    Empty(&'static str),

    /// The motion history is too short for the requested estimate.
    #[error("insufficient history: need {needed} boxes, have {available}")]
    InsufficientHistory { needed: usize, available: usize },

    /// Parameter validation failed.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A structured text file could not be parsed or failed validation.
    #[error("{}", format_parse(.key.as_deref(), *.line, .message))]
    Parse {
        key: Option<String>,
        line: Option<usize>,
        message: String,
    },

    /// An aggregation group references a sequence that was not scored.
    #[error("group `{group}` references unknown sequence `{sequence}`")]
    UnknownSequence { group: String, sequence: String },
}

fn format_parse(key: Option<&str>, line: Option<usize>, message: &str) -> String {
    match (key, line) {
        (Some(k), Some(l)) => format!("line {l}, key `{k}`: {message}"),
        (Some(k), None) => format!("key `{k}`: {message}"),
        (None, Some(l)) => format!("line {l}: {message}"),
        (None, None) => message.to_string(),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
