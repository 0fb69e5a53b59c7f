use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("word length {m} outside 1..={cap}")]
    WordLength { m: u32, cap: u32 },

    #[error("letter {value} at position {position} is not 0 or 1")]
    InvalidLetter { position: usize, value: u8 },

    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("probability p[{index}] = {value} outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: u64, bound: u64 },

    #[error("word lengths differ: {left} vs {right}")]
    WordLengthMismatch { left: u32, right: u32 },

    #[error("chain is reducible; closed classes {closed_classes:?}")]
    Reducible { closed_classes: Vec<Vec<usize>> },

    #[error("stationary solve failed to converge")]
    NoConvergence,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("history of length {found} too short, need at least {needed}")]
    HistoryTooShort { needed: usize, found: usize },

    #[error("no transitions observed at any candidate word length")]
    NoTransitions,

    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("dataset check failed: {0}")]
    Dataset(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
