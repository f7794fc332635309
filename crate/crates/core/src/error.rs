use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("table for `{symbol}` has {found} entries, expected {expected}")]
    TableLength {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("table for `{symbol}` contains {value}, outside the carrier of size {size}")]
    OutOfRange {
        symbol: String,
        value: u64,
        size: usize,
    },
    #[error("duplicate operation symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("unknown operation symbol `{0}`")]
    UnknownSymbol(String),
    #[error("`{symbol}` has arity {arity} but was applied to {given} arguments")]
    ArityMismatch {
        symbol: String,
        arity: usize,
        given: usize,
    },
    #[error("assignment has {given} values but the term needs {needed}")]
    AssignmentTooShort { needed: usize, given: usize },
    #[error("term has width {width}, at most {max} allowed here")]
    Width { width: usize, max: usize },
    #[error("algebras `{0}` and `{1}` do not share a signature")]
    SignatureMismatch(String, String),
    #[error("element {value} is outside the carrier of size {size}")]
    ElementOutOfRange { value: u64, size: usize },
    #[error("tuple coding space of {what} does not fit in 128 bits; use the fast method")]
    CodingOverflow { what: String },
    #[error("closure limit of {limit} members exceeded")]
    LimitExceeded { limit: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}
