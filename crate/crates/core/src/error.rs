use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed input text. `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown item `{0}`")]
    UnknownItem(String),

    /// A parameter outside its documented range.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("confidence undefined: antecedent has zero support")]
    UndefinedConfidence,

    #[error("exhaustive enumeration refused for {items} items (limit {limit})")]
    TooManyItems { items: usize, limit: usize },

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    /// The sanitized database still yields a sensitive rule.
    #[error("hiding postcondition failed: {0}")]
    HidingFailed(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
