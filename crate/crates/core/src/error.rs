use thiserror::Error;

/// Errors raised by domain construction, classification and rule analysis.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("size limit exceeded: {what} is {actual}, limit is {limit}")]
    SizeLimit {
        what: &'static str,
        actual: u128,
        limit: u128,
    },

    #[error("restriction is unsatisfiable: {0}")]
    Unsatisfiable(String),

    #[error("preference domain must contain at least one ranking")]
    EmptyDomain,

    #[error("invalid ranking: {0}")]
    InvalidRanking(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("not a subdomain: {0}")]
    NotSubset(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("invalid restriction map: {0}")]
    InvalidMap(String),

    #[error("two-step assignment: {0}")]
    Assignment(String),
}

impl Error {
    /// True for guard violations (factorial cap, profile cap, enumeration guard).
    pub fn is_size_limit(&self) -> bool {
        matches!(self, Error::SizeLimit { .. })
    }

    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
