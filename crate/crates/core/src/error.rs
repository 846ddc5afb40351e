use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input supplied by the caller or a file.
    #[error("input error: {0}")]
    Input(String),

    /// A precondition of an operation was broken (e.g. measuring distance to
    /// a blob that has never been observed).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Process exit code for the command-line tool: 1 for input errors,
    /// 2 for contract violations.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Contract(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
