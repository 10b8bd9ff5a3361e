use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on operation inputs was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The least-squares regressor is rank deficient or too ill conditioned.
    #[error("identifiability: {0}")]
    Identifiability(String),

    /// A structured text file could not be parsed.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// A run configuration failed validation.
    #[error("config validation: {0}")]
    Validation(String),

    /// The NLP solver failed to produce a usable point.
    #[error("solver: {0}")]
    Solver(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 validation, 3 solver, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Identifiability(_) | Error::Validation(_) => 2,
            Error::Solver(_) => 3,
            Error::Parse { .. } | Error::Io(_) => 4,
        }
    }
}
