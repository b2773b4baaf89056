use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index:?} out of range for dims {dims:?}")]
    Index { index: Vec<usize>, dims: Vec<usize> },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("conditioning block has marginal density {density:e} at the conditioning point")]
    DegenerateConditioning { density: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    /// Process exit status used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Index { .. } | Error::Argument(_) => 2,
            Error::Data(_) | Error::Io(_) => 3,
            Error::Degenerate(_) | Error::DegenerateConditioning { .. } | Error::Numeric(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
