use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown space kind `{0}`")]
    UnknownKind(String),

    #[error("{what} would produce about {estimate} points, above the cap of {cap}")]
    CapExceeded { what: String, estimate: u128, cap: usize },

    #[error("region has {vertices} vertices, above the exact-search cap of {cap}; use the greedy search")]
    RegionTooLarge { vertices: usize, cap: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed document {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("assertion failed: {0}")]
    Assertion(String),
}

impl Error {
    /// Process exit code for the command line surface.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::UnknownKind(_) | Error::RegionTooLarge { .. } => 1,
            Error::Io { .. } | Error::Format { .. } => 2,
            Error::CapExceeded { .. } => 3,
            Error::Assertion(_) => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
