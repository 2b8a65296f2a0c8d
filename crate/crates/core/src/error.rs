use thiserror::Error;

/// Errors raised while validating inputs or running a transform.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric value lies outside its admissible range.
    #[error("{what} out of range: {detail}")]
    Range { what: &'static str, detail: String },

    /// Inconsistent or unsupported configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A computation would exceed a configured resource cap.
    #[error("depth {depth}: {count} paths exceed the cap of {cap}")]
    PathCap { depth: usize, count: usize, cap: usize },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn range(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Range {
            what,
            detail: detail.into(),
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
