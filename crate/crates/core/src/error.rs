use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// An oracle or checker refused an input that exceeds its size guard.
    #[error("size guard `{guard}` violated: {detail}")]
    Guard { guard: &'static str, detail: String },

    #[error("empty group: {0}")]
    EmptyGroup(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn instance(msg: impl Into<String>) -> Self {
        Error::InvalidInstance(msg.into())
    }

    pub(crate) fn guard(guard: &'static str, detail: impl Into<String>) -> Self {
        Error::Guard {
            guard,
            detail: detail.into(),
        }
    }
}
