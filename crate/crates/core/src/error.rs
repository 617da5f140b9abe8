//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input data.
    #[error("invalid input: {0}")]
    Input(String),

    /// Missing or inconsistent configuration (e.g. unset constants).
    #[error("configuration error: {0}")]
    Config(String),

    /// Two objects that must live on the same domain do not.
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    /// Time stepping produced a non-finite state.
    #[error("integration diverged at t = {time}")]
    Divergence { time: f64 },

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Input(_) => "input",
            Error::Config(_) => "config",
            Error::DomainMismatch(_) => "domain-mismatch",
            Error::Divergence { .. } => "divergence",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
