use thiserror::Error;

/// Errors raised by the simulator and the analytic toolkit.
///
/// Errors split into two families: configuration problems detected before
/// any work is done ([`Error::Config`], [`Error::Domain`]) and contract
/// violations detected while running a pipeline ([`Error::Contract`]). The
/// CLI maps the first family to exit code 1 and the second to exit code 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Whether this error stems from user input rather than a broken invariant.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Config(_) | Error::Parse { .. } | Error::Refused(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
