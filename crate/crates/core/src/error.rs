use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violated an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration value is missing, unparsable or violates an invariant.
    /// The message always names the offending key.
    #[error("{key} {message}")]
    Config { key: String, message: String },

    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),

    #[error("policy `{policy}`: {message}")]
    PolicyParam { policy: String, message: String },

    #[error("malformed results table: {0}")]
    Results(String),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }

    /// True for errors caused by user-supplied configuration (as opposed to
    /// misuse of the library API).
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::UnknownPolicy(_) | Error::PolicyParam { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
