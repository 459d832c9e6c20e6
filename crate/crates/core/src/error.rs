use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("unsupported distribution variant: {0}")]
    UnsupportedVariant(&'static str),

    #[error("position modulus {modulus} is not a multiple of game modulus {game}")]
    IncompatibleModulus { modulus: u64, game: u64 },

    #[error("outside the first-order regime: {0}")]
    OutOfRegime(String),

    #[error("mixing-probability bound undefined when both noise scales vanish")]
    UndefinedBound,

    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

impl Error {
    /// True for errors caused by caller-supplied parameters (as opposed to
    /// failures discovered while computing).
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::OutOfRegime(_) | Error::Capacity(_))
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
