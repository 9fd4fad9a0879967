use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("prime {0} is too large for vector arithmetic (must be below 256)")]
    UnsupportedPrime(u64),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid quadratic space: {0}")]
    InvalidSpace(String),

    #[error("subspace is not isotropic")]
    NotIsotropic,

    #[error("subspace is not maximal isotropic")]
    NotMaximalIsotropic,

    #[error("enumeration cap of {cap} canonicalizations exceeded")]
    EnumerationCap { cap: u64 },

    #[error("no quarter reduction vector: {0}")]
    NoQuarterVector(String),

    #[error("event has probability zero: {0}")]
    ZeroProbability(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable code used in CLI error payloads.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "not_prime",
            Error::UnsupportedPrime(_) => "unsupported_prime",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InvalidSpace(_) => "invalid_space",
            Error::NotIsotropic => "not_isotropic",
            Error::NotMaximalIsotropic => "not_maximal_isotropic",
            Error::EnumerationCap { .. } => "enumeration_cap",
            Error::NoQuarterVector(_) => "no_quarter_vector",
            Error::ZeroProbability(_) => "zero_probability",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }
}
