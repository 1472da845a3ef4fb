//! Error type shared by all modules.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("series is zero to truncation order {trunc}; raise the truncation or flag the component as identically zero")]
    ZeroToTruncation { trunc: u32 },

    #[error("series is not normal crossings at the origin: {0}")]
    NotNormalCrossings(String),

    #[error("series not divisible by {what}")]
    NotDivisible { what: String },

    #[error("translation by a nonzero offset needs an exact polynomial, got a series truncated at {trunc}")]
    TranslateTruncated { trunc: u32 },

    #[error("truncation order {have} fell below the working floor {floor}; re-run with input truncation >= {need}")]
    TruncationUnderflow { have: u32, floor: u32, need: u32 },

    #[error("could not certify {decision} at precision {prec} (cap {cap}); the data may be degenerate")]
    PrecisionExhausted {
        decision: String,
        prec: u32,
        cap: u32,
    },

    #[error("budget exceeded during {stage}: {detail}")]
    BudgetExceeded { stage: String, detail: String },

    #[error("could not certify separation of root clusters: {0}")]
    SeparationFailed(String),

    #[error("exponent tuples {a:?} and {b:?} are incomparable; the tracked set was not resolved to normal crossings")]
    IncomparableExponents { a: Vec<u32>, b: Vec<u32> },

    #[error("order data violates the real lifting constraints: {0}")]
    RealOrderViolation(String),

    #[error("point is not in the invariant image: {0}")]
    NotInImage(String),

    #[error("operation not supported for this family: {0}")]
    UnsupportedFamily(String),

    #[error("verification failed: {0}")]
    VerificationFailed(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Input(_) | Error::UnsupportedFamily(_) => 2,
            Error::PrecisionExhausted { .. } | Error::SeparationFailed(_) => 3,
            Error::BudgetExceeded { .. } => 4,
            Error::VerificationFailed(_) => 5,
            _ => 2,
        }
    }
}
