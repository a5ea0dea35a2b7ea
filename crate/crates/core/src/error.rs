use thiserror::Error;

/// Errors raised across the library.
///
/// Mathematical rejections (a δ that is not totally negative, a non-unit
/// passed where a lattice automorphism is needed, ...) are kept apart from
/// usage problems so that front ends can map them to different exit codes.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("polynomial must be monic, leading coefficient is {0}")]
    NotMonic(String),

    #[error("polynomial must have degree at least {min}, got {degree}")]
    DegreeTooSmall { degree: usize, min: usize },

    #[error("polynomial is reducible: {0}")]
    Reducible(String),

    #[error("field is not totally real: signature ({r1}, {r2})")]
    NotTotallyReal { r1: usize, r2: usize },

    #[error("elements belong to different fields")]
    FieldMismatch,

    #[error("division by zero")]
    DivisionByZero,

    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("delta is not totally negative: embedding {index} is {value}")]
    DeltaNotTotallyNegative { index: usize, value: String },

    #[error("element is not in the order Z[theta]: {0}")]
    NotInOrder(String),

    #[error("element is not a unit: norm {0}")]
    NotAUnit(String),

    #[error("index {index} out of range (0..={max})")]
    OutOfRange { index: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("partition too fine: {cells} cells need at least N = {required} iterations, got {got}")]
    PartitionTooFine { cells: u64, required: u64, got: u64 },

    #[error("no Pisot unit found up to height {0}")]
    NoPisotUnit(i64),

    #[error("entropy bound failed: {0}")]
    EntropyBound(String),

    #[error("certificate verification failed: {0}")]
    Verification(String),
}

impl Error {
    /// True for errors that are mathematical verdicts on valid input rather
    /// than malformed requests.
    pub fn is_rejection(&self) -> bool {
        !matches!(
            self,
            Error::Parse { .. } | Error::InvalidArgument(_) | Error::DimensionMismatch { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
