use thiserror::Error;

/// Coarse classification used by frontends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Protocol,
    Parse,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is too small (need p >= 5)")]
    ModulusTooSmall(u64),
    #[error("value {value} is not a unit mod {modulus}")]
    ElementOutOfRange { value: u64, modulus: u64 },
    #[error("operands belong to different groups")]
    GroupMismatch,
    #[error("arity mismatch: key expects {expected} objects, got {actual}")]
    ArityMismatch { expected: usize, actual: usize },
    #[error("framework needs at least 2 objects, got {0}")]
    FrameworkTooSmall(usize),
    #[error("framework object {0} repeats")]
    DuplicateObject(u64),
    #[error("framework contains the group identity")]
    IdentityObject,
    #[error("exponent {exponent} outside [1, {max}]")]
    ExponentOutOfRange { exponent: u64, max: u64 },
    #[error("lock exponents must be pairwise distinct ({0} repeats)")]
    DuplicateExponent(u64),
    #[error("exponent {exponent} is not invertible mod {order}")]
    NonInvertibleKey { exponent: u64, order: u64 },
    #[error("p = {modulus} cannot supply {requested} distinct non-identity elements")]
    GroupTooSmall { modulus: u64, requested: usize },
    #[error("permutation size {0} is unsupported (max 20)")]
    PermutationTooLarge(usize),
    #[error("permutation index {index} out of range for {size} items")]
    IndexOutOfRange { index: u64, size: usize },
    #[error("not a permutation of 0..{0}")]
    InvalidPermutation(usize),
    #[error("message length {actual} does not match framework size {expected}")]
    MessageLength { expected: usize, actual: usize },
    #[error("state is in phase {0}, expected Sent")]
    InvalidPhase(&'static str),
    #[error("character {0:?} has no 8-bit code")]
    UnrepresentableChar(char),
    #[error("malformed binary string: {0}")]
    MalformedBinary(String),
    #[error("codeword width must be at least 2, got {0}")]
    CodewordTooNarrow(usize),
    #[error("repetition factor must be odd and positive, got {0}")]
    BadRepetition(usize),
    #[error("framing error: {0}")]
    Framing(String),
    #[error("session fault: recovery stayed ambiguous after {0} attempts")]
    RetriesExhausted(usize),
    #[error("session fault: genuine framework produced no matching permutation")]
    RecoveryFailed,
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("inconsistent marginal: {0}")]
    InconsistentMarginal(String),
    #[error("inconsistent transcript: {0}")]
    InconsistentTranscript(String),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("message space too large: {0}")]
    SpaceTooLarge(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::RetriesExhausted(_)
            | Error::RecoveryFailed
            | Error::Framing(_)
            | Error::InvalidPhase(_) => ErrorKind::Protocol,
            Error::Parse { .. } | Error::InconsistentTranscript(_) => ErrorKind::Parse,
            _ => ErrorKind::Usage,
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
