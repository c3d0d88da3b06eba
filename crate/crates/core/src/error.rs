use thiserror::Error;

/// Errors raised by the library. Every precondition violation surfaces here
/// instead of panicking so the CLI can map it onto a usage exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("field width mismatch: {left} vs {right}")]
    WidthMismatch { left: u32, right: u32 },

    #[error("value {value:#x} does not fit in {width} bits")]
    OutOfRange { value: u64, width: u32 },

    #[error("field degree {0} outside supported range 1..=64")]
    UnsupportedDegree(u32),

    #[error("polynomial needs at least one coefficient")]
    EmptyPolynomial,

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("phase table modulus {found} does not match the required {expected}")]
    ModulusMismatch { expected: u64, found: u64 },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("lambda = {0} lies in the singular set of the triangularization")]
    SingularShift(f64),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("ancillas are entangled with the data register: {0}")]
    EntangledAncilla(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
