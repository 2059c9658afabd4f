use thiserror::Error;

/// Errors produced by the density estimator, detector and evaluation harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input: {0}")]
    NonFinite(f64),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("window is empty; no density model yet")]
    EmptyWindow,
    #[error("bandwidth undefined: {0}")]
    UndefinedBandwidth(&'static str),
    #[error("kernel family {found:?} cannot be used for {operation}")]
    WrongFamily {
        found: crate::kernels::KernelFamily,
        operation: &'static str,
    },
    #[error("density curves are evaluated on different grids")]
    GridMismatch,
    #[error("grid is not strictly increasing at position {0}")]
    UnsortedGrid(usize),
    #[error("value {value} is outside [0, 1]")]
    OutOfUnitRange { value: f64 },
    #[error("code {code} is out of range for {bits}-bit words")]
    CodeOutOfRange { code: u64, bits: u32 },
    #[error("look-up table has {found} entries, expected {expected}")]
    LutSizeMismatch { expected: usize, found: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("length mismatch: {left} results vs {right} labels")]
    LengthMismatch { left: usize, right: usize },
    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),
    #[error("unknown perturbation preset `{0}`")]
    UnknownPreset(String),
    #[error("step {index}: {source}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
