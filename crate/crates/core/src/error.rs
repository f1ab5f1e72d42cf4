//! Error type shared by every stage of the pipeline.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // float codec
    #[error("field out of range: {field} = {value}")]
    FieldOutOfRange { field: &'static str, value: u32 },
    #[error("biased exponent {exponent} is not a normal number")]
    NotNormal { exponent: u32 },

    // mantissa quantization
    #[error("chop count {0} outside [0, 23]")]
    InvalidChopCount(u32),
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("exponent overflow while rounding element {index} to a power of two")]
    ExponentOverflow { index: usize },

    // exponent quantization
    #[error("model has no nonzero parameters")]
    AllZero,
    #[error("subnormal value at index {index} cannot be exponent-coded")]
    Subnormal { index: usize },
    #[error("exponent {exponent} outside coded range [{min}, {max}]")]
    ExponentOutOfRange { exponent: i32, min: i32, max: i32 },
    #[error("value has nonzero bits below the kept mantissa (chop count {n})")]
    MantissaResidue { n: u32 },
    #[error("code field {field} = {value} exceeds its {width}-bit width")]
    CodeOutOfRange { field: &'static str, value: u32, width: u32 },
    #[error("decoded biased exponent {0} outside [1, 254]")]
    DecodedExponent(i32),

    // container
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("truncated file: needed {needed} bytes at offset {offset}, {available} available")]
    Truncated { offset: usize, needed: usize, available: usize },
    #[error("payload length mismatch: expected {expected} bytes, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("tensor shape {shape:?} does not match {len} elements")]
    ShapeMismatch { shape: Vec<u32>, len: usize },
    #[error("i/o error: {0}")]
    Io(String),

    // training harness
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("quantization failed at epoch {epoch}: {source}")]
    EpochQuantization { epoch: usize, source: Box<Error> },
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
