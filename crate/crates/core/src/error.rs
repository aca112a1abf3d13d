use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degree {degree} exceeds the configured cap {cap}")]
    CapExceeded { degree: u32, cap: u32 },

    #[error("dimension d = {0} is outside the supported range 1..=4")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected d = {expected}, found d = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate index {index} is outside 1..={d}")]
    IndexOutOfRange { index: usize, d: usize },

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("invalid weight family: {0}")]
    InvalidWeights(String),

    #[error("invalid unitary: {0}")]
    InvalidUnitary(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("point {index} lies outside the open unit ball (|z|^2 = {norm_sq})")]
    OutsideBall { index: usize, norm_sq: f64 },

    #[error("density is not strictly positive (value {value} at sample {sample})")]
    NonPositiveDensity { sample: usize, value: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
