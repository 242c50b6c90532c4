use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VaError {
    #[error("argument with real part {re} lies outside the cumulant strip ({lo}, {hi})")]
    StripViolation { re: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range for {what}")]
    IndexOutOfRange { index: usize, what: &'static str },

    #[error("non-finite integrand value at point {point:?}")]
    NonFinite { point: Vec<f64> },

    #[error("quadrature for `{label}` stopped at error estimate {estimate:e} (tolerance {tolerance:e}) after {subdivisions} subdivisions")]
    QuadratureNotConverged {
        label: String,
        estimate: f64,
        tolerance: f64,
        subdivisions: usize,
    },

    #[error("integral `{label}` has imaginary residue {imag:e} against real part {real:e}")]
    ImaginaryResidue { label: String, real: f64, imag: f64 },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, VaError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(VaError::InvalidParameter(msg.into()))
}
