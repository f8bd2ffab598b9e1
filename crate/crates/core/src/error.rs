use thiserror::Error;

/// Errors raised by matrix construction, bound evaluation and the oracles.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum DecayError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    /// A bound was requested outside the region where it is stated to hold.
    #[error("outside the validity region: {0}")]
    Domain(String),

    #[error("matrix is not positive definite (lambda_min = {lambda_min:e})")]
    NotPositiveDefinite { lambda_min: f64 },

    #[error("degenerate spectral interval [{lambda_min}, {lambda_max}]")]
    DegenerateSpectrum { lambda_min: f64, lambda_max: f64 },

    #[error("matrix is not Hermitian: {0}")]
    NotHermitian(String),

    #[error("shift {0} coincides with an eigenvalue")]
    SingularShift(String),

    #[error("function is undefined at eigenvalue {0:e}")]
    UndefinedAtEigenvalue(f64),

    #[error("matrix market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, DecayError>;

impl From<std::io::Error> for DecayError {
    fn from(e: std::io::Error) -> Self {
        DecayError::Io(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> DecayError {
    DecayError::InvalidArgument(msg.into())
}
