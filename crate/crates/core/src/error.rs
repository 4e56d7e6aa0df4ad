use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: at least {min} levels are required")]
    InvalidDimension { dim: usize, min: usize },

    #[error("operators live on different spaces: {0}")]
    SpaceMismatch(String),

    #[error("Fock truncation too small: {required} levels required, {actual} given")]
    TruncationInsufficient { required: usize, actual: usize },

    #[error("zero-norm state: {0}")]
    ZeroNorm(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("step size underflow at t = {t}: last accepted step {step:e}")]
    StepSizeUnderflow { t: f64, step: f64 },

    #[error("outside the certificate domain: {0}")]
    OutOfDomain(String),

    #[error("parity symmetry violated: cross-sector coupling of magnitude {magnitude:e}")]
    SymmetryViolation { magnitude: f64 },

    #[error("eigensolver did not converge: {0}")]
    Solver(String),

    #[error("state is not stationary: |L[rho]| = {residual:e} exceeds {tolerance:e}")]
    NotStationary { residual: f64, tolerance: f64 },

    #[error("linear algebra failure: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
