//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Coordinate vectors do not match the group dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A spectrum or lattice enumeration does not reach far enough for the query.
    #[error("cutoff {cutoff} insufficient: query needs {needed}")]
    CutoffInsufficient { cutoff: f64, needed: f64 },

    /// Evaluation at (or too close to) a pole of the continued function.
    #[error("evaluation at or within {guard} of the pole s = {pole}")]
    AtPole { pole: f64, guard: f64 },

    /// A series or integral was requested where it does not converge.
    #[error("divergence region: {0}")]
    DivergenceRegion(String),

    /// A truncation or quadrature certificate could not be met.
    #[error("certificate failure: {0}")]
    CertificateFailure(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line driver.
    ///
    /// 0 = success, 2 = validation failure, 3 = numerical certificate failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch { .. }
            | Error::InvalidArgument(_)
            | Error::Unsupported(_)
            | Error::AtPole { .. }
            | Error::Config(_) => 2,
            Error::CutoffInsufficient { .. }
            | Error::DivergenceRegion(_)
            | Error::CertificateFailure(_) => 3,
            Error::Io(_) => 1,
        }
    }
}
