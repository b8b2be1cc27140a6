use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A spectral parameter or grid outside the region where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge: estimated error {error_estimate:e} exceeds {tolerance:e}")]
    Quadrature { error_estimate: f64, tolerance: f64 },
    #[error("ODE integration failed at x = {position}: {reason}")]
    Integration { position: f64, reason: String },
    /// The argument principle could not be applied because a zero sits on or
    /// too close to the contour.
    #[error("zero too close to contour {0}")]
    NearContourZero(String),
    #[error("left and right solutions do not glue at 0 (relative mismatch {0:e})")]
    SpuriousZero(f64),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
