use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported field: {0}")]
    UnsupportedField(String),

    /// `|p|·‖T‖ ≥ 1`, the geometric series for the ⋆-inverse does not converge.
    #[error("series diverges: |p|·‖T‖ = {rate:.6} ≥ 1")]
    Divergence { rate: f64 },

    #[error("spectral precondition violated: {0}")]
    Spectral(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },

    /// Eigenvalues of χ(H) that could not be matched into symplectic pairs.
    #[error("could not pair the doubled spectrum of χ(H); unpaired values: {unpaired:?}")]
    Pairing { unpaired: Vec<f64>, spectrum: Vec<f64> },
}

pub type Result<T> = std::result::Result<T, Error>;
