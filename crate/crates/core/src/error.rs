use thiserror::Error;

/// Errors produced by the numerical and modelling routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quadrature did not converge: estimate {estimate:e}, error estimate {error_estimate:e} after {subdivisions} subdivisions")]
    NonConvergence {
        estimate: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("invalid integration interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("integrand does not decay fast enough at infinity")]
    DivergentTail,

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("Toeplitz system is not positive definite")]
    NotPositiveDefinite,

    #[error("frequency {freq} outside the discrete-time domain [-pi, pi]")]
    OutOfDomain { freq: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("alias sum cannot be truncated within tolerance (needed more than {max_terms} terms)")]
    AliasTruncation { max_terms: usize },

    #[error("fading process is deterministic (noiseless prediction error is zero)")]
    NotRegular,

    #[error("circulant embedding failed: minimum eigenvalue {min_eigenvalue:e}")]
    EmbeddingFailure { min_eigenvalue: f64 },

    #[error("cannot read tabulated spectrum: {0}")]
    Table(String),
}

pub type Result<T> = std::result::Result<T, Error>;
