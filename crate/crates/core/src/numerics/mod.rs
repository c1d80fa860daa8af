//! Numerical kernels: adaptive quadrature, Toeplitz solves, Gauss-Hermite
//! rules and a few scalar helpers.

pub mod hermite;
pub mod quadrature;
pub mod special;
pub mod toeplitz;

pub use hermite::GaussHermite;
pub use quadrature::{
    expect_rayleigh, integrate_finite, integrate_halfline, integrate_halfline_scaled,
    integrate_piecewise, integrate_sine_substitution, QuadratureSpec,
};
pub use toeplitz::{levinson_durbin, toeplitz_solve, PredictorBank, ToeplitzSystem};
