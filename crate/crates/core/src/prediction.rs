//! One-step MMSE channel prediction under recursive training.
//!
//! With unit-power fading of spectrum `S` observed at SNR `rho`, the
//! steady-state prediction error is `(exp{g(rho)} - 1)/rho` where
//! `g(rho) = (1/2pi) ∫ log(1 + rho S)`, and the induced coherent channel
//! has effective SNR `(1 - sigma2) rho / (sigma2 rho + 1)`.
//!
//! ```
//! use pskfade::prediction::{gm_steady_state_error, steady_state_error};
//! use pskfade::spectral::SpectrumModel;
//!
//! let gm = SpectrumModel::gauss_markov(0.25).unwrap();
//! let quad = steady_state_error(&gm, 1.0).unwrap();
//! assert!((quad - gm_steady_state_error(0.25, 1.0)).abs() < 1e-9);
//! ```

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::levinson_durbin;
use crate::spectral::{autocorrelation, log_spectral_deficit, log_spectral_integral, SpectrumModel};

#[derive(Debug, Clone, PartialEq)]
pub struct PredictionResult {
    pub sigma2_inf: f64,
    pub rho_eff: f64,
    /// `sigma2[l]` for `l = 1..=L` when requested.
    pub transient: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Quadratic,
    Linear,
    Saturation,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Quadratic => "Quadratic",
            Regime::Linear => "Linear",
            Regime::Saturation => "Saturation",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeLabel {
    pub regime: Regime,
    pub approx_sigma2: f64,
    pub approx_rho_eff: f64,
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("SNR must be positive, got {rho}")))
    }
}

/// `e^g - 1 - g` without cancellation.
fn expm1_minus_x(g: f64) -> f64 {
    if g.abs() < 0.1 {
        let mut term = g * g / 2.0;
        let mut acc = 0.0f64;
        let mut k = 2.0;
        while term.abs() > 1e-18 * acc.abs() || acc == 0.0 {
            acc += term;
            k += 1.0;
            term *= g / k;
            if term == 0.0 {
                break;
            }
        }
        acc
    } else {
        g.exp_m1() - g
    }
}

/// `(sigma2, 1 - sigma2)`, each accurate to full relative precision.
fn steady_state_parts(model: &SpectrumModel, rho: f64) -> Result<(f64, f64)> {
    check_rho(rho)?;
    if model.is_white() {
        return Ok((1.0, 0.0));
    }
    let g = log_spectral_integral(model, rho)?;
    let sigma2 = g.exp_m1() / rho;
    if sigma2 <= 0.5 {
        let sigma2 = sigma2.clamp(0.0, 1.0);
        return Ok((sigma2, 1.0 - sigma2));
    }
    // 1 - sigma2 = ((rho - g) - (e^g - 1 - g)) / rho
    let deficit = log_spectral_deficit(model, rho)?;
    let complement = ((deficit - expm1_minus_x(g)) / rho).clamp(0.0, 1.0);
    Ok((1.0 - complement, complement))
}

/// Steady-state prediction error `sigma2_inf` in `[0, 1]`.
pub fn steady_state_error(model: &SpectrumModel, rho: f64) -> Result<f64> {
    Ok(steady_state_parts(model, rho)?.0)
}

/// Steady-state error and effective SNR together, with the effective SNR
/// computed from the accurately known `1 - sigma2`.
pub fn steady_state(model: &SpectrumModel, rho: f64) -> Result<PredictionResult> {
    let (sigma2, complement) = steady_state_parts(model, rho)?;
    Ok(PredictionResult {
        sigma2_inf: sigma2,
        rho_eff: complement * rho / (sigma2 * rho + 1.0),
        transient: None,
    })
}

/// Closed-form steady-state error for discrete Gauss-Markov fading,
/// `[(rho - 1) eps + sqrt((rho - 1)^2 eps^2 + 4 rho eps)] / (2 rho)`.
/// Requires `0 < eps <= 1` and `rho > 0`.
pub fn gm_steady_state_error(eps: f64, rho: f64) -> f64 {
    let b = (rho - 1.0) * eps;
    let disc = (b * b + 4.0 * rho * eps).sqrt();
    if b >= 0.0 {
        (b + disc) / (2.0 * rho)
    } else {
        // rationalised to avoid cancellation
        2.0 * eps / (disc - b)
    }
}

/// `(1 - sigma2) rho / (sigma2 rho + 1)`.
pub fn effective_snr(sigma2: f64, rho: f64) -> f64 {
    (1.0 - sigma2) * rho / (sigma2 * rho + 1.0)
}

/// `sigma2[l]`, `l = 1..=len`: error of the MMSE predictor of `h[l]` from
/// all compensated observations `sqrt(rho) h[i] + z[i]`, `i < l`.
pub fn transient_error_sequence(model: &SpectrumModel, rho: f64, len: usize) -> Result<Vec<f64>> {
    check_rho(rho)?;
    if len == 0 {
        return Err(Error::InvalidParameter("sequence length must be at least 1".into()));
    }
    let r = autocorrelation_lags(model, len)?;
    let gamma: Vec<Complex64> = r
        .iter()
        .enumerate()
        .map(|(k, &rk)| rk * rho + if k == 0 { 1.0 } else { 0.0 })
        .collect();
    let bank = levinson_durbin(&gamma, len)?;
    // the predictor of h[l] is the observation predictor scaled by 1/sqrt(rho)
    Ok(bank
        .coefficients
        .iter()
        .map(|a| {
            let explained: f64 = a
                .iter()
                .zip(&r[1..])
                .map(|(aj, rj)| (aj * rj.conj()).re)
                .sum();
            (1.0 - explained).clamp(0.0, 1.0)
        })
        .collect())
}

/// `r[0..=len]` of a discrete-time model.
pub fn autocorrelation_lags(model: &SpectrumModel, len: usize) -> Result<Vec<Complex64>> {
    if !model.is_discrete() {
        return Err(Error::InvalidParameter(
            "prediction needs a discrete-time model".into(),
        ));
    }
    (0..=len).map(|k| autocorrelation(model, k as f64)).collect()
}

/// Sharp-cutoff regime classification for Gauss-Markov fading with
/// boundaries at `rho = eps` and `rho = 1/eps`; ties go to `Linear`.
pub fn classify_regime(eps: f64, rho: f64) -> RegimeLabel {
    if rho < eps {
        RegimeLabel {
            regime: Regime::Quadratic,
            approx_sigma2: 1.0 - rho / eps,
            approx_rho_eff: rho * rho / eps,
        }
    } else if rho <= 1.0 / eps {
        RegimeLabel {
            regime: Regime::Linear,
            approx_sigma2: (eps / rho).sqrt(),
            approx_rho_eff: rho,
        }
    } else {
        RegimeLabel {
            regime: Regime::Saturation,
            approx_sigma2: eps,
            approx_rho_eff: 1.0 / eps,
        }
    }
}
