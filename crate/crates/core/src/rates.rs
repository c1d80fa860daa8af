//! Achievable rates, capacity bounds and their asymptotic forms.
//!
//! Every function here returns a leading-order expression, not exact
//! mutual information; the numerically exact PSK rates are in
//! [`crate::mutual_info`]. Per-symbol quantities take a discrete-time
//! model and SNR `rho`; per-unit-time (wideband) quantities take a
//! continuous-time model and envelope power `P`.
//!
//! ```
//! use pskfade::rates::{wideband_rate, wideband_rate_gm};
//! use pskfade::spectral::SpectrumModel;
//!
//! let m = SpectrumModel::gauss_markov_continuous(0.9).unwrap();
//! let quad = wideband_rate(&m, 1.0).unwrap();
//! assert!((quad - wideband_rate_gm(0.9, 1.0)).abs() < 1e-9);
//! ```

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{
    ct_log_spectral_deficit, ct_square_integral, log_spectral_deficit, noiseless_pred_error,
    square_integral, zero_set_measure, SpectrumModel,
};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateUnits {
    PerSymbol,
    PerUnitTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBreakdown {
    pub rate_nats: f64,
    pub capacity_ub: f64,
    pub cap_per_unit_energy: f64,
    pub gap: f64,
    pub units: RateUnits,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

/// `max(rho_eff - rho_eff^2, 0)`.
pub fn second_order_rate(rho_eff: f64) -> f64 {
    (rho_eff - rho_eff * rho_eff).max(0.0)
}

/// `(1/2) [(1/2pi) ∫ S^2 - 1] rho^2`.
pub fn low_snr_rate(model: &SpectrumModel, rho: f64) -> Result<f64> {
    let s2 = square_integral(model)?;
    Ok(0.5 * (s2 - 1.0) * rho * rho)
}

/// `1 - g(rho)/rho`, computed as `(rho - g)/rho`.
pub fn capacity_per_unit_energy_dt(model: &SpectrumModel, rho: f64) -> Result<f64> {
    positive("SNR", rho)?;
    Ok(log_spectral_deficit(model, rho)? / rho)
}

/// `(1/2) (1/2pi) ∫ S^2 rho^2`.
pub fn capacity_upper_bound_dt(model: &SpectrumModel, rho: f64) -> Result<f64> {
    let s2 = square_integral(model)?;
    Ok(0.5 * s2 * rho * rho)
}

/// Per-symbol breakdown from the low-SNR expansions.
pub fn rate_breakdown_dt(model: &SpectrumModel, rho: f64) -> Result<RateBreakdown> {
    positive("SNR", rho)?;
    let s2 = square_integral(model)?;
    let rate = 0.5 * (s2 - 1.0) * rho * rho;
    let ub = 0.5 * s2 * rho * rho;
    Ok(RateBreakdown {
        rate_nats: rate,
        capacity_ub: ub,
        cap_per_unit_energy: capacity_per_unit_energy_dt(model, rho)?,
        gap: ub - rate,
        units: RateUnits::PerSymbol,
    })
}

/// `log log rho - 1 - gamma + log(1/sigma2_pred)` for regular fading.
pub fn high_snr_capacity_regular(sigma2_pred: f64, rho: f64) -> Result<f64> {
    if sigma2_pred == 0.0 {
        return Err(Error::NotRegular);
    }
    if !(sigma2_pred > 0.0 && sigma2_pred <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "noiseless prediction error must lie in (0, 1], got {sigma2_pred}"
        )));
    }
    if !(rho > std::f64::consts::E) {
        return Err(Error::InvalidParameter(format!(
            "high-SNR expansion needs rho > e, got {rho}"
        )));
    }
    Ok(rho.ln().ln() - 1.0 - EULER_GAMMA - sigma2_pred.ln())
}

/// [`high_snr_capacity_regular`] with `sigma2_pred` taken from the model.
pub fn high_snr_capacity(model: &SpectrumModel, rho: f64) -> Result<f64> {
    high_snr_capacity_regular(noiseless_pred_error(model)?, rho)
}

/// Pre-log of a deterministic process: `(1/2pi) measure{S = 0}`.
pub fn high_snr_prelog_deterministic(model: &SpectrumModel) -> Result<f64> {
    zero_set_measure(model)
}

/// `1 - (1/(2 pi P)) ∫ log(1 + P S_c) d omega`.
pub fn capacity_per_unit_energy_ct(model: &SpectrumModel, power: f64) -> Result<f64> {
    positive("envelope power", power)?;
    Ok(ct_log_spectral_deficit(model, power)? / power)
}

/// Wideband limit of the per-unit-time rate; the same expression as
/// `capacity_per_unit_energy_ct * P`.
pub fn wideband_rate(model: &SpectrumModel, power: f64) -> Result<f64> {
    Ok(capacity_per_unit_energy_ct(model, power)? * power)
}

/// Per-unit-time breakdown; the wideband rate meets the bound.
pub fn rate_breakdown_ct(model: &SpectrumModel, power: f64) -> Result<RateBreakdown> {
    let c = capacity_per_unit_energy_ct(model, power)?;
    let rate = c * power;
    Ok(RateBreakdown {
        rate_nats: rate,
        capacity_ub: rate,
        cap_per_unit_energy: c,
        gap: 0.0,
        units: RateUnits::PerUnitTime,
    })
}

/// Closed form for continuous Gauss-Markov fading,
/// `P - (lambda/2)(sqrt(1 + 4P/lambda) - 1)` with `lambda = |log(1 - eps_c)|`.
pub fn wideband_rate_gm(eps_c: f64, power: f64) -> f64 {
    let lambda = -(-eps_c).ln_1p();
    let s = (1.0 + 4.0 * power / lambda).sqrt();
    // rearranged to 4 P^2 / (lambda (1 + s)^2)
    4.0 * power * power / (lambda * (1.0 + s) * (1.0 + s))
}

/// Closed form for Clarke fading with maximum Doppler `omega_m`.
pub fn wideband_rate_clarke(omega_m: f64, power: f64) -> f64 {
    let q = 2.0 * power / omega_m;
    let bracket = if q <= 1.0 {
        // u = 1 - sqrt(1 - q^2); the bracket becomes
        // u log(2/q) - (1 - u) log(1 - u/2)
        let u = q * q / (1.0 + ((1.0 - q) * (1.0 + q)).sqrt());
        u * (2.0 / q).ln() - (1.0 - u) * (-0.5 * u).ln_1p()
    } else {
        let v = ((q - 1.0) * (q + 1.0)).sqrt();
        (omega_m / power).ln() + v * v.atan()
    };
    omega_m / PI * bracket
}

/// Leading small-`P` term for Clarke fading, `(2/(pi omega_m)) log(1/P) P^2`.
pub fn clarke_small_p_asymptote(omega_m: f64, power: f64) -> f64 {
    2.0 / (PI * omega_m) * (1.0 / power).ln() * power * power
}

/// `(1/2)(1/2pi) ∫ S_c^2`, the small-`P` coefficient of the wideband rate.
/// Divergent for Clarke fading.
pub fn ct_small_p_coefficient(model: &SpectrumModel) -> Result<f64> {
    Ok(0.5 * ct_square_integral(model)?)
}
