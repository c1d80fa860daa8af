//! Sampling a continuous-time fading process through a matched filter.
//!
//! With symbol duration `T` and `Q = ∫∫_{[0,T]^2} K(s - t) ds dt`, the
//! per-symbol fading has spectrum
//!
//! `S_d(Omega) = (T/Q) sum_k S_c((Omega - 2k pi)/T) sinc^2((Omega - 2k pi)/2)`
//!
//! and the channel SNR is `rho = (P/T) Q`. This `S_d` integrates to one by
//! construction; the tabulated result is still renormalised to absorb
//! interpolation error, and the factor is reported.

use std::f64::consts::PI;

use super::{autocorrelation, Family, SpectrumModel, TabulatedSpectrum, TimeBase};
use crate::error::{Error, Result};
use crate::numerics::special::sinc;
use crate::numerics::{integrate_finite, QuadratureSpec};

const ALIAS_TOLERANCE: f64 = 1e-10;
const MAX_ALIAS_TERMS: usize = 1_000_000;
const BASE_INTERVALS: usize = 1024;
const POINTS_PER_DECADE: f64 = 64.0;
const MAX_FEATURE_NODES: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedChannel {
    /// Tabulated discrete-time spectrum.
    pub spectrum: SpectrumModel,
    /// Average SNR per symbol.
    pub rho: f64,
    pub symbol_duration: f64,
    pub envelope_power: f64,
    /// `∫∫_{[0,T]^2} K(s - t) ds dt`.
    pub autocorrelation_integral: f64,
    /// Factor applied to the tabulated alias sum to restore unit power.
    pub renormalization: f64,
    /// Alias terms kept on each side of `k = 0`.
    pub alias_terms: usize,
}

/// `∫∫_{[0,T]^2} K(s - t) ds dt = 2 ∫_0^T (T - tau) Re K(tau) d tau`.
pub fn autocorrelation_double_integral(model: &SpectrumModel, duration: f64) -> Result<f64> {
    if model.is_discrete() {
        return Err(Error::InvalidParameter(
            "double autocorrelation integral needs a continuous-time model".into(),
        ));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "symbol duration must be positive, got {duration}"
        )));
    }
    let t = duration;
    if let Family::GaussMarkovContinuous { eps_c } = model.family() {
        let a = 0.5 * SpectrumModel::gm_decay(*eps_c);
        let x = a * t;
        // 2 (x + e^-x - 1) / x^2, times T^2
        let ratio = if x < 1e-3 {
            1.0 - x / 3.0 + x * x / 12.0 - x * x * x / 60.0
        } else {
            2.0 * (x + (-x).exp_m1()) / (x * x)
        };
        return Ok(t * t * ratio);
    }
    let spec = QuadratureSpec::default();
    let failure = std::cell::RefCell::new(None);
    let v = integrate_finite(
        |tau| match autocorrelation(model, tau) {
            Ok(k) => (t - tau) * k.re,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        t,
        &spec,
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(2.0 * v)
}

/// Discrete-time channel seen at symbol rate `1/T` with envelope power `P`.
pub fn discretize(model: &SpectrumModel, duration: f64, power: f64) -> Result<DiscretizedChannel> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "envelope power must be positive, got {power}"
        )));
    }
    let q = autocorrelation_double_integral(model, duration)?;
    if !(q > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "autocorrelation integral is not positive ({q:e}) at T = {duration}"
        )));
    }
    let t = duration;
    let terms = alias_terms(model, t, q)?;
    let grid = build_grid(model, t);
    let values: Vec<f64> = grid
        .iter()
        .map(|&w| {
            let v = alias_sum(model, t, q, terms, w);
            if v.is_finite() {
                v
            } else {
                // exactly on a Clarke band edge
                let h = 1e-10;
                0.5 * (alias_sum(model, t, q, terms, (w - h).max(0.0))
                    + alias_sum(model, t, q, terms, (w + h).min(PI)))
            }
        })
        .collect();
    let table = TabulatedSpectrum::new(grid, values, TimeBase::Discrete)?;
    let renormalization = table.normalization();
    Ok(DiscretizedChannel {
        spectrum: SpectrumModel::tabulated(table),
        rho: power * q / t,
        symbol_duration: t,
        envelope_power: power,
        autocorrelation_integral: q,
        renormalization,
        alias_terms: terms,
    })
}

fn alias_sum(model: &SpectrumModel, t: f64, q: f64, terms: usize, omega: f64) -> f64 {
    let k_max = terms as i64;
    let mut acc = 0.0;
    for k in -k_max..=k_max {
        let x = omega - 2.0 * PI * k as f64;
        let s = sinc(0.5 * x);
        let d = model.density(x / t);
        if d != 0.0 {
            acc += d * s * s;
        }
    }
    acc * t / q
}

/// Smallest `K` such that dropping `|k| > K` changes `S_d` by less than
/// `ALIAS_TOLERANCE`, using an envelope `S_c(omega) <= C / omega^2`.
fn alias_terms(model: &SpectrumModel, t: f64, q: f64) -> Result<usize> {
    let (k_min, envelope) = match model.family() {
        Family::Clarke { omega_m } => {
            // band-limited: every non-zero term is included
            let k = ((omega_m * t + PI) / (2.0 * PI)).ceil();
            return finite_terms(k);
        }
        Family::GaussMarkovContinuous { eps_c } => (1.0, SpectrumModel::gm_decay(*eps_c)),
        Family::TabulatedContinuous(table) => {
            let w_last = *table.freqs().last().unwrap();
            let k = ((w_last * t / PI + 1.0) / 2.0).ceil().max(1.0);
            (k, table.tail_constant())
        }
        _ => unreachable!("discrete models rejected earlier"),
    };
    let scale = 8.0 * envelope * t.powi(3) / (q * PI.powi(4) * 6.0);
    // tail(K) = scale / (2K - 1)^3
    let needed = 0.5 * ((scale / ALIAS_TOLERANCE).cbrt() + 1.0);
    finite_terms(needed.ceil().max(k_min))
}

fn finite_terms(k: f64) -> Result<usize> {
    if !(k <= MAX_ALIAS_TERMS as f64) {
        return Err(Error::AliasTruncation {
            max_terms: MAX_ALIAS_TERMS,
        });
    }
    Ok(k as usize)
}

/// Folds a frequency onto `[0, pi]` using periodicity and evenness.
fn fold(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        2.0 * PI - r
    } else {
        r
    }
}

fn cluster(nodes: &mut Vec<f64>, center: f64, min_offset: f64) {
    nodes.push(center);
    let step = 10f64.powf(1.0 / POINTS_PER_DECADE);
    let mut d = min_offset.max(1e-14);
    while d < PI {
        for x in [center - d, center + d] {
            if (0.0..=PI).contains(&x) {
                nodes.push(x);
            }
        }
        d *= step;
    }
}

fn build_grid(model: &SpectrumModel, t: f64) -> Vec<f64> {
    let mut nodes: Vec<f64> = (0..=BASE_INTERVALS)
        .map(|i| PI * i as f64 / BASE_INTERVALS as f64)
        .collect();
    match model.family() {
        Family::GaussMarkovContinuous { eps_c } => {
            let a = 0.5 * SpectrumModel::gm_decay(*eps_c);
            cluster(&mut nodes, 0.0, 1e-3 * a * t);
        }
        Family::Clarke { omega_m } => {
            cluster(&mut nodes, fold(omega_m * t), 1e-9 * PI);
        }
        Family::TabulatedContinuous(table) => {
            let freqs = table.freqs();
            cluster(&mut nodes, 0.0, 1e-2 * freqs[1] * t);
            let stride = freqs.len().div_ceil(MAX_FEATURE_NODES).max(1);
            nodes.extend(freqs.iter().step_by(stride).map(|&w| fold(w * t)));
        }
        _ => {}
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    nodes[0] = 0.0;
    *nodes.last_mut().unwrap() = PI;
    nodes
}
