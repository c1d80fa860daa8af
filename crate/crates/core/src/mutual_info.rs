//! Mutual information of M-PSK on the induced coherent channel.
//!
//! The AWGN channel is `y = sqrt(snr) s + n` with `n ~ CN(0, 1)` and `s`
//! uniform over the constellation. By rotational symmetry only the first
//! symbol needs averaging:
//!
//! `I = -E_n[ log (1/M) sum_m exp(-(|d_m + n|^2 - |n|^2)) ]`,
//! `d_m = sqrt(snr) (s_0 - s_m)`,
//!
//! evaluated with a 64 x 64 Gauss-Hermite product rule, or by Monte Carlo.
//! Fading enters through an effective SNR scaled by a unit-mean
//! exponential gain.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{expect_rayleigh, GaussHermite, QuadratureSpec};
use crate::prediction::steady_state;
use crate::spectral::SpectrumModel;

const HERMITE_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct PskConstellation {
    order: usize,
    points: Vec<Complex64>,
}

impl PskConstellation {
    /// `M`-PSK with points `exp(j 2 pi m / M)`. BPSK is not complex proper
    /// and is rejected.
    pub fn new(order: usize) -> Result<Self> {
        if order < 3 {
            return Err(Error::InvalidParameter(format!(
                "PSK order must be at least 3 for a complex-proper input, got {order}"
            )));
        }
        let points = (0..order)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 / order as f64))
            .collect();
        Ok(Self { order, points })
    }

    pub fn qpsk() -> Self {
        Self::new(4).expect("order 4 is valid")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }
}

impl Default for PskConstellation {
    fn default() -> Self {
        Self::qpsk()
    }
}

fn hermite() -> &'static GaussHermite {
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| GaussHermite::new(HERMITE_ORDER))
}

fn check_snr(snr: f64) -> Result<()> {
    if snr >= 0.0 && snr.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("SNR must be non-negative, got {snr}")))
    }
}

fn distances(c: &PskConstellation, snr: f64) -> Vec<Complex64> {
    let s0 = c.points[0];
    let a = snr.sqrt();
    c.points[1..].iter().map(|&s| (s0 - s) * a).collect()
}

/// `log (1/M) sum_m exp(-(|d_m + n|^2 - |n|^2))`, with the `m = 0` term
/// (exponent zero) kept implicit.
fn log_mean_likelihood(d: &[Complex64], n: Complex64, order: usize) -> f64 {
    // |d + n|^2 - |n|^2 = |d|^2 + 2 Re(d conj(n))
    let exps: Vec<f64> = d.iter().map(|&dm| -(dm.norm_sqr() + 2.0 * (dm * n.conj()).re)).collect();
    let max = exps.iter().copied().fold(0.0f64, f64::max);
    let sum: f64 = (-max).exp() + exps.iter().map(|&e| (e - max).exp()).sum::<f64>();
    max + sum.ln() - (order as f64).ln()
}

/// PSK mutual information over AWGN in nats, by Gauss-Hermite quadrature.
pub fn psk_awgn_mi(c: &PskConstellation, snr: f64) -> Result<f64> {
    check_snr(snr)?;
    if snr == 0.0 {
        return Ok(0.0);
    }
    let gh = hermite();
    let d = distances(c, snr);
    let mut acc = 0.0;
    for (xi, wi) in gh.nodes.iter().zip(&gh.weights) {
        for (yj, wj) in gh.nodes.iter().zip(&gh.weights) {
            let n = Complex64::new(*xi, *yj);
            acc += wi * wj * log_mean_likelihood(&d, n, c.order);
        }
    }
    Ok((-acc / PI).clamp(0.0, (c.order as f64).ln()))
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// PSK mutual information over AWGN by Monte Carlo over the noise;
/// deterministic in `(seed, samples)`.
pub fn psk_awgn_mi_monte_carlo(
    c: &PskConstellation,
    snr: f64,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_snr(snr)?;
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let d = distances(c, snr);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let v = -log_mean_likelihood(&d, Complex64::new(re * scale, im * scale), c.order);
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        stderr: (var / n).sqrt(),
    })
}

// The Gauss-Hermite rule carries roundoff near 1e-16 nats, so an
// absolute floor keeps vanishing rates from exhausting the budget.
fn fading_spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-9, 1e-14, 1 << 12).expect("valid tolerances")
}

/// `E_g[I(rho_eff g)]` with `g` unit-mean exponential.
pub fn psk_fading_mi(c: &PskConstellation, rho_eff: f64) -> Result<f64> {
    check_snr(rho_eff)?;
    if rho_eff == 0.0 {
        return Ok(0.0);
    }
    let failure = RefCell::new(None);
    let v = expect_rayleigh(
        |g| match psk_awgn_mi(c, rho_eff * g) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        &fading_spec(),
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(v.min((c.order as f64).ln()))
}

/// `E[log(1 + rho g)]`: Gaussian-input capacity with perfect receive CSI.
pub fn coherent_gaussian_capacity(rho: f64) -> Result<f64> {
    check_snr(rho)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    expect_rayleigh(|g| (rho * g).ln_1p(), &QuadratureSpec::relative(1e-10))
}

/// PSK rate of the recursive-training scheme at SNR `rho`.
pub fn induced_channel_rate(model: &SpectrumModel, rho: f64, c: &PskConstellation) -> Result<f64> {
    let p = steady_state(model, rho)?;
    psk_fading_mi(c, p.rho_eff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_finite;

    /// Real BPSK with per-dimension SNR `snr` via 1-D quadrature.
    fn bpsk_real(snr: f64) -> f64 {
        // I = log 2 - E_z[log(1 + exp(-2 snr - 2 sqrt(snr) z))], z ~ N(0, 1)
        let a = snr.sqrt();
        let f = |z: f64| {
            let t = -2.0 * snr - 2.0 * a * z;
            let softplus = if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
            softplus * (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
        };
        let spec = QuadratureSpec::default();
        2f64.ln() - integrate_finite(f, -40.0, 40.0, &spec).unwrap()
    }

    #[test]
    fn constellation() {
        assert!(PskConstellation::new(2).is_err());
        for m in [3, 4, 8] {
            let c = PskConstellation::new(m).unwrap();
            let mean: Complex64 = c.points().iter().sum();
            let second: Complex64 = c.points().iter().map(|s| s * s).sum();
            assert!(mean.norm() < 1e-14 && second.norm() < 1e-14);
            assert!(c.points().iter().all(|s| (s.norm() - 1.0).abs() < 1e-15));
        }
        assert_eq!(PskConstellation::default().order(), 4);
    }

    #[test]
    fn awgn_limits() {
        let q = PskConstellation::qpsk();
        assert_eq!(psk_awgn_mi(&q, 0.0).unwrap(), 0.0);
        assert!((psk_awgn_mi(&q, 1e6).unwrap() - 4f64.ln()).abs() < 1e-4);
    }

    #[test]
    fn qpsk_is_two_real_bpsk() {
        let q = PskConstellation::qpsk();
        for &snr in &[0.01, 0.3, 1.0, 4.0, 20.0] {
            let gh = psk_awgn_mi(&q, snr).unwrap();
            let oracle = 2.0 * bpsk_real(snr);
            assert!((gh - oracle).abs() < 1e-7, "snr={snr}: {gh} {oracle}");
        }
        let golden = psk_awgn_mi(&q, 1.0).unwrap();
        assert!((golden - 0.673_661_6).abs() < 1e-6, "{golden}");
    }

    #[test]
    fn monte_carlo_agrees() {
        let q = PskConstellation::qpsk();
        let gh = psk_awgn_mi(&q, 1.0).unwrap();
        let mc = psk_awgn_mi_monte_carlo(&q, 1.0, 200_000, 7).unwrap();
        assert!((mc.mean - gh).abs() < 3.0 * mc.stderr + 1e-12);
        let again = psk_awgn_mi_monte_carlo(&q, 1.0, 200_000, 7).unwrap();
        assert_eq!(mc, again);
    }

    #[test]
    fn fading_mi() {
        let q = PskConstellation::qpsk();
        assert_eq!(psk_fading_mi(&q, 0.0).unwrap(), 0.0);
        let v = psk_fading_mi(&q, 0.01).unwrap();
        assert!((v / 0.0099 - 1.0).abs() < 0.05);
        assert!((psk_fading_mi(&q, 1e7).unwrap() - 4f64.ln()).abs() < 1e-3);
    }

    #[test]
    fn coherent_capacity() {
        assert_eq!(coherent_gaussian_capacity(0.0).unwrap(), 0.0);
        let small = coherent_gaussian_capacity(1e-6).unwrap();
        assert!((small / 1e-6 - 1.0).abs() < 1e-5);
        // midpoint sum on [0, 50] plus the exact tail bound e^-50 log(1 + 50)
        let n = 2_000_000;
        let h = 50.0 / n as f64;
        let riemann: f64 = (0..n)
            .map(|i| {
                let g = (i as f64 + 0.5) * h;
                g.ln_1p() * (-g).exp()
            })
            .sum::<f64>()
            * h;
        let c = coherent_gaussian_capacity(1.0).unwrap();
        assert!((c - riemann).abs() < 1e-9, "{c} {riemann}");
        assert!((c - 0.596347).abs() < 1e-6);
    }

    #[test]
    fn memoryless_rate_vanishes() {
        let m = SpectrumModel::memoryless();
        for &rho in &[0.01, 0.1, 1.0] {
            assert!(induced_channel_rate(&m, rho, &PskConstellation::qpsk()).unwrap() <= 1e-6);
        }
    }
}
