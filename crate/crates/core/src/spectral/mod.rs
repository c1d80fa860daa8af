//! Fading spectral densities and their scalar functionals.
//!
//! Discrete-time spectra live on `Omega in [-pi, pi]`, continuous-time ones
//! on the real line; both are even and carry unit power,
//! `(1/2pi) ∫ S = 1`. All integrals over even spectra are taken over the
//! non-negative half axis and doubled.
//!
//! ```
//! use pskfade::spectral::{square_integral, SpectrumModel};
//!
//! let gm = SpectrumModel::gauss_markov(0.5).unwrap();
//! assert!((square_integral(&gm).unwrap() - 3.0).abs() < 1e-9);
//! ```

mod discretize;
mod tabulated;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::special::x_minus_log1p;
use crate::numerics::{
    integrate_finite, integrate_halfline_scaled, integrate_piecewise, integrate_sine_substitution,
    QuadratureSpec,
};

pub use discretize::{autocorrelation_double_integral, discretize, DiscretizedChannel};
pub use tabulated::{TabulatedSpectrum, ZERO_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeBase {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Memoryless,
    /// First-order autoregressive fading with innovation rate `eps`.
    GaussMarkov { eps: f64 },
    /// Flat spectrum with a notch on `pi - pi/n < |Omega| <= pi`.
    Notched { n: u32 },
    /// Height `n` on `|Omega| <= pi/(n sqrt n)`, flat elsewhere.
    Peaked { n: u32 },
    TabulatedDiscrete(TabulatedSpectrum),
    /// `K(tau) = (1 - eps_c)^(|tau|/2)`.
    GaussMarkovContinuous { eps_c: f64 },
    /// Clarke/Jakes Doppler spectrum with maximum Doppler `omega_m`.
    Clarke { omega_m: f64 },
    TabulatedContinuous(TabulatedSpectrum),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumModel {
    family: Family,
}

/// Tolerances used for the spectral functionals.
pub fn spectral_quadrature() -> QuadratureSpec {
    QuadratureSpec::relative(1e-11)
}

fn check_param(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

impl SpectrumModel {
    pub fn memoryless() -> Self {
        Self {
            family: Family::Memoryless,
        }
    }

    pub fn gauss_markov(eps: f64) -> Result<Self> {
        check_param(eps > 0.0 && eps <= 1.0, || {
            format!("innovation rate must lie in (0, 1], got {eps}")
        })?;
        Ok(Self {
            family: Family::GaussMarkov { eps },
        })
    }

    pub fn notched(n: u32) -> Result<Self> {
        check_param(n >= 2, || format!("notch parameter must be at least 2, got {n}"))?;
        Ok(Self {
            family: Family::Notched { n },
        })
    }

    pub fn peaked(n: u32) -> Result<Self> {
        check_param(n >= 2, || format!("peak parameter must be at least 2, got {n}"))?;
        Ok(Self {
            family: Family::Peaked { n },
        })
    }

    /// Continuous-time Gauss-Markov fading. `eps_c = 1` gives a white
    /// (non-integrable) spectrum and is rejected.
    pub fn gauss_markov_continuous(eps_c: f64) -> Result<Self> {
        check_param(eps_c > 0.0 && eps_c < 1.0, || {
            format!("continuous innovation rate must lie in (0, 1), got {eps_c}")
        })?;
        Ok(Self {
            family: Family::GaussMarkovContinuous { eps_c },
        })
    }

    pub fn clarke(omega_m: f64) -> Result<Self> {
        check_param(omega_m > 0.0 && omega_m.is_finite(), || {
            format!("maximum Doppler frequency must be positive, got {omega_m}")
        })?;
        Ok(Self {
            family: Family::Clarke { omega_m },
        })
    }

    pub fn tabulated(table: TabulatedSpectrum) -> Self {
        let family = match table.time_base() {
            TimeBase::Discrete => Family::TabulatedDiscrete(table),
            TimeBase::Continuous => Family::TabulatedContinuous(table),
        };
        Self { family }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn time_base(&self) -> TimeBase {
        match self.family {
            Family::Memoryless
            | Family::GaussMarkov { .. }
            | Family::Notched { .. }
            | Family::Peaked { .. }
            | Family::TabulatedDiscrete(_) => TimeBase::Discrete,
            _ => TimeBase::Continuous,
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.time_base() == TimeBase::Discrete
    }

    /// Flat discrete spectrum: memoryless, or Gauss-Markov with `eps = 1`.
    pub fn is_white(&self) -> bool {
        match self.family {
            Family::Memoryless => true,
            Family::GaussMarkov { eps } => eps == 1.0,
            _ => false,
        }
    }

    /// Short human-readable label.
    pub fn describe(&self) -> String {
        match &self.family {
            Family::Memoryless => "memoryless".into(),
            Family::GaussMarkov { eps } => format!("gauss-markov eps={eps}"),
            Family::Notched { n } => format!("notched n={n}"),
            Family::Peaked { n } => format!("peaked n={n}"),
            Family::TabulatedDiscrete(t) => format!("tabulated discrete ({} points)", t.freqs().len()),
            Family::GaussMarkovContinuous { eps_c } => format!("gauss-markov continuous eps_c={eps_c}"),
            Family::Clarke { omega_m } => format!("clarke omega_m={omega_m}"),
            Family::TabulatedContinuous(t) => {
                format!("tabulated continuous ({} points)", t.freqs().len())
            }
        }
    }

    /// `|log(1 - eps_c)|` for the continuous Gauss-Markov family.
    pub(crate) fn gm_decay(eps_c: f64) -> f64 {
        -(-eps_c).ln_1p()
    }

    /// Spectral density without domain checks; even in `freq`.
    pub(crate) fn density(&self, freq: f64) -> f64 {
        let x = freq.abs();
        match &self.family {
            Family::Memoryless => 1.0,
            Family::GaussMarkov { eps } => {
                let eps = *eps;
                if eps == 1.0 {
                    return 1.0;
                }
                let b = (1.0 - eps).sqrt();
                // (2 - eps) - 2 b cos x = (1 - b)^2 + 4 b sin^2(x/2)
                let s = (0.5 * x).sin();
                let one_minus_b = eps / (1.0 + b);
                eps / (one_minus_b * one_minus_b + 4.0 * b * s * s)
            }
            Family::Notched { n } => {
                let n = *n as f64;
                if x > PI - PI / n {
                    0.0
                } else {
                    n / (n - 1.0)
                }
            }
            Family::Peaked { n } => {
                let (edge, low, high) = peaked_levels(*n);
                if x <= edge {
                    high
                } else {
                    low
                }
            }
            Family::TabulatedDiscrete(t) | Family::TabulatedContinuous(t) => t.eval(x),
            Family::GaussMarkovContinuous { eps_c } => {
                let lambda = Self::gm_decay(*eps_c);
                let a = 0.5 * lambda;
                lambda / (x * x + a * a)
            }
            Family::Clarke { omega_m } => {
                let u = x / omega_m;
                if u < 1.0 {
                    (2.0 / omega_m) / ((1.0 - u) * (1.0 + u)).sqrt()
                } else if u == 1.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }

    /// Breakpoints on `[0, pi]` for discrete-time quadrature.
    pub(crate) fn discrete_breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::GaussMarkov { eps } => {
                let mut pts = vec![0.0];
                let mut w = eps / 16.0;
                while w < PI {
                    pts.push(w);
                    w *= 4.0;
                }
                pts.push(PI);
                pts
            }
            Family::Notched { n } => vec![0.0, PI - PI / *n as f64, PI],
            Family::Peaked { n } => vec![0.0, peaked_levels(*n).0, PI],
            Family::TabulatedDiscrete(t) => t.freqs().to_vec(),
            _ => vec![0.0, PI],
        }
    }

    /// `(1/2pi) ∫_{-pi}^{pi} f(S(Omega)) dOmega` for a discrete model.
    pub fn discrete_mean<F: Fn(f64) -> f64>(&self, f: F, spec: &QuadratureSpec) -> Result<f64> {
        self.require(TimeBase::Discrete)?;
        let pts = self.discrete_breakpoints();
        Ok(integrate_piecewise(|w| f(self.density(w)), &pts, spec)? / PI)
    }

    /// `(1/2pi) ∫ f(S(omega)) d omega` over the real line for a continuous
    /// model. `f(0)` must vanish and `f(S)` must decay at least like `S`.
    pub fn continuous_mean<F: Fn(f64) -> f64>(&self, f: F, spec: &QuadratureSpec) -> Result<f64> {
        let half = match &self.family {
            Family::GaussMarkovContinuous { eps_c } => {
                let a = 0.5 * Self::gm_decay(*eps_c);
                integrate_halfline_scaled(|w| f(self.density(w)), a, spec)?
            }
            Family::Clarke { omega_m } => {
                let wm = *omega_m;
                integrate_sine_substitution(|_, c| f(2.0 / (wm * c)), wm, spec)?
            }
            Family::TabulatedContinuous(t) => {
                let grid = t.freqs();
                let w_last = *grid.last().unwrap();
                let body = integrate_piecewise(|w| f(t.eval(w)), grid, spec)?;
                let tail = if t.tail_constant() > 0.0 {
                    integrate_halfline_scaled(|u| f(t.eval(w_last + u)), w_last, spec)?
                } else {
                    0.0
                };
                body + tail
            }
            _ => return Err(self.wrong_base(TimeBase::Continuous)),
        };
        Ok(half / PI)
    }

    fn require(&self, base: TimeBase) -> Result<()> {
        if self.time_base() == base {
            Ok(())
        } else {
            Err(self.wrong_base(base))
        }
    }

    fn wrong_base(&self, wanted: TimeBase) -> Error {
        Error::InvalidParameter(format!(
            "{} is not a {} model",
            self.describe(),
            match wanted {
                TimeBase::Discrete => "discrete-time",
                TimeBase::Continuous => "continuous-time",
            }
        ))
    }
}

/// `(edge, low, high)` for the peaked family.
fn peaked_levels(n: u32) -> (f64, f64, f64) {
    let nf = n as f64;
    let frac = 1.0 / (nf * nf.sqrt());
    let edge = PI * frac;
    // power: frac * n + (1 - frac) * low = 1
    let low = (1.0 - nf * frac) / (1.0 - frac);
    (edge, low, nf)
}

/// Spectral density at `freq` (`Omega` for discrete, `omega` for continuous).
pub fn eval_spectrum(model: &SpectrumModel, freq: f64) -> Result<f64> {
    if model.is_discrete() && !(freq.abs() <= PI * (1.0 + 1e-12)) {
        return Err(Error::OutOfDomain { freq });
    }
    Ok(model.density(freq))
}

/// Autocorrelation `r[k]` (discrete, integer `tau`) or `K(tau)`.
pub fn autocorrelation(model: &SpectrumModel, tau: f64) -> Result<Complex64> {
    if !tau.is_finite() {
        return Err(Error::InvalidParameter(format!("lag must be finite, got {tau}")));
    }
    if tau == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if model.is_discrete() && tau.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "discrete-time lag must be an integer, got {tau}"
        )));
    }
    let t = tau.abs();
    let value = match &model.family {
        Family::Memoryless => 0.0,
        Family::GaussMarkov { eps } => (0.5 * t * (-eps).ln_1p()).exp(),
        Family::Notched { n } => {
            let nf = *n as f64;
            let edge = PI - PI / nf;
            nf / (nf - 1.0) * (t * edge).sin() / (t * PI)
        }
        Family::Peaked { n } => {
            let (edge, low, high) = peaked_levels(*n);
            (high - low) * (t * edge).sin() / (t * PI)
        }
        Family::TabulatedDiscrete(table) | Family::TabulatedContinuous(table) => {
            table.cosine_transform(t)
        }
        Family::GaussMarkovContinuous { eps_c } => (0.5 * t * (-eps_c).ln_1p()).exp(),
        Family::Clarke { omega_m } => {
            // (2/pi) ∫_0^{pi/2} cos(omega_m t sin theta) d theta = J0(omega_m t)
            let z = omega_m * t;
            let spec = QuadratureSpec::default();
            integrate_finite(|th| (z * th.sin()).cos(), 0.0, FRAC_PI_2, &spec)? * 2.0 / PI
        }
    };
    Ok(Complex64::new(value, 0.0))
}

/// `(1/2pi) ∫ S` for either time base; one for every valid model.
pub fn total_power(model: &SpectrumModel) -> Result<f64> {
    let spec = spectral_quadrature();
    if model.is_discrete() {
        model.discrete_mean(|s| s, &spec)
    } else {
        model.continuous_mean(|s| s, &spec)
    }
}

/// `(1/2pi) ∫ S^2 dOmega` of a discrete-time spectrum.
pub fn square_integral(model: &SpectrumModel) -> Result<f64> {
    if model.is_white() {
        return Ok(1.0);
    }
    // never below one for a unit-power spectrum
    Ok(model.discrete_mean(|s| s * s, &spectral_quadrature())?.max(1.0))
}

/// `g(rho) = (1/2pi) ∫ log(1 + rho S) dOmega`.
pub fn log_spectral_integral(model: &SpectrumModel, rho: f64) -> Result<f64> {
    check_param(rho >= 0.0, || format!("SNR must be non-negative, got {rho}"))?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    model.discrete_mean(|s| (rho * s).ln_1p(), &spectral_quadrature())
}

/// `rho - g(rho) = (1/2pi) ∫ (rho S - log(1 + rho S)) dOmega`, computed
/// without cancellation.
pub fn log_spectral_deficit(model: &SpectrumModel, rho: f64) -> Result<f64> {
    check_param(rho >= 0.0, || format!("SNR must be non-negative, got {rho}"))?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    model.discrete_mean(|s| x_minus_log1p(rho * s), &spectral_quadrature())
}

/// `exp{(1/2pi) ∫ log S dOmega}`; zero when `S` vanishes on a set of
/// positive measure.
pub fn noiseless_pred_error(model: &SpectrumModel) -> Result<f64> {
    if zero_set_measure(model)? > 0.0 {
        return Ok(0.0);
    }
    let mean_log = model.discrete_mean(
        |s| if s > 0.0 { s.ln() } else { f64::NEG_INFINITY },
        &QuadratureSpec::relative(1e-10),
    )?;
    Ok(mean_log.exp().clamp(0.0, 1.0))
}

/// `(1/2pi) * measure{Omega : S(Omega) = 0}`.
pub fn zero_set_measure(model: &SpectrumModel) -> Result<f64> {
    model.require(TimeBase::Discrete)?;
    Ok(match &model.family {
        Family::Notched { n } => 1.0 / *n as f64,
        Family::TabulatedDiscrete(t) => t.zero_set_fraction(),
        _ => 0.0,
    })
}

/// `(1/2pi) ∫ log(1 + P S_c(omega)) d omega` for a continuous model.
pub fn ct_log_spectral_integral(model: &SpectrumModel, power: f64) -> Result<f64> {
    check_param(power >= 0.0, || format!("power must be non-negative, got {power}"))?;
    if power == 0.0 {
        return Ok(0.0);
    }
    model.continuous_mean(|s| (power * s).ln_1p(), &spectral_quadrature())
}

/// `(1/2pi) ∫ (P S_c - log(1 + P S_c)) d omega` for a continuous model.
pub fn ct_log_spectral_deficit(model: &SpectrumModel, power: f64) -> Result<f64> {
    check_param(power >= 0.0, || format!("power must be non-negative, got {power}"))?;
    if power == 0.0 {
        return Ok(0.0);
    }
    model.continuous_mean(|s| x_minus_log1p(power * s), &spectral_quadrature())
}

/// `(1/2pi) ∫ S_c^2 d omega`. Clarke's spectrum is not square integrable
/// and yields [`Error::Divergent`].
pub fn ct_square_integral(model: &SpectrumModel) -> Result<f64> {
    match &model.family {
        Family::Clarke { omega_m } => {
            let wm = *omega_m;
            let spec = spectral_quadrature();
            let v = integrate_toward_edge(|w| model.density(w).powi(2), wm, &spec)?;
            Ok(v / PI)
        }
        _ => model.continuous_mean(|s| s * s, &spectral_quadrature()),
    }
}

/// `∫_0^edge f` for `f` with a possible singularity at `edge`, by
/// escalating truncation `edge (1 - 4^-k)`. Geometrically shrinking
/// increments are extrapolated to the edge; increments that stop
/// shrinking, or partial integrals beyond `1e6`, mean divergence.
pub(crate) fn integrate_toward_edge<F: Fn(f64) -> f64>(
    f: F,
    edge: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    const MAX_STEPS: i32 = 24;
    const LIMIT: f64 = 1e6;
    let mut total = 0.0;
    let mut prev_inc = f64::NAN;
    let mut prev_estimate = f64::NAN;
    let mut stalled = 0;
    let mut lower = 0.0;
    for k in 1..=MAX_STEPS {
        let upper = edge * (1.0 - 0.25f64.powi(k));
        let piece = integrate_finite(&f, lower, upper, spec)?;
        total += piece;
        if !total.is_finite() || total.abs() > LIMIT {
            return Err(Error::Divergent(format!(
                "partial integral exceeded {LIMIT:e} at truncation {k}"
            )));
        }
        if piece == 0.0 {
            return Ok(total);
        }
        if prev_inc.is_finite() {
            let q = piece.abs() / prev_inc;
            if q > 0.9 {
                stalled += 1;
                if stalled >= 4 {
                    return Err(Error::Divergent(format!(
                        "partial integrals keep growing near the edge (last increment {piece:e})"
                    )));
                }
            } else {
                stalled = 0;
                let estimate = total + piece * q / (1.0 - q);
                if (estimate - prev_estimate).abs() <= spec.relative_tolerance * estimate.abs() {
                    return Ok(estimate);
                }
                prev_estimate = estimate;
            }
        }
        prev_inc = piece.abs();
        lower = upper;
    }
    Err(Error::Divergent(format!(
        "no convergence after {MAX_STEPS} truncations"
    )))
}
