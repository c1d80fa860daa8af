//! Globally adaptive Gauss-Kronrod quadrature.
//!
//! Every integral in the crate goes through [`integrate_piecewise`]: the
//! interval list is refined by repeatedly bisecting the segment with the
//! largest error estimate until the summed error meets the requested
//! tolerance. Semi-infinite ranges are mapped onto a finite one with
//! `omega = scale * tan(theta)`, and inverse-square-root edges (Clarke-type
//! spectra) with `omega = radius * sin(theta)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Error control for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-9,
            absolute_tolerance: 1e-12,
            max_subdivisions: 1 << 16,
        }
    }
}

impl QuadratureSpec {
    pub fn new(
        relative_tolerance: f64,
        absolute_tolerance: f64,
        max_subdivisions: usize,
    ) -> Result<Self> {
        if !(relative_tolerance > 0.0) || !(absolute_tolerance > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if max_subdivisions == 0 {
            return Err(Error::InvalidParameter(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(Self {
            relative_tolerance,
            absolute_tolerance,
            max_subdivisions,
        })
    }

    /// Pure relative error control; used for integrals whose magnitude
    /// spans many decades (low-SNR log-spectral integrals).
    pub fn relative(relative_tolerance: f64) -> Self {
        Self {
            relative_tolerance,
            absolute_tolerance: f64::MIN_POSITIVE,
            ..Self::default()
        }
    }

    fn tolerance(&self, estimate: f64) -> f64 {
        self.absolute_tolerance
            .max(self.relative_tolerance * estimate.abs())
    }
}

// 21-point Kronrod rule with the embedded 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_723_006,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_146,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut gauss = 0.0;
    let mut kronrod = fc * WGK[10];
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (1.0f64).min((200.0 * error / res_asc).powf(1.5));
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Segment { a, b, value, error }
}

/// Integrates `f` over the consecutive intervals defined by `points`
/// (strictly increasing). Breakpoints should sit on discontinuities or
/// kinks of the integrand; the error budget is shared across all pieces.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(
            "piecewise integration needs at least two points".into(),
        ));
    }
    for w in points.windows(2) {
        if !(w[0] < w[1]) || !w[0].is_finite() || !w[1].is_finite() {
            return Err(Error::InvalidInterval { a: w[0], b: w[1] });
        }
    }

    let mut heap = BinaryHeap::with_capacity(points.len() + 64);
    let mut frozen: Vec<Segment> = Vec::new();
    for w in points.windows(2) {
        heap.push(kronrod21(&f, w[0], w[1]));
    }
    let mut total: f64 = heap.iter().map(|s| s.value).sum();
    let mut error: f64 = heap.iter().map(|s| s.error).sum();
    let mut count = heap.len();

    while error > spec.tolerance(total) {
        if count >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                estimate: total,
                error_estimate: error,
                subdivisions: count,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            // Interval cannot be split further in floating point.
            frozen.push(worst);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let left = kronrod21(&f, worst.a, mid);
        let right = kronrod21(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        count += 1;
        if !error.is_finite() || !total.is_finite() {
            // Re-sum from scratch; incremental updates with infinities are meaningless.
            total = heap.iter().chain(&frozen).map(|s| s.value).sum();
            error = heap.iter().chain(&frozen).map(|s| s.error).sum();
            if !total.is_finite() {
                return Err(Error::NonConvergence {
                    estimate: total,
                    error_estimate: error,
                    subdivisions: count,
                });
            }
        }
    }

    // Final sum in a fixed order so results do not depend on heap layout.
    let mut segments: Vec<Segment> = heap.into_vec();
    segments.extend(frozen);
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value: f64 = segments.iter().map(|s| s.value).sum();
    let error: f64 = segments.iter().map(|s| s.error).sum();
    if !value.is_finite() || error > spec.tolerance(value) {
        return Err(Error::NonConvergence {
            estimate: value,
            error_estimate: error,
            subdivisions: count,
        });
    }
    Ok(value)
}

/// `∫_a^b f`. Endpoint singularities are tolerated as long as they are
/// integrable; the Kronrod nodes never touch the endpoints.
pub fn integrate_finite<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(a < b) {
        return Err(Error::InvalidInterval { a, b });
    }
    integrate_piecewise(f, &[a, b], spec)
}

/// `∫_0^∞ f` using `omega = tan(theta)`.
pub fn integrate_halfline<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    integrate_halfline_scaled(f, 1.0, spec)
}

/// `∫_0^∞ f` using `omega = scale * tan(theta)`; `scale` should be the
/// characteristic width of the integrand. Requires `f = O(omega^-2)`.
pub fn integrate_halfline_scaled<F: Fn(f64) -> f64>(
    f: F,
    scale: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "half-line scale must be positive, got {scale}"
        )));
    }
    check_tail(&f, scale)?;
    let mapped = |theta: f64| {
        let (s, c) = theta.sin_cos();
        if c <= 0.0 {
            return 0.0;
        }
        let omega = scale * s / c;
        let value = f(omega);
        if value == 0.0 {
            0.0
        } else {
            value * scale / (c * c)
        }
    };
    integrate_finite(mapped, 0.0, FRAC_PI_2, spec)
}

fn check_tail<F: Fn(f64) -> f64>(f: &F, scale: f64) -> Result<()> {
    let near = 1e4 * scale;
    let far = 1e8 * scale;
    let m_near = near * near * f(near).abs();
    let m_far = far * far * f(far).abs();
    if !m_far.is_finite() || (m_far > 10.0 * m_near && m_far > 1e-300) {
        return Err(Error::DivergentTail);
    }
    Ok(())
}

/// `∫_0^radius g(omega) d omega` through `omega = radius * sin(theta)`,
/// which cancels an inverse-square-root singularity of `g` at `radius`.
///
/// `g` receives `omega` and `sqrt(1 - (omega/radius)^2) = cos(theta)`,
/// the latter free of the cancellation a direct evaluation suffers near
/// the edge.
pub fn integrate_sine_substitution<F: Fn(f64, f64) -> f64>(
    g: F,
    radius: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidInterval { a: 0.0, b: radius });
    }
    integrate_finite(
        |theta: f64| {
            let (s, c) = theta.sin_cos();
            let value = g(radius * s, c);
            if value == 0.0 {
                0.0
            } else {
                value * radius * c
            }
        },
        0.0,
        FRAC_PI_2,
        spec,
    )
}

const RAYLEIGH_BREAKS: [f64; 6] = [0.0, 0.25, 1.0, 4.0, 16.0, 64.0];

/// `E[f(g)]` for `g` unit-mean exponential, i.e. `|h|^2` with `h ~ CN(0,1)`.
pub fn expect_rayleigh<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<f64> {
    let weighted = |g: f64| {
        let w = (-g).exp();
        if w == 0.0 {
            0.0
        } else {
            f(g) * w
        }
    };
    let body = integrate_piecewise(weighted, &RAYLEIGH_BREAKS, spec)?;
    let last = RAYLEIGH_BREAKS[RAYLEIGH_BREAKS.len() - 1];
    let tail = integrate_halfline_scaled(|u| weighted(last + u), 1.0, spec)?;
    Ok(body + tail)
}
