//! Piecewise-linear spectra read from a table.
//!
//! Tables are one-sided (`freq >= 0`) and extended evenly. Discrete-time
//! tables must span exactly `[0, pi]`; continuous-time tables cover
//! `[0, omega_last]` and continue as `S_last * (omega_last / omega)^2`
//! beyond the last row. The densities are rescaled to unit power on
//! construction and the applied factor is kept in
//! [`TabulatedSpectrum::normalization`].

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use num_complex::Complex64;

use super::TimeBase;
use crate::error::{Error, Result};

/// Densities below this count as zero when measuring the zero set.
pub const ZERO_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSpectrum {
    freqs: Vec<f64>,
    density: Vec<f64>,
    time_base: TimeBase,
    normalization: f64,
}

impl TabulatedSpectrum {
    pub fn new(freqs: Vec<f64>, density: Vec<f64>, time_base: TimeBase) -> Result<Self> {
        let mut freqs = freqs;
        if freqs.len() != density.len() {
            return Err(Error::Table(format!(
                "{} frequencies but {} densities",
                freqs.len(),
                density.len()
            )));
        }
        if freqs.len() < 2 {
            return Err(Error::Table("need at least two rows".into()));
        }
        if freqs.iter().chain(&density).any(|v| !v.is_finite()) {
            return Err(Error::Table("non-finite entry".into()));
        }
        if freqs[0] != 0.0 {
            return Err(Error::Table(format!(
                "table must start at frequency 0 (one-sided), got {}",
                freqs[0]
            )));
        }
        if freqs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Table("frequencies must be strictly increasing".into()));
        }
        if density.iter().any(|&s| s < 0.0) {
            return Err(Error::Table("negative spectral density".into()));
        }
        if time_base == TimeBase::Discrete {
            let last = *freqs.last().unwrap();
            if (last - PI).abs() > 1e-9 {
                return Err(Error::Table(format!(
                    "discrete-time table must end at pi, got {last}"
                )));
            }
            *freqs.last_mut().unwrap() = PI;
        }
        let mut table = Self {
            freqs,
            density,
            time_base,
            normalization: 1.0,
        };
        let power = table.raw_power();
        if !(power > 0.0) {
            return Err(Error::Table("spectrum has zero power".into()));
        }
        let factor = 1.0 / power;
        table.density.iter_mut().for_each(|s| *s *= factor);
        table.normalization = factor;
        Ok(table)
    }

    /// Reads a two-column CSV (`freq,density`) with a header row.
    pub fn from_csv_reader<R: Read>(reader: R, time_base: TimeBase) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut freqs = Vec::new();
        let mut density = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Table(e.to_string()))?;
            if record.len() != 2 {
                return Err(Error::Table(format!(
                    "row {}: expected 2 columns, found {}",
                    i + 2,
                    record.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Table(format!("row {}: {e}: {s:?}", i + 2)))
            };
            freqs.push(parse(&record[0])?);
            density.push(parse(&record[1])?);
        }
        Self::new(freqs, density, time_base)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P, time_base: TimeBase) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Table(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file, time_base)
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn density_values(&self) -> &[f64] {
        &self.density
    }

    pub fn time_base(&self) -> TimeBase {
        self.time_base
    }

    /// Factor applied to the input densities to reach unit power.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    fn last(&self) -> (f64, f64) {
        (*self.freqs.last().unwrap(), *self.density.last().unwrap())
    }

    /// Constant `C` with `S(omega) = C / omega^2` beyond the table.
    pub(crate) fn tail_constant(&self) -> f64 {
        let (w, s) = self.last();
        s * w * w
    }

    /// (1/pi) times the one-sided integral, before normalisation.
    fn raw_power(&self) -> f64 {
        let body: f64 = self
            .freqs
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(f, s)| 0.5 * (s[0] + s[1]) * (f[1] - f[0]))
            .sum();
        let tail = match self.time_base {
            TimeBase::Discrete => 0.0,
            TimeBase::Continuous => {
                let (w, s) = self.last();
                s * w
            }
        };
        (body + tail) / PI
    }

    /// Density at `|freq|` by linear interpolation.
    pub fn eval(&self, freq: f64) -> f64 {
        let x = freq.abs();
        let (w_last, s_last) = self.last();
        if x >= w_last {
            return match self.time_base {
                TimeBase::Discrete => s_last,
                TimeBase::Continuous => s_last * (w_last / x) * (w_last / x),
            };
        }
        let i = self.freqs.partition_point(|&w| w <= x).max(1) - 1;
        let (x0, x1) = (self.freqs[i], self.freqs[i + 1]);
        let (y0, y1) = (self.density[i], self.density[i + 1]);
        let t = (x - x0) / (x1 - x0);
        y0 + t * (y1 - y0)
    }

    /// `(1/2pi) * measure{omega in [-pi, pi] : S < ZERO_THRESHOLD}` for
    /// discrete tables; exact for the linear interpolant.
    pub fn zero_set_fraction(&self) -> f64 {
        let thr = ZERO_THRESHOLD;
        let mut measure = 0.0;
        for (f, s) in self.freqs.windows(2).zip(self.density.windows(2)) {
            let width = f[1] - f[0];
            let (lo, hi) = if s[0] <= s[1] { (s[0], s[1]) } else { (s[1], s[0]) };
            if hi < thr {
                measure += width;
            } else if lo < thr {
                measure += width * (thr - lo) / (hi - lo);
            }
        }
        measure / PI
    }

    /// `(1/pi) ∫ S(omega) cos(omega t) d omega` over the table plus the
    /// `omega^-2` tail for continuous tables. Exact for the interpolant.
    pub fn cosine_transform(&self, t: f64) -> f64 {
        let t = t.abs();
        let mut acc = 0.0;
        for (f, s) in self.freqs.windows(2).zip(self.density.windows(2)) {
            acc += linear_cosine_segment(f[0], f[1] - f[0], s[0], s[1], t);
        }
        if self.time_base == TimeBase::Continuous {
            let (w, s) = self.last();
            if s > 0.0 {
                // ∫_w^∞ cos(t x)/x^2 dx = cos(w t)/w - t (pi/2 - Si(w t))
                let c = s * w * w;
                let tail = if t == 0.0 {
                    c / w
                } else {
                    c * ((w * t).cos() / w - t * (std::f64::consts::FRAC_PI_2 - sine_integral(w * t)))
                };
                acc += tail;
            }
        }
        acc / PI
    }
}

/// ∫_0^Δ (y0 + (y1-y0) u/Δ) cos(t (x0 + u)) du, stable for small tΔ.
fn linear_cosine_segment(x0: f64, delta: f64, y0: f64, y1: f64, t: f64) -> f64 {
    let theta = t * delta;
    // E1 = ∫_0^1 e^{jθv} dv, E2 = ∫_0^1 v e^{jθv} dv
    let (e1, e2) = if theta.abs() < 0.5 {
        let mut e1 = Complex64::default();
        let mut e2 = Complex64::default();
        let mut term = Complex64::new(1.0, 0.0); // (jθ)^k / k!
        for k in 0..30 {
            e1 += term / (k as f64 + 1.0);
            e2 += term / (k as f64 + 2.0);
            term *= Complex64::new(0.0, theta) / (k as f64 + 1.0);
        }
        (e1, e2)
    } else {
        let j = Complex64::i();
        let e = Complex64::from_polar(1.0, theta);
        let e1 = (e - 1.0) / (j * theta);
        let e2 = e / (j * theta) + (e - 1.0) / (theta * theta);
        (e1, e2)
    };
    let phase = Complex64::from_polar(1.0, t * x0);
    let integral = phase * delta * (e1 * y0 + e2 * (y1 - y0));
    integral.re
}

/// Si(x) = ∫_0^x sin(u)/u du.
pub(crate) fn sine_integral(x: f64) -> f64 {
    let sign = x.signum();
    let x = x.abs();
    if x == 0.0 {
        return 0.0;
    }
    if x <= 40.0 {
        let spec = crate::numerics::QuadratureSpec::default();
        let v = crate::numerics::integrate_finite(crate::numerics::special::sinc, 0.0, x, &spec)
            .unwrap_or(f64::NAN);
        return sign * v;
    }
    // asymptotic auxiliary functions f(x), g(x)
    let x2 = x * x;
    let f = (1.0 - 2.0 / x2 + 24.0 / (x2 * x2) - 720.0 / (x2 * x2 * x2)) / x;
    let g = (1.0 - 6.0 / x2 + 120.0 / (x2 * x2) - 5040.0 / (x2 * x2 * x2)) / x2;
    sign * (std::f64::consts::FRAC_PI_2 - f * x.cos() - g * x.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let d = TimeBase::Discrete;
        assert!(TabulatedSpectrum::new(vec![0.0], vec![1.0], d).is_err());
        assert!(TabulatedSpectrum::new(vec![0.1, PI], vec![1.0, 1.0], d).is_err());
        assert!(TabulatedSpectrum::new(vec![0.0, 1.0], vec![1.0, 1.0], d).is_err());
        assert!(TabulatedSpectrum::new(vec![0.0, PI], vec![1.0, -1.0], d).is_err());
        assert!(TabulatedSpectrum::new(vec![0.0, PI], vec![0.0, 0.0], d).is_err());
        assert!(TabulatedSpectrum::new(vec![0.0, 2.0, 1.0, PI], vec![1.0; 4], d).is_err());
    }

    #[test]
    fn normalises_to_unit_power() {
        let t = TabulatedSpectrum::new(vec![0.0, 1.0, PI], vec![4.0, 2.0, 2.0], TimeBase::Discrete)
            .unwrap();
        let raw = (3.0 + 2.0 * (PI - 1.0)) / PI;
        assert!((t.normalization() - 1.0 / raw).abs() < 1e-15);
        assert!((t.raw_power() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let text = "freq,density\n0.0,1.0\n3.141592653589793,1.0\n";
        let t = TabulatedSpectrum::from_csv_reader(text.as_bytes(), TimeBase::Discrete).unwrap();
        assert_eq!(t.eval(1.0), 1.0);
        let bad = "freq,density\n0.0,abc\n3.14159,1\n";
        assert!(matches!(
            TabulatedSpectrum::from_csv_reader(bad.as_bytes(), TimeBase::Discrete),
            Err(Error::Table(_))
        ));
        let three = "a,b,c\n0,1,2\n";
        assert!(TabulatedSpectrum::from_csv_reader(three.as_bytes(), TimeBase::Discrete).is_err());
    }

    #[test]
    fn zero_fraction_of_linear_ramp() {
        // density 0 on [0, 1], ramps up to 1 at 2, flat to pi
        let t = TabulatedSpectrum::new(
            vec![0.0, 1.0, 2.0, PI],
            vec![0.0, 0.0, 1.0, 1.0],
            TimeBase::Discrete,
        )
        .unwrap();
        let frac = t.zero_set_fraction();
        assert!((1.0 / PI..1.0 / PI + 1e-10).contains(&frac), "{frac}");
    }

    #[test]
    fn cosine_segment_matches_quadrature() {
        let spec = crate::numerics::QuadratureSpec::default();
        for &(x0, d, y0, y1, t) in &[
            (0.0, 1.0, 1.0, 3.0, 0.0),
            (0.3, 0.01, 2.0, -1.0, 1e-3),
            (1.0, 2.0, 0.5, 1.5, 7.0),
            (0.2, 0.5, 1.0, 0.0, 0.9),
        ] {
            let exact = linear_cosine_segment(x0, d, y0, y1, t);
            let q = crate::numerics::integrate_finite(
                |u| (y0 + (y1 - y0) * u / d) * (t * (x0 + u)).cos(),
                0.0,
                d,
                &spec,
            )
            .unwrap();
            assert!((exact - q).abs() < 1e-12, "{exact} {q}");
        }
    }

    #[test]
    fn sine_integral_values() {
        // Si(1) = 0.946083070367183, Si(100) = 1.562225466889056
        assert!((sine_integral(1.0) - 0.946_083_070_367_183).abs() < 1e-12);
        assert!((sine_integral(100.0) - 1.562_225_466_889_056).abs() < 1e-10);
        assert!((sine_integral(-1.0) + 0.946_083_070_367_183).abs() < 1e-12);
        // branches meet at 40
        let a = sine_integral(40.0);
        let b = sine_integral(40.0 + 1e-9);
        assert!((a - b).abs() < 1e-8);
    }
}
