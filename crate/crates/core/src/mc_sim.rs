//! Monte Carlo simulation of recursive training on interleaved sub-channels.
//!
//! Each trial draws one fading path `h[0..L]` across the parallel
//! sub-channels (PSCs). PSC 0 carries a known pilot; PSC `l` is predicted
//! from the phase-compensated observations `x'[i] = conj(s[i]) x[i]` of
//! PSCs `0..l`, with decisions assumed correct. Trial `t` uses the ChaCha8
//! stream `t` of the configured seed, and trials are reduced in fixed
//! chunks in trial order, so results do not depend on the thread count.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::mutual_info::PskConstellation;
use crate::numerics::levinson_durbin;
use crate::prediction::{autocorrelation_lags, effective_snr, transient_error_sequence};
use crate::spectral::{Family, SpectrumModel};

const CHUNK: usize = 1024;
/// Largest allowed covariance error per lag from clipping negative
/// circulant eigenvalues (their total mass divided by the embedding size).
const EMBEDDING_TOLERANCE: f64 = 1e-4;
const MAX_EMBEDDING_DOUBLINGS: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecutionMode {
    #[default]
    Parallel,
    /// Same chunked reduction run on the calling thread.
    Sequential,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub model: SpectrumModel,
    pub rho: f64,
    /// Number of PSCs, including the pilot PSC 0.
    pub len: usize,
    pub trials: usize,
    pub seed: u64,
    pub constellation: PskConstellation,
    /// Send the pilot symbol on every PSC instead of random data.
    pub pilots_only: bool,
    pub mode: ExecutionMode,
}

impl SimConfig {
    pub fn new(model: SpectrumModel, rho: f64, len: usize, trials: usize, seed: u64) -> Self {
        Self {
            model,
            rho,
            len,
            trials,
            seed,
            constellation: PskConstellation::default(),
            pilots_only: false,
            mode: ExecutionMode::Parallel,
        }
    }

    fn validate(&self) -> Result<()> {
        if !self.model.is_discrete() {
            return Err(Error::InvalidParameter(
                "simulation needs a discrete-time model".into(),
            ));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "SNR must be positive, got {}",
                self.rho
            )));
        }
        if self.len < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 PSCs, got {}",
                self.len
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("need at least one trial".into()));
        }
        Ok(())
    }
}

/// Per-PSC statistics; index `l` is PSC `l`, predicted from `l` observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub empirical_sigma2: Vec<f64>,
    /// Standard error of each `empirical_sigma2` entry.
    pub stderr: Vec<f64>,
    pub analytic_sigma2: Vec<f64>,
    pub empirical_rho_eff: Vec<f64>,
    pub trials: usize,
    pub rng_seed: u64,
}

/// Generator of stationary circular Gaussian paths for one model.
#[derive(Clone)]
pub enum FadingSynthesizer {
    /// Exact first-order recursion with stationary start.
    GaussMarkov { len: usize, eps: f64 },
    /// Circulant embedding of the autocorrelation; `scale[k] = sqrt(lambda_k / m)`.
    Circulant {
        len: usize,
        scale: Vec<f64>,
        fft: Arc<dyn Fft<f64>>,
    },
}

impl fmt::Debug for FadingSynthesizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::GaussMarkov { len, eps } => f
                .debug_struct("GaussMarkov")
                .field("len", len)
                .field("eps", eps)
                .finish(),
            Self::Circulant { len, scale, .. } => f
                .debug_struct("Circulant")
                .field("len", len)
                .field("embedding", &scale.len())
                .finish(),
        }
    }
}

impl FadingSynthesizer {
    pub fn new(model: &SpectrumModel, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidParameter("path length must be positive".into()));
        }
        if let Family::GaussMarkov { eps } = model.family() {
            return Ok(Self::GaussMarkov { len, eps: *eps });
        }
        let base = (2 * len.saturating_sub(1)).max(2).next_power_of_two();
        let mut worst = f64::NAN;
        let mut planner = FftPlanner::new();
        for doubling in 0..=MAX_EMBEDDING_DOUBLINGS {
            let m = base << doubling;
            let r = autocorrelation_lags(model, m / 2)?;
            let mut c = vec![Complex64::default(); m];
            c[..=m / 2].copy_from_slice(&r[..=m / 2]);
            for k in 1..m / 2 {
                c[m - k] = r[k].conj();
            }
            planner.plan_fft_forward(m).process(&mut c);
            worst = c.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
            // Spectra with jumps ring at every size; only the clipped mass shrinks.
            let clipped = c.iter().map(|v| (-v.re).max(0.0)).sum::<f64>() / m as f64;
            if clipped <= EMBEDDING_TOLERANCE {
                let scale = c.iter().map(|v| (v.re.max(0.0) / m as f64).sqrt()).collect();
                let fft = planner.plan_fft_inverse(m);
                return Ok(Self::Circulant { len, scale, fft });
            }
        }
        Err(Error::EmbeddingFailure {
            min_eigenvalue: worst,
        })
    }

    pub fn len(&self) -> usize {
        match self {
            Self::GaussMarkov { len, .. } | Self::Circulant { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Vec<Complex64> {
        match self {
            Self::GaussMarkov { len, eps } => {
                let a = (1.0 - eps).sqrt();
                let b = eps.sqrt();
                let mut h = Vec::with_capacity(*len);
                let mut cur = complex_normal(rng);
                h.push(cur);
                for _ in 1..*len {
                    cur = cur * a + complex_normal(rng) * b;
                    h.push(cur);
                }
                h
            }
            Self::Circulant { len, scale, fft } => {
                let mut buf: Vec<Complex64> =
                    scale.iter().map(|&s| complex_normal(rng) * s).collect();
                fft.process(&mut buf);
                buf.truncate(*len);
                buf
            }
        }
    }
}

/// `CN(0, 1)` sample.
fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// One stationary fading path of length `n`.
pub fn synthesize_fading(model: &SpectrumModel, n: usize, seed: u64) -> Result<Vec<Complex64>> {
    let synth = FadingSynthesizer::new(model, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(synth.sample(&mut rng))
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

struct Accumulator {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Self {
            sum: vec![0.0; len],
            sum_sq: vec![0.0; len],
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.sum.iter_mut().zip(other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(other.sum_sq) {
            *a += b;
        }
        self
    }
}

/// Runs the recursive-training simulation.
pub fn run_recursive_training(config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let len = config.len;
    let rho = config.rho;
    let synth = FadingSynthesizer::new(&config.model, len)?;

    // Observation predictors for every history length; coefficients of the
    // channel predictor are these divided by sqrt(rho).
    let r = autocorrelation_lags(&config.model, len - 1)?;
    let gamma: Vec<Complex64> = r
        .iter()
        .enumerate()
        .map(|(k, &rk)| rk * rho + if k == 0 { 1.0 } else { 0.0 })
        .collect();
    let inv_sqrt_rho = 1.0 / rho.sqrt();
    let predictors: Vec<Vec<Complex64>> = levinson_durbin(&gamma, len - 1)?
        .coefficients
        .into_iter()
        .map(|a| a.into_iter().map(|c| c * inv_sqrt_rho).collect())
        .collect();

    let mut analytic = vec![1.0];
    analytic.extend(transient_error_sequence(&config.model, rho, len - 1)?);

    let points = config.constellation.points();
    let sqrt_rho = rho.sqrt();
    let run_chunk = |chunk: usize| -> Accumulator {
        let mut acc = Accumulator::new(len);
        let start = chunk * CHUNK;
        let end = (start + CHUNK).min(config.trials);
        let mut observed = vec![Complex64::default(); len];
        for trial in start..end {
            let mut rng = trial_rng(config.seed, trial);
            let h = synth.sample(&mut rng);
            for i in 0..len {
                let s = if i == 0 || config.pilots_only {
                    points[0]
                } else {
                    points[rng.random_range(0..points.len())]
                };
                let z = complex_normal(&mut rng);
                let x = h[i] * s * sqrt_rho + z;
                observed[i] = s.conj() * x;
            }
            for l in 0..len {
                let estimate: Complex64 = if l == 0 {
                    Complex64::default()
                } else {
                    predictors[l - 1]
                        .iter()
                        .enumerate()
                        .map(|(j, w)| w * observed[l - 1 - j])
                        .sum()
                };
                let e = (h[l] - estimate).norm_sqr();
                acc.sum[l] += e;
                acc.sum_sq[l] += e * e;
            }
        }
        acc
    };

    let chunks = config.trials.div_ceil(CHUNK);
    let partials: Vec<Accumulator> = match config.mode {
        ExecutionMode::Parallel => (0..chunks).into_par_iter().map(run_chunk).collect(),
        ExecutionMode::Sequential => (0..chunks).map(run_chunk).collect(),
    };
    let total = partials
        .into_iter()
        .fold(Accumulator::new(len), Accumulator::merge);

    let n = config.trials as f64;
    let empirical: Vec<f64> = total.sum.iter().map(|s| s / n).collect();
    let stderr = total
        .sum_sq
        .iter()
        .zip(&empirical)
        .map(|(sq, m)| {
            if config.trials < 2 {
                return f64::NAN;
            }
            let var = ((sq - n * m * m) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        })
        .collect();
    let empirical_rho_eff = empirical
        .iter()
        .map(|&s| effective_snr(s.min(1.0), rho))
        .collect();
    Ok(SimResult {
        empirical_sigma2: empirical,
        stderr,
        analytic_sigma2: analytic,
        empirical_rho_eff,
        trials: config.trials,
        rng_seed: config.seed,
    })
}
