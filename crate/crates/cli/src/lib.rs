//! CSV front end for the `pskfade` library.
//!
//! Every subcommand writes a header row and one row per grid point, with
//! numbers at a fixed number of significant digits. Output depends only on
//! the flags, never on the thread count.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use pskfade::error::Error;
use pskfade::mc_sim::{run_recursive_training, ExecutionMode, SimConfig};
use pskfade::mutual_info::{coherent_gaussian_capacity, induced_channel_rate, PskConstellation};
use pskfade::numerics::special::{from_db, to_db};
use pskfade::prediction::{classify_regime, effective_snr, steady_state, transient_error_sequence};
use pskfade::rates::{
    clarke_small_p_asymptote, ct_small_p_coefficient, wideband_rate, wideband_rate_clarke,
    wideband_rate_gm,
};
use pskfade::spectral::{eval_spectrum, Family, SpectrumModel, TabulatedSpectrum, TimeBase};

#[derive(Debug, Parser)]
#[command(name = "pskfade", version, about = "PSK rates over correlated Rayleigh fading")]
pub struct Cli {
    /// Significant digits in numeric output.
    #[arg(long, global = true, default_value_t = 9, value_parser = clap::value_parser!(u8).range(1..=17))]
    pub precision: u8,
    /// Write the CSV to this file instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Effective SNR and regime labels of Gauss-Markov fading over an SNR sweep.
    Regimes {
        #[arg(long)]
        eps: f64,
        /// SNR sweep in dB as start:stop:step.
        #[arg(long, allow_hyphen_values = true)]
        sweep: SweepSpec,
    },
    /// PSK rate normalised by SNR, with the coherent Gaussian reference.
    NormalizedRate {
        #[command(flatten)]
        model: ModelArgs,
        /// PSK order.
        #[arg(long, default_value_t = 4)]
        psk: usize,
        #[arg(long, allow_hyphen_values = true)]
        sweep: SweepSpec,
    },
    /// Wideband rate of continuous-time fading over a sweep of the envelope P.
    Wideband {
        #[command(flatten)]
        model: ModelArgs,
        /// Envelope sweep in dB as start:stop:step.
        #[arg(long, allow_hyphen_values = true)]
        sweep: SweepSpec,
    },
    /// Monte Carlo run of recursive training against the analytic errors.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        rho: f64,
        /// Number of sub-channels, including the pilot.
        #[arg(long = "L")]
        len: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        psk: usize,
        /// Send pilots on every sub-channel.
        #[arg(long)]
        pilots_only: bool,
    },
    /// Prediction error and effective SNR against the number of observations.
    Transient {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        rho: f64,
        #[arg(long = "L")]
        len: usize,
    },
    /// Spectral density on a uniform grid.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 512)]
        points: usize,
        /// Upper frequency for continuous-time models.
        #[arg(long)]
        omega_max: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Memoryless,
    GmD,
    Notched,
    Peaked,
    TabulatedD,
    GmC,
    Clarke,
    TabulatedC,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = ModelKind::GmD)]
    pub model: ModelKind,
    /// Innovation rate of the discrete Gauss-Markov model.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Innovation rate of the continuous Gauss-Markov model.
    #[arg(long)]
    pub eps_c: Option<f64>,
    /// Maximum Doppler frequency of the Clarke model.
    #[arg(long)]
    pub omega_m: Option<f64>,
    /// Order of the notched and peaked families.
    #[arg(long)]
    pub n: Option<u32>,
    /// CSV table of frequency,density rows.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

impl ModelArgs {
    pub fn build(&self) -> Result<SpectrumModel, CliError> {
        fn need<T: Copy>(v: Option<T>, flag: &str) -> Result<T, CliError> {
            v.ok_or_else(|| CliError::Usage(format!("this model needs --{flag}")))
        }
        let table = |tb| -> Result<SpectrumModel, CliError> {
            let path = self.table.as_ref().ok_or_else(|| CliError::Usage("this model needs --table".into()))?;
            Ok(SpectrumModel::tabulated(TabulatedSpectrum::from_csv_path(path, tb)?))
        };
        Ok(match self.model {
            ModelKind::Memoryless => SpectrumModel::memoryless(),
            ModelKind::GmD => SpectrumModel::gauss_markov(need(self.eps, "eps")?)?,
            ModelKind::Notched => SpectrumModel::notched(need(self.n, "n")?)?,
            ModelKind::Peaked => SpectrumModel::peaked(need(self.n, "n")?)?,
            ModelKind::TabulatedD => table(TimeBase::Discrete)?,
            ModelKind::GmC => SpectrumModel::gauss_markov_continuous(need(self.eps_c, "eps-c")?)?,
            ModelKind::Clarke => SpectrumModel::clarke(need(self.omega_m, "omega-m")?)?,
            ModelKind::TabulatedC => table(TimeBase::Continuous)?,
        })
    }
}

/// Inclusive dB grid `start, start + step, ..., <= stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl SweepSpec {
    pub fn new(start_db: f64, stop_db: f64, step_db: f64) -> Result<Self, String> {
        if !(start_db.is_finite() && stop_db.is_finite() && step_db.is_finite()) {
            return Err("sweep bounds must be finite".into());
        }
        if step_db <= 0.0 {
            return Err(format!("sweep step must be positive, got {step_db}"));
        }
        if start_db > stop_db {
            return Err(format!("sweep start {start_db} exceeds stop {stop_db}"));
        }
        Ok(Self { start_db, stop_db, step_db })
    }

    /// Grid points computed as `start + i step` so no error accumulates.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start_db + i as f64 * self.step_db).collect()
    }
}

impl FromStr for SweepSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err(format!("expected start:stop:step, got '{s}'"));
        };
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("bad number '{t}': {e}"));
        Self::new(num(a)?, num(b)?, num(c)?)
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or parameters; exit code 2.
    Usage(String),
    /// The computation failed; exit code 1.
    Numeric(Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(e) => write!(f, "numeric failure: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(m) => CliError::Usage(m),
            Error::Table(m) => CliError::Usage(m),
            other => CliError::Numeric(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// `%g`-style formatting with `digits` significant digits and trailing
/// zeros removed.
pub fn format_number(v: f64, digits: u8) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let p = digits.max(1) as usize;
    let sci = format!("{:.*e}", p - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..p as i32).contains(&exp) {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

struct Table {
    digits: u8,
    text: String,
}

impl Table {
    fn new(digits: u8, header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { digits, text }
    }

    fn row(&mut self, cells: &[Cell]) {
        let line: Vec<String> = cells
            .iter()
            .map(|c| match c {
                Cell::Num(v) => format_number(*v, self.digits),
                Cell::Int(i) => i.to_string(),
                Cell::Text(t) => t.clone(),
            })
            .collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }
}

enum Cell {
    Num(f64),
    Int(usize),
    Text(String),
}

fn constellation(m: usize) -> Result<PskConstellation, CliError> {
    Ok(PskConstellation::new(m)?)
}

fn require_time_base(model: &SpectrumModel, discrete: bool) -> Result<(), CliError> {
    if model.is_discrete() == discrete {
        Ok(())
    } else {
        let kind = if discrete { "discrete-time" } else { "continuous-time" };
        Err(CliError::Usage(format!("{} is not a {kind} model", model.describe())))
    }
}

/// Runs one parsed command and returns the CSV text.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let digits = cli.precision;
    match &cli.command {
        Command::Regimes { eps, sweep } => {
            let model = SpectrumModel::gauss_markov(*eps)?;
            let rows: Vec<_> = sweep
                .points()
                .into_par_iter()
                .map(|db| -> Result<_, CliError> {
                    let rho = from_db(db);
                    let p = steady_state(&model, rho)?;
                    Ok((db, p, classify_regime(*eps, rho).regime))
                })
                .collect::<Result<_, _>>()?;
            let mut t = Table::new(digits, &["rho_db", "rho_eff_db", "sigma2_inf", "regime"]);
            for (db, p, regime) in rows {
                t.row(&[
                    Cell::Num(db),
                    Cell::Num(to_db(p.rho_eff)),
                    Cell::Num(p.sigma2_inf),
                    Cell::Text(regime.to_string()),
                ]);
            }
            Ok(t.text)
        }
        Command::NormalizedRate { model, psk, sweep } => {
            let model = model.build()?;
            require_time_base(&model, true)?;
            let c = constellation(*psk)?;
            let rows: Vec<_> = sweep
                .points()
                .into_par_iter()
                .map(|db| -> Result<_, CliError> {
                    let rho = from_db(db);
                    let rate = induced_channel_rate(&model, rho, &c)?;
                    let coherent = coherent_gaussian_capacity(rho)?;
                    Ok((db, rho, rate, coherent))
                })
                .collect::<Result<_, _>>()?;
            let mut t = Table::new(
                digits,
                &["rho_db", "rate_nats", "rate_over_rho", "coherent_gaussian_over_rho"],
            );
            for (db, rho, rate, coherent) in rows {
                t.row(&[Cell::Num(db), Cell::Num(rate), Cell::Num(rate / rho), Cell::Num(coherent / rho)]);
            }
            Ok(t.text)
        }
        Command::Wideband { model, sweep } => {
            let model = model.build()?;
            require_time_base(&model, false)?;
            let small_coefficient = match model.family() {
                Family::Clarke { .. } => None,
                _ => Some(ct_small_p_coefficient(&model)?),
            };
            let rows: Vec<_> = sweep
                .points()
                .into_par_iter()
                .map(|db| -> Result<_, CliError> {
                    let p = from_db(db);
                    let quadrature = wideband_rate(&model, p)?;
                    let (closed, small) = match model.family() {
                        Family::GaussMarkovContinuous { eps_c } => {
                            (wideband_rate_gm(*eps_c, p), small_coefficient.unwrap_or(f64::NAN) * p * p)
                        }
                        Family::Clarke { omega_m } => {
                            let small = if p < 1.0 { clarke_small_p_asymptote(*omega_m, p) } else { f64::NAN };
                            (wideband_rate_clarke(*omega_m, p), small)
                        }
                        _ => (quadrature, small_coefficient.unwrap_or(f64::NAN) * p * p),
                    };
                    Ok((db, closed, quadrature, small, p))
                })
                .collect::<Result<_, _>>()?;
            let mut t = Table::new(
                digits,
                &["p_db", "rate", "rate_quadrature", "small_p_asymptote", "large_p_asymptote"],
            );
            for (db, closed, quadrature, small, large) in rows {
                t.row(&[Cell::Num(db), Cell::Num(closed), Cell::Num(quadrature), Cell::Num(small), Cell::Num(large)]);
            }
            Ok(t.text)
        }
        Command::Simulate { model, rho, len, trials, seed, psk, pilots_only } => {
            let model = model.build()?;
            require_time_base(&model, true)?;
            let config = SimConfig {
                constellation: constellation(*psk)?,
                pilots_only: *pilots_only,
                mode: ExecutionMode::Parallel,
                ..SimConfig::new(model, *rho, *len, *trials, *seed)
            };
            let res = run_recursive_training(&config)?;
            let mut t = Table::new(digits, &["l", "sigma2_analytic", "sigma2_empirical", "stderr"]);
            for l in 0..*len {
                t.row(&[
                    Cell::Int(l),
                    Cell::Num(res.analytic_sigma2[l]),
                    Cell::Num(res.empirical_sigma2[l]),
                    Cell::Num(res.stderr[l]),
                ]);
            }
            writeln!(t.text, "# seed={}", res.rng_seed).expect("write to string");
            Ok(t.text)
        }
        Command::Transient { model, rho, len } => {
            let model = model.build()?;
            require_time_base(&model, true)?;
            if *len < 1 {
                return Err(CliError::Usage("--L must be at least 1".into()));
            }
            let mut sigma2 = vec![1.0];
            sigma2.extend(transient_error_sequence(&model, *rho, len - 1)?);
            let mut t = Table::new(digits, &["l", "sigma2", "rho_eff"]);
            for (l, s) in sigma2.into_iter().enumerate() {
                t.row(&[Cell::Int(l), Cell::Num(s), Cell::Num(effective_snr(s, *rho))]);
            }
            Ok(t.text)
        }
        Command::Spectrum { model, points, omega_max } => {
            let model = model.build()?;
            if *points < 2 {
                return Err(CliError::Usage("--points must be at least 2".into()));
            }
            let top = match (omega_max, model.family()) {
                (Some(w), _) if *w > 0.0 && w.is_finite() => *w,
                (Some(w), _) => return Err(CliError::Usage(format!("--omega-max must be positive, got {w}"))),
                (None, _) if model.is_discrete() => std::f64::consts::PI,
                (None, Family::Clarke { omega_m }) => *omega_m,
                // ten decay rates
                (None, Family::GaussMarkovContinuous { eps_c }) => -10.0 * (1.0 - eps_c).ln(),
                (None, Family::TabulatedContinuous(table)) => 2.0 * table.freqs().last().copied().unwrap_or(1.0),
                (None, _) => unreachable!("discrete families handled above"),
            };
            spectrum_rows(&model, digits, *points, top)
        }
    }
}

/// Density at cell midpoints of `[0, top]`, so band edges are never hit.
fn spectrum_rows(model: &SpectrumModel, digits: u8, points: usize, top: f64) -> Result<String, CliError> {
    let mut t = Table::new(digits, &["omega", "density"]);
    for i in 0..points {
        let w = (i as f64 + 0.5) * top / points as f64;
        t.row(&[Cell::Num(w), Cell::Num(eval_spectrum(model, w)?)]);
    }
    Ok(t.text)
}

/// Parses `args`, runs the command and writes the output.
pub fn run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        // help and version requests are not errors
        Err(e) if !e.use_stderr() => {
            e.print()?;
            return Ok(());
        }
        Err(e) => {
            let msg = e.render().to_string();
            let msg = msg.trim_end().trim_start_matches("error: ");
            return Err(CliError::Usage(msg.to_string()));
        }
    };
    run_parsed(&cli)
}

pub fn run_parsed(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot configure threads: {e}")))?;
    }
    let text = execute(cli)?;
    match &cli.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}
