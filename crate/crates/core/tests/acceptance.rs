//! Acceptance suite: one line per criterion, run with
//! `cargo test -p pskfade --test acceptance -- --nocapture`.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use pskfade::error::Error;
use pskfade::mc_sim::{run_recursive_training, SimConfig};
use pskfade::mutual_info::{induced_channel_rate, PskConstellation};
use pskfade::numerics::special::{from_db, to_db};
use pskfade::prediction::{gm_steady_state_error, steady_state, steady_state_error};
use pskfade::rates::{
    capacity_per_unit_energy_ct, capacity_upper_bound_dt, ct_small_p_coefficient, low_snr_rate,
    wideband_rate, wideband_rate_clarke, wideband_rate_gm,
};
use pskfade::spectral::{
    noiseless_pred_error, square_integral, SpectrumModel, TabulatedSpectrum, TimeBase,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn db_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

fn gm_square_integral() -> Outcome {
    let mut worst: f64 = 0.0;
    for eps in [1e-1, 1e-2, 1e-3] {
        let q = square_integral(&SpectrumModel::gauss_markov(eps).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        worst = worst.max(rel(q, 2.0 / eps - 1.0));
    }
    check(worst <= 1e-6, format!("max relative error {worst:.2e}"))
}

fn steady_state_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for eps in [1e-1, 1e-2, 1e-4] {
        let model = SpectrumModel::gauss_markov(eps).map_err(|e| e.to_string())?;
        for k in 0..9 {
            let rho = 10f64.powi(k - 4);
            let q = steady_state_error(&model, rho).map_err(|e| e.to_string())?;
            worst = worst.max(rel(q, gm_steady_state_error(eps, rho)));
            points += 1;
        }
    }
    check(
        points == 27 && worst <= 1e-6,
        format!("{points} points, max relative error {worst:.2e}"),
    )
}

fn three_regimes() -> Outcome {
    let model = SpectrumModel::gauss_markov(1e-4).map_err(|e| e.to_string())?;
    let fit = |lo: f64, hi: f64| -> Result<f64, String> {
        let x = db_grid(lo, hi, 1.0);
        let y = x
            .iter()
            .map(|&db| steady_state(&model, from_db(db)).map(|p| to_db(p.rho_eff)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        Ok(slope(&x, &y))
    };
    let (q, l, s) = (fit(-80.0, -50.0)?, fit(-30.0, 30.0)?, fit(50.0, 80.0)?);
    let ok = (q - 2.0).abs() <= 0.1 && (l - 1.0).abs() <= 0.05 && s.abs() <= 0.1;
    check(ok, format!("slopes {q:.4} / {l:.4} / {s:.4}"))
}

fn normalized_rate_peak() -> Outcome {
    let model = SpectrumModel::gauss_markov(1e-4).map_err(|e| e.to_string())?;
    let qpsk = PskConstellation::qpsk();
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for db in db_grid(-40.0, 10.0, 0.5) {
        let rho = from_db(db);
        let r = induced_channel_rate(&model, rho, &qpsk).map_err(|e| e.to_string())? / rho;
        if r > best.1 {
            best = (db, r);
        }
    }
    let ok = (0.87..=0.95).contains(&best.1) && (-18.0..=-12.0).contains(&best.0);
    check(ok, format!("max R/rho = {:.4} at {} dB", best.1, best.0))
}

fn continuous_models() -> Vec<SpectrumModel> {
    let table = TabulatedSpectrum::new(
        vec![0.0, 1.0, 2.0, 4.0],
        vec![3.0, 2.0, 0.5, 0.1],
        TimeBase::Continuous,
    )
    .expect("valid table");
    let mut models: Vec<SpectrumModel> = [0.1, 0.5, 0.9, 0.99]
        .iter()
        .map(|&e| SpectrumModel::gauss_markov_continuous(e).expect("valid"))
        .collect();
    models.extend([1.0, 100.0].iter().map(|&w| SpectrumModel::clarke(w).expect("valid")));
    models.push(SpectrumModel::tabulated(table));
    models
}

fn wideband_coincidence() -> Outcome {
    let mut cases = 0;
    for model in continuous_models() {
        for p in [1e-3, 1e-1, 1.0, 10.0, 1e3] {
            let w = wideband_rate(&model, p).map_err(|e| e.to_string())?;
            let c = capacity_per_unit_energy_ct(&model, p).map_err(|e| e.to_string())? * p;
            if w.to_bits() != c.to_bits() {
                return Err(format!("{} at P = {p}: {w} vs {c}", model.describe()));
            }
            cases += 1;
        }
    }
    check(true, format!("{cases} (model, P) pairs bitwise equal"))
}

fn discrete_models() -> Vec<SpectrumModel> {
    let table = TabulatedSpectrum::new(
        vec![0.0, 0.5, 1.5, PI],
        vec![4.0, 2.0, 0.5, 0.0],
        TimeBase::Discrete,
    )
    .expect("valid table");
    vec![
        SpectrumModel::memoryless(),
        SpectrumModel::gauss_markov(0.3).expect("valid"),
        SpectrumModel::gauss_markov(1e-3).expect("valid"),
        SpectrumModel::notched(4).expect("valid"),
        SpectrumModel::peaked(16).expect("valid"),
        SpectrumModel::tabulated(table),
    ]
}

fn discrete_gap() -> Outcome {
    let mut worst_ulps: f64 = 0.0;
    for model in discrete_models() {
        for rho in [1e-4, 1e-2, 0.1, 1.0] {
            let u = capacity_upper_bound_dt(&model, rho).map_err(|e| e.to_string())?;
            let r = low_snr_rate(&model, rho).map_err(|e| e.to_string())?;
            let ulp = u.abs() * f64::EPSILON;
            worst_ulps = worst_ulps.max(((u - r) - rho * rho / 2.0).abs() / ulp);
        }
    }
    check(worst_ulps <= 4.0, format!("max deviation {worst_ulps:.2} ulp of U"))
}

fn gm_continuous() -> Outcome {
    let model = SpectrumModel::gauss_markov_continuous(0.9).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for p in [1e-3, 1e-1, 1.0, 10.0, 1e3] {
        let q = wideband_rate(&model, p).map_err(|e| e.to_string())?;
        worst = worst.max(rel(q, wideband_rate_gm(0.9, p)));
    }
    let spot = wideband_rate_gm(0.9, 1.0);
    check(
        worst <= 1e-6 && (spot - 0.24655).abs() < 5e-6,
        format!("max relative error {worst:.2e}, rate(P = 1) = {spot:.6}"),
    )
}

fn clarke() -> Outcome {
    let wm = 100.0;
    let edge = wm / 2.0;
    let below = wideband_rate_clarke(wm, edge * (1.0 - 1e-15));
    let above = wideband_rate_clarke(wm, edge * (1.0 + 1e-15));
    let jump = rel(above, below);
    let spot = wideband_rate_clarke(wm, 1e-3);
    let model = SpectrumModel::clarke(wm).map_err(|e| e.to_string())?;
    let quad = wideband_rate(&model, 1e-3).map_err(|e| e.to_string())?;
    let ratio = wideband_rate_clarke(wm, 1e6) / 1e6;
    let divergent = matches!(ct_small_p_coefficient(&model), Err(Error::Divergent(_)));
    let ok = jump <= 1e-9
        && rel(spot, 7.648e-8) < 5e-4
        && rel(quad, spot) < 1e-6
        && (ratio - 1.0).abs() <= 0.02
        && divergent;
    check(
        ok,
        format!(
            "branch jump {jump:.1e}, rate(1e-3) = {spot:.4e}, rate/P at 1e6 = {ratio:.5}, small-P coefficient divergent: {divergent}"
        ),
    )
}

fn monte_carlo() -> Outcome {
    let model = SpectrumModel::gauss_markov(1e-2).map_err(|e| e.to_string())?;
    let res = run_recursive_training(&SimConfig::new(model, 1.0, 200, 100_000, 2024))
        .map_err(|e| e.to_string())?;
    let last = (res.empirical_sigma2[199] - 0.1).abs() / res.stderr[199];
    let worst = (0..200)
        .map(|l| (res.empirical_sigma2[l] - res.analytic_sigma2[l]).abs() / res.stderr[l])
        .fold(0.0, f64::max);
    check(
        last < 4.0 && worst < 4.0,
        format!(
            "sigma2[199] = {:.5} ({last:.2} se from 0.1), max deviation from Toeplitz curve {worst:.2} se",
            res.empirical_sigma2[199]
        ),
    )
}

fn example_families() -> Outcome {
    let mut notched_err: f64 = 0.0;
    let mut peaked_err: f64 = 0.0;
    let mut pred_err: f64 = 0.0;
    let mut pred = Vec::new();
    for n in 2u32..=1024 {
        let nf = n as f64;
        let notched = SpectrumModel::notched(n).map_err(|e| e.to_string())?;
        notched_err = notched_err.max(rel(
            square_integral(&notched).map_err(|e| e.to_string())?,
            nf / (nf - 1.0),
        ));
        if noiseless_pred_error(&notched).map_err(|e| e.to_string())? != 0.0 {
            return Err(format!("notched n = {n} is not perfectly predictable"));
        }
        // height n on a fraction n^(-3/2) of the band, level c elsewhere
        let root = nf.sqrt();
        let c = (root - 1.0) / (root - 1.0 / nf);
        let frac = 1.0 / (nf * root);
        let peaked = SpectrumModel::peaked(n).map_err(|e| e.to_string())?;
        peaked_err = peaked_err.max(rel(
            square_integral(&peaked).map_err(|e| e.to_string())?,
            root + c * c * (1.0 - frac),
        ));
        let p = noiseless_pred_error(&peaked).map_err(|e| e.to_string())?;
        pred_err = pred_err.max(rel(p, (frac * nf.ln() + (1.0 - frac) * c.ln()).exp()));
        pred.push((n, p));
    }
    let decreasing: Vec<u32> = pred.windows(2).filter(|w| w[1].1 <= w[0].1).map(|w| w[1].0).collect();
    let last = pred.last().map_or(0.0, |x| x.1);
    let values_ok = notched_err <= 1e-6 && peaked_err <= 1e-6 && pred_err <= 1e-6 && last > 0.96;
    let detail = format!(
        "n = 2..1024: notched {notched_err:.1e}, peaked {peaked_err:.1e}, prediction {pred_err:.1e}; \
         sigma2_pred(1024) = {last:.5}; sigma2_pred(2, 3, 4) = {:.5}, {:.5}, {:.5}; not increasing at n = {decreasing:?}",
        pred[0].1, pred[1].1, pred[2].1
    );
    check(values_ok && decreasing.is_empty(), detail)
}

fn memoryless_end_to_end() -> Outcome {
    let model = SpectrumModel::memoryless();
    let mut worst: f64 = 0.0;
    for rho in [0.01, 0.1, 1.0] {
        worst = worst.max(induced_channel_rate(&model, rho, &PskConstellation::qpsk()).map_err(|e| e.to_string())?);
    }
    check(worst <= 1e-6, format!("max rate {worst:.1e} nats"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("Gauss-Markov square integral", Some(1), gm_square_integral),
        ("steady-state oracle equivalence", Some(10), steady_state_oracle),
        ("three operating regimes", Some(5), three_regimes),
        ("normalized rate peak", Some(300), normalized_rate_peak),
        ("wideband rate equals capacity per unit energy times P", None, wideband_coincidence),
        ("discrete gap identity", None, discrete_gap),
        ("continuous Gauss-Markov closed form", Some(5), gm_continuous),
        ("Clarke wideband rate", Some(10), clarke),
        ("Monte Carlo convergence", Some(120), monte_carlo),
        ("example families", None, example_families),
        ("memoryless end to end", None, memoryless_end_to_end),
    ];
    // Criteria that cannot hold as stated, with the reason. The run fails if
    // one of these starts passing, so the list cannot go stale.
    let known: [(usize, &str); 1] = [(
        10,
        "the peaked family's closed-form sigma2_pred falls from n = 2 to n = 4 before rising to 1",
    )];
    let mut failures = 0;
    let mut unexpected = Vec::new();
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let timely = limit.is_none_or(|s| elapsed <= Duration::from_secs(s));
        let (status, detail) = match (&outcome, timely) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("{d}; exceeded {}s", limit.unwrap_or(0))),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        let known_reason = known.iter().find(|k| k.0 == i + 1).map(|k| k.1);
        if status == "FAIL" {
            failures += 1;
        }
        if (status == "FAIL") != known_reason.is_some() {
            unexpected.push(i + 1);
        }
        let note = known_reason.map_or(String::new(), |r| format!(" [known: {r}]"));
        println!("[{status}] {:>2} {name} ({:.2}s): {detail}{note}", i + 1, elapsed.as_secs_f64());
    }
    println!("{} of {} criteria pass", criteria.len() - failures, criteria.len());
    assert!(unexpected.is_empty(), "criteria {unexpected:?} differ from the expected outcome");
}
