//! Brute-force oracles and fixtures shared by the integration suites. Each
//! oracle recomputes its quantity by direct enumeration over subjects and
//! never calls the library routine it is checking.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use survcobra::experiment::ExperimentConfig;
use survcobra::{PredictionTable, SurvivalDataset, SurvivalRecord, TimeGrid};

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn config(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&repo_root().join("configs").join(name)).unwrap()
}

pub fn real_dataset(name: &str) -> SurvivalDataset {
    config(name).load_dataset().unwrap().0
}

pub const WHAS500: &str = "1_whas500.json";
pub const GBSG2: &str = "2_gbsg2.json";
pub const VETERAN: &str = "3_veteran.json";

/// Every event/censor pattern of length `n`.
pub fn all_patterns(n: usize) -> Vec<Vec<bool>> {
    (0..1u32 << n)
        .map(|mask| (0..n).map(|i| mask & (1 << i) != 0).collect())
        .collect()
}

/// Distinct event times, ascending.
fn event_times(times: &[f64], events: &[bool]) -> Vec<f64> {
    let mut out: Vec<f64> = times
        .iter()
        .zip(events)
        .filter(|(_, &e)| e)
        .map(|(&t, _)| t)
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

fn deaths_and_risk(times: &[f64], events: &[bool], s: f64) -> (f64, f64) {
    let mut d = 0.0;
    let mut n = 0.0;
    for (&t, &e) in times.iter().zip(events) {
        if t == s && e {
            d += 1.0;
        }
        if t >= s {
            n += 1.0;
        }
    }
    (d, n)
}

/// `sum_{s < t} d(s) / n(s)` by direct counting.
pub fn brute_nelson_aalen(times: &[f64], events: &[bool], t: f64) -> f64 {
    event_times(times, events)
        .into_iter()
        .filter(|&s| s < t)
        .map(|s| {
            let (d, n) = deaths_and_risk(times, events, s);
            d / n
        })
        .sum()
}

/// `prod_{s <= t} (1 - d(s) / n(s))` by direct counting.
pub fn brute_kaplan_meier(times: &[f64], events: &[bool], t: f64) -> f64 {
    event_times(times, events)
        .into_iter()
        .filter(|&s| s <= t)
        .map(|s| {
            let (d, n) = deaths_and_risk(times, events, s);
            1.0 - d / n
        })
        .product()
}

/// Log-rank chi-square by enumerating every pooled distinct event time and
/// counting each group's risk set and deaths subject by subject.
pub fn brute_logrank(left: &[(f64, bool)], right: &[(f64, bool)]) -> f64 {
    let pooled: Vec<(f64, bool)> = left.iter().chain(right).copied().collect();
    let mut times: Vec<f64> = pooled.iter().filter(|o| o.1).map(|o| o.0).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut num = 0.0;
    let mut var = 0.0;
    for s in times {
        let n: f64 = pooled.iter().filter(|o| o.0 >= s).count() as f64;
        let d: f64 = pooled.iter().filter(|o| o.0 == s && o.1).count() as f64;
        let n1: f64 = left.iter().filter(|o| o.0 >= s).count() as f64;
        let d1: f64 = left.iter().filter(|o| o.0 == s && o.1).count() as f64;
        num += d1 - d * n1 / n;
        if n > 1.0 {
            var += d * (n1 / n) * (1.0 - n1 / n) * (n - d) / (n - 1.0);
        }
    }
    if var <= 0.0 {
        0.0
    } else {
        num * num / var
    }
}

/// Mean squared error between the survival indicator and the prediction.
pub fn mse_oracle(predictions: &[f64], times: &[f64], t: f64) -> f64 {
    predictions
        .iter()
        .zip(times)
        .map(|(s, &y)| {
            let target = if y > t { 1.0 } else { 0.0 };
            (target - s) * (target - s)
        })
        .sum::<f64>()
        / predictions.len() as f64
}

/// Unanimity COBRA weights: `1{∩_m |r_m(x) - r_m(X_i)| <= eps}` normalised
/// over points, with 0/0 = 0. `dist[i][m]` is machine `m`'s distance for
/// point `i`.
pub fn unanimity_weights(dist: &[Vec<f64>], eps: f64) -> Vec<f64> {
    let ind: Vec<f64> = dist
        .iter()
        .map(|row| {
            let mut all = true;
            for &d in row {
                all = all && d <= eps;
            }
            if all {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = ind.iter().sum();
    if total == 0.0 {
        vec![0.0; ind.len()]
    } else {
        ind.iter().map(|v| v / total).collect()
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random non-increasing curve in [0,1].
pub fn random_curve(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut v = 1.0;
    (0..len)
        .map(|_| {
            v *= rng.random_range(0.6..=1.0);
            v
        })
        .collect()
}

pub fn random_table(
    rng: &mut ChaCha8Rng,
    machines: usize,
    points: usize,
    t: usize,
) -> PredictionTable {
    let grid = Arc::new(TimeGrid::linspace(1.0, t as f64, t).unwrap());
    let mut values = Vec::with_capacity(machines * points * t);
    for _ in 0..machines * points {
        values.extend(random_curve(rng, t));
    }
    let outcomes = (0..points)
        .map(|_| {
            (
                rng.random_range(0.5..(t as f64 + 1.0)),
                rng.random_bool(0.7),
            )
        })
        .collect();
    PredictionTable::new(grid, machines, points, values, outcomes).unwrap()
}

/// Synthetic cohort with an exponential hazard driven by two covariates and
/// independent uniform censoring.
pub fn synthetic_dataset(n: usize, seed: u64) -> SurvivalDataset {
    let mut r = rng(seed);
    let records = (0..n)
        .map(|_| {
            let x0: f64 = r.random_range(0.0..1.0);
            let x1: f64 = r.random_range(0.0..1.0);
            let x2: f64 = r.random_range(0.0..1.0);
            let rate = 0.05 * (2.0 * x0 + 1.5 * (x1 > 0.5) as u8 as f64).exp();
            let u: f64 = r.random_range(1e-9..1.0);
            let event_time = -u.ln() / rate;
            let censor_time = r.random_range(0.0..40.0);
            let time = event_time.min(censor_time).max(0.01);
            SurvivalRecord {
                covariates: vec![x0, x1, x2],
                time: (time * 100.0).round() / 100.0,
                event: event_time <= censor_time,
            }
        })
        .collect();
    SurvivalDataset::new(records, vec!["x0".into(), "x1".into(), "x2".into()]).unwrap()
}
