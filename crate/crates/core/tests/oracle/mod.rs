//! Definitional re-implementations used as test oracles. Shared by the core
//! property tests and the acceptance runner.
#![allow(dead_code)]

use statrs::distribution::{ContinuousCDF, Normal};

/// Mean absolute deviation between confidence and outcome, summed in input order.
pub fn mad_ece(samples: &[(f64, bool)]) -> f64 {
    let mut total = 0.0;
    for &(c, y) in samples {
        total += (c - if y { 1.0 } else { 0.0 }).abs();
    }
    total / samples.len() as f64
}

/// Sample covariance over the product of sample standard deviations.
pub fn pearson_def(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n - 1.0);
    let sx = (x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let sy = (y.iter().map(|b| (b - my).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    cov / (sx * sy)
}

/// Average rank by counting: 1 + (#smaller) + (#equal - 1) / 2.
pub fn count_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let smaller = x.iter().filter(|&&w| w < v).count() as f64;
            let equal = x.iter().filter(|&&w| w == v).count() as f64;
            1.0 + smaller + (equal - 1.0) / 2.0
        })
        .collect()
}

pub fn spearman_def(x: &[f64], y: &[f64]) -> f64 {
    pearson_def(&count_ranks(x), &count_ranks(y))
}

/// Population coefficient of variation via Welford's running variance.
pub fn cv_welford(values: &[f64]) -> f64 {
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for &v in values {
        n += 1.0;
        let delta = v - mean;
        mean += delta / n;
        m2 += delta * (v - mean);
    }
    (m2 / n).sqrt() / mean
}

/// Wilson score interval in the `(2np + z^2 +- z sqrt(z^2 + 4np(1-p))) / 2(n + z^2)` form.
pub fn wilson_closed_form(correct: u64, count: u64, level: f64) -> (f64, f64) {
    let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.5 + level / 2.0);
    let n = count as f64;
    let p = correct as f64 / n;
    let root = z * (z * z + 4.0 * n * p * (1.0 - p)).sqrt();
    let denom = 2.0 * (n + z * z);
    let base = 2.0 * n * p + z * z;
    (((base - root) / denom).max(0.0), ((base + root) / denom).min(1.0))
}
