//! Percentile bootstrap for the mean.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_RESAMPLES: usize = 10_000;
pub const CONFIDENCE: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapSummary {
    pub n: usize,
    pub sample_mean: f64,
    pub resamples: usize,
    pub confidence: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Share of resample means strictly above zero.
    pub positive_fraction: f64,
    pub seed: u64,
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Means of `resamples` samples drawn with replacement, each the size of
/// `values`. Deterministic in `seed`.
pub fn bootstrap_means(values: &[f64], resamples: usize, seed: u64) -> Result<Vec<f64>> {
    if values.is_empty() || resamples == 0 {
        return Err(Error::EmptyInput);
    }
    let n = values.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let means = (0..resamples)
        .map(|_| {
            let mut sum = 0.0;
            for _ in 0..n {
                sum += values[rng.random_range(0..n)];
            }
            sum / n as f64
        })
        .collect();
    Ok(means)
}

/// Linear-interpolation percentile (`q` in [0, 1]) of sorted data.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    if frac == 0.0 || sorted[lo] == sorted[hi] {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Sample mean with a 95% percentile bootstrap interval.
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, seed: u64) -> Result<BootstrapSummary> {
    let means = bootstrap_means(values, resamples, seed)?;
    Ok(summarize(values, means, seed))
}

/// Builds the summary from an already drawn set of resample means.
pub fn summarize(values: &[f64], mut means: Vec<f64>, seed: u64) -> BootstrapSummary {
    let resamples = means.len();
    let positive = means.iter().filter(|&&m| m > 0.0).count();
    means.sort_by(f64::total_cmp);
    let alpha = (1.0 - CONFIDENCE) / 2.0;
    BootstrapSummary {
        n: values.len(),
        sample_mean: mean(values),
        resamples,
        confidence: CONFIDENCE,
        ci_low: percentile_sorted(&means, alpha),
        ci_high: percentile_sorted(&means, 1.0 - alpha),
        positive_fraction: positive as f64 / resamples as f64,
        seed,
    }
}
