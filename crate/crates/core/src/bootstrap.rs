//! Bootstrap summaries over repeated runs.
//!
//! Two protocols are supported: the median of resampled medians with a
//! 5th–95th percentile interval (used for KL divergences), and the mean of
//! resampled means with a ±2σ interval (used for qBAS scores). Non-finite
//! inputs, such as undefined KL divergences, are dropped and counted.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapKind {
    /// Median of medians, 90% interval from the 5th/95th percentiles.
    Median90,
    /// Mean of means, 95% interval from ±2 standard deviations.
    Mean2Sigma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSummary {
    pub center: f64,
    pub lower: f64,
    pub upper: f64,
    pub kind: BootstrapKind,
    pub num_resamples: usize,
    pub excluded_count: usize,
}

/// Percentile `q ∈ [0, 100]` of sorted data, interpolating linearly between
/// the closest ranks.
pub fn percentile(sorted: &[f64], q: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::arg("percentile of an empty sample"));
    }
    if !(0.0..=100.0).contains(&q) {
        return Err(Error::arg(format!("percentile {q} outside [0, 100]")));
    }
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

fn median_of(sorted: &[f64]) -> f64 {
    percentile(sorted, 50.0).expect("nonempty")
}

fn finite_values(values: &[f64]) -> Result<(Vec<f64>, usize)> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let excluded = values.len() - finite.len();
    if finite.len() < 2 {
        return Err(Error::arg(format!(
            "bootstrap needs at least two finite values, got {} ({} excluded)",
            finite.len(),
            excluded
        )));
    }
    Ok((finite, excluded))
}

/// Applies `stat` to `num_resamples` resamples drawn with replacement.
fn resample<F>(values: &[f64], num_resamples: usize, rng_seed: u64, mut stat: F) -> Vec<f64>
where
    F: FnMut(&mut [f64]) -> f64,
{
    let mut rng = rng::seeded(rng_seed);
    let mut buf = vec![0.0; values.len()];
    (0..num_resamples)
        .map(|_| {
            for slot in buf.iter_mut() {
                *slot = values[rng.random_range(0..values.len())];
            }
            stat(&mut buf)
        })
        .collect()
}

pub fn bootstrap_median_ci(values: &[f64], num_resamples: usize, rng_seed: u64) -> Result<BootstrapSummary> {
    if num_resamples == 0 {
        return Err(Error::arg("need at least one resample"));
    }
    let (finite, excluded) = finite_values(values)?;
    let mut medians = resample(&finite, num_resamples, rng_seed, |buf| {
        buf.sort_by(f64::total_cmp);
        median_of(buf)
    });
    medians.sort_by(f64::total_cmp);
    Ok(BootstrapSummary {
        center: median_of(&medians),
        lower: percentile(&medians, 5.0)?,
        upper: percentile(&medians, 95.0)?,
        kind: BootstrapKind::Median90,
        num_resamples,
        excluded_count: excluded,
    })
}

pub fn bootstrap_mean_ci(values: &[f64], num_resamples: usize, rng_seed: u64) -> Result<BootstrapSummary> {
    if num_resamples == 0 {
        return Err(Error::arg("need at least one resample"));
    }
    let (finite, excluded) = finite_values(values)?;
    let len = finite.len() as f64;
    let means = resample(&finite, num_resamples, rng_seed, |buf| buf.iter().sum::<f64>() / len);
    let center = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|m| (m - center).powi(2)).sum::<f64>() / means.len() as f64;
    let half = 2.0 * var.sqrt();
    Ok(BootstrapSummary {
        center,
        lower: center - half,
        upper: center + half,
        kind: BootstrapKind::Mean2Sigma,
        num_resamples,
        excluded_count: excluded,
    })
}
