//! Column summary statistics.

use super::Dataset;
use crate::error::{Error, Result};

/// Summary of one numeric column: moments, extremes and the percentile
/// ladder 0.01, 0.02, ..., 0.99.
#[derive(Debug, Clone)]
pub struct ColumnStats {
    pub mean: f64,
    /// Population standard deviation (divisor `n`).
    pub std: f64,
    pub min: f64,
    pub max: f64,
    /// `quantiles[k]` is the `(k + 1) / 100` quantile, `k = 0..99`.
    pub quantiles: Vec<f64>,
    pub count: usize,
}

/// Quantile of pre-sorted values by linear interpolation between order
/// statistics (the "type 7" rule): for level `q`, let `h = (n - 1) q`;
/// the result interpolates between `sorted[floor(h)]` and the next value.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    debug_assert!((0.0..=1.0).contains(&q));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    if lo >= n - 1 {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Statistics for one column of `ds`.
pub fn column_stats(ds: &Dataset, col: &str) -> Result<ColumnStats> {
    let values = ds.column(col)?;
    if values.is_empty() {
        return Err(Error::EmptyInput(format!("column {col:?} has no rows")));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let quantiles = (1..=99)
        .map(|k| quantile_sorted(&sorted, k as f64 / 100.0))
        .collect();
    Ok(ColumnStats {
        mean,
        std: var.sqrt(),
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        quantiles,
        count: values.len(),
    })
}
