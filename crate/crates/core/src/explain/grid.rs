//! Feature grids for profile curves.

use crate::data::quantile_sorted;
use crate::error::{Error, Result};
use crate::reference::ReferenceSample;

/// How grid points are placed over the reference values of a feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridStrategy {
    /// Points at quantile levels `k / (n_points - 1)`. Ties are
    /// deduplicated, so the grid may hold fewer than `n_points` points.
    Quantile,
    /// `n_points` evenly spaced points over `[min, max]`, inclusive.
    Equidistant,
}

/// Build a strictly increasing grid over `feature`'s values in `reference`.
pub fn make_grid(
    reference: &ReferenceSample,
    feature: &str,
    strategy: GridStrategy,
    n_points: usize,
) -> Result<Vec<f64>> {
    if n_points < 2 {
        return Err(Error::invalid("a grid needs at least 2 points"));
    }
    let mut values = reference.column(feature)?;
    values.sort_by(f64::total_cmp);
    let (lo, hi) = (values[0], values[values.len() - 1]);
    match strategy {
        GridStrategy::Equidistant => {
            if lo == hi {
                return Err(Error::ConstantFeature(
                    feature.to_string(),
                    "an equidistant grid over a single value would collapse to one point".into(),
                ));
            }
            let step = (hi - lo) / (n_points - 1) as f64;
            let mut grid: Vec<f64> = (0..n_points).map(|k| lo + k as f64 * step).collect();
            grid[n_points - 1] = hi; // exact endpoint
            Ok(grid)
        }
        GridStrategy::Quantile => {
            let mut grid = Vec::with_capacity(n_points);
            for k in 0..n_points {
                let q = k as f64 / (n_points - 1) as f64;
                let point = quantile_sorted(&values, q);
                if grid.last() != Some(&point) {
                    grid.push(point);
                }
            }
            Ok(grid)
        }
    }
}
