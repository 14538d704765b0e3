//! One-dimensional distances between empirical distributions.

use crate::error::{Error, Result};

fn checked_sorted(name: &str, values: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::EmptyInput(format!("{name} sample is empty")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!(
            "{name} sample contains non-finite values"
        )));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Kolmogorov–Smirnov distance: the supremum of the absolute difference of
/// the two empirical CDFs. Lies in `[0, 1]`, is symmetric, and is zero
/// exactly when the two samples are identical as multisets.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = checked_sorted("first", a)?;
    let b = checked_sorted("second", b)?;
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut sup = 0.0f64;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        sup = sup.max((i as f64 / n - j as f64 / m).abs());
    }
    Ok(sup)
}

/// 1-Wasserstein (earth mover) distance between the empirical distributions
/// of two samples, computed as the integral of the absolute CDF difference.
/// Symmetric, nonnegative, satisfies the triangle inequality.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = checked_sorted("first", a)?;
    let b = checked_sorted("second", b)?;
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut total = 0.0f64;
    let mut prev: Option<f64> = None;
    while i < a.len() || j < b.len() {
        let v = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        if let Some(p) = prev {
            let diff = (i as f64 / n - j as f64 / m).abs();
            total += diff * (v - p);
        }
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        prev = Some(v);
    }
    Ok(total)
}
