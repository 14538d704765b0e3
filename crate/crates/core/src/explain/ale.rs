//! Accumulated local effects.

use super::{check_grid, interp_clamped, Profile, ProfileKind};
use crate::data::quantile_sorted;
use crate::error::{Error, Result};
use crate::model::Predictor;
use crate::reference::ReferenceSample;

/// Accumulated-local-effects profile of `feature` over `reference`.
///
/// The finite-difference estimator: bin boundaries are quantiles of the
/// feature over the reference (duplicates collapsed). Within bin `k`, the
/// local effect is the weighted mean, over the rows whose feature value
/// falls in the bin, of `f(row with feature := upper) - f(row with feature
/// := lower)`. Effects accumulate from the lowest boundary, and the curve
/// is centered so that its weighted mean, interpolated at each row's own
/// feature value, is zero. Because rows only ever move to the edges of
/// their own bin, the estimate follows the conditional distribution of the
/// remaining features and stays meaningful under correlated features,
/// where PDP's marginal averaging is biased.
///
/// Bins containing no rows contribute zero effect and are flagged in
/// [`Profile::empty_bins`].
pub fn ale(
    pred: &(impl Predictor + ?Sized),
    reference: &ReferenceSample,
    feature: &str,
    n_bins: usize,
) -> Result<Profile> {
    if n_bins < 1 {
        return Err(Error::invalid("n_bins must be at least 1"));
    }
    let mut sorted = reference.column(feature)?;
    sorted.sort_by(f64::total_cmp);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::ConstantFeature(
            feature.to_string(),
            "accumulated local effects need at least 2 distinct values".into(),
        ));
    }
    let mut boundaries = Vec::with_capacity(n_bins + 1);
    for k in 0..=n_bins {
        let b = quantile_sorted(&sorted, k as f64 / n_bins as f64);
        if boundaries.last() != Some(&b) {
            boundaries.push(b);
        }
    }
    ale_on_boundaries(pred, reference, feature, &boundaries)
}

/// ALE over explicit bin boundaries (strictly increasing, at least two).
pub(crate) fn ale_on_boundaries(
    pred: &(impl Predictor + ?Sized),
    reference: &ReferenceSample,
    feature: &str,
    boundaries: &[f64],
) -> Result<Profile> {
    check_grid(boundaries)?;
    if boundaries.len() < 2 {
        return Err(Error::invalid("ALE needs at least two bin boundaries"));
    }
    let j = pred
        .feature_names()
        .iter()
        .position(|n| n == feature)
        .ok_or_else(|| Error::FeatureMismatch {
            missing: vec![feature.to_string()],
        })?;
    let base = reference.matrix_for(pred.feature_names())?;
    let weights = reference.normalized_weights();
    let x = reference.column(feature)?;
    let n_bins = boundaries.len() - 1;

    // bin k (1-based) covers (boundaries[k-1], boundaries[k]]; the lowest
    // boundary itself falls into bin 1
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_bins];
    for (i, &v) in x.iter().enumerate() {
        let k = boundaries[1..].partition_point(|&b| b < v);
        members[k.min(n_bins - 1)].push(i);
    }

    let mut effects = Vec::with_capacity(n_bins);
    let mut empty_bins = Vec::new();
    for (k, rows) in members.iter().enumerate() {
        if rows.is_empty() {
            empty_bins.push(k + 1);
            effects.push(0.0);
            continue;
        }
        let mut hi = crate::model::Matrix::zeros(rows.len(), base.n_cols());
        let mut lo = hi.clone();
        for (out, &src) in rows.iter().enumerate() {
            for c in 0..base.n_cols() {
                hi.set(out, c, base.get(src, c));
                lo.set(out, c, base.get(src, c));
            }
            hi.set(out, j, boundaries[k + 1]);
            lo.set(out, j, boundaries[k]);
        }
        let hi_scores = pred.predict(&hi)?;
        let lo_scores = pred.predict(&lo)?;
        let bin_weight: f64 = rows.iter().map(|&r| weights[r]).sum();
        let effect: f64 = rows
            .iter()
            .enumerate()
            .map(|(out, &src)| weights[src] * (hi_scores[out] - lo_scores[out]))
            .sum::<f64>()
            / bin_weight;
        effects.push(effect);
    }

    let mut values = Vec::with_capacity(boundaries.len());
    let mut acc = 0.0;
    values.push(0.0);
    for effect in &effects {
        acc += effect;
        values.push(acc);
    }

    // fix the additive constant: weighted mean of the interpolated curve at
    // the rows' own feature values becomes zero
    let center: f64 = x
        .iter()
        .zip(&weights)
        .map(|(&v, &w)| w * interp_clamped(boundaries, &values, v))
        .sum();
    for v in &mut values {
        *v -= center;
    }

    Ok(Profile {
        kind: ProfileKind::Ale,
        feature: feature.to_string(),
        grid: boundaries.to_vec(),
        values,
        instance: None,
        empty_bins,
        reference_label: reference.label().to_string(),
        reference_rows: reference.n_rows(),
    })
}
