//! Partial dependence and individual conditional expectation profiles.

use super::{check_grid, Profile, ProfileKind};
use crate::error::{Error, Result};
use crate::model::Predictor;
use crate::reference::ReferenceSample;

fn feature_index(pred: &(impl Predictor + ?Sized), feature: &str) -> Result<usize> {
    pred.feature_names()
        .iter()
        .position(|n| n == feature)
        .ok_or_else(|| Error::FeatureMismatch {
            missing: vec![feature.to_string()],
        })
}

/// Partial dependence profile: at each grid point `z`, the weighted mean
/// prediction over the reference rows with `feature` overwritten to `z`
/// (marginal, interventional averaging).
pub fn pdp(
    pred: &(impl Predictor + ?Sized),
    reference: &ReferenceSample,
    feature: &str,
    grid: &[f64],
) -> Result<Profile> {
    check_grid(grid)?;
    let j = feature_index(pred, feature)?;
    let base = reference.matrix_for(pred.feature_names())?;
    let weights = reference.normalized_weights();
    let mut values = Vec::with_capacity(grid.len());
    for &z in grid {
        let mut batch = base.clone();
        batch.fill_column(j, z);
        let scores = pred.predict(&batch)?;
        values.push(scores.iter().zip(&weights).map(|(s, w)| s * w).sum());
    }
    Ok(Profile {
        kind: ProfileKind::Pdp,
        feature: feature.to_string(),
        grid: grid.to_vec(),
        values,
        instance: None,
        empty_bins: Vec::new(),
        reference_label: reference.label().to_string(),
        reference_rows: reference.n_rows(),
    })
}

/// Individual conditional expectation (ceteris-paribus) profiles: one curve
/// per row of `instances`, where `curve(z) = f(row with feature := z)`.
pub fn ice(
    pred: &(impl Predictor + ?Sized),
    instances: &ReferenceSample,
    feature: &str,
    grid: &[f64],
) -> Result<Vec<Profile>> {
    check_grid(grid)?;
    let j = feature_index(pred, feature)?;
    let rows = instances.matrix_for(pred.feature_names())?;
    let mut profiles = Vec::with_capacity(rows.n_rows());
    for i in 0..rows.n_rows() {
        let mut batch = crate::model::Matrix::zeros(grid.len(), rows.n_cols());
        for (g, &z) in grid.iter().enumerate() {
            for c in 0..rows.n_cols() {
                batch.set(g, c, rows.get(i, c));
            }
            batch.set(g, j, z);
        }
        let values = pred.predict(&batch)?;
        profiles.push(Profile {
            kind: ProfileKind::Ice,
            feature: feature.to_string(),
            grid: grid.to_vec(),
            values,
            instance: Some(i),
            empty_bins: Vec::new(),
            reference_label: instances.label().to_string(),
            reference_rows: instances.n_rows(),
        });
    }
    Ok(profiles)
}
