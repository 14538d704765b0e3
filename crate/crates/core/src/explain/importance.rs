//! Permutation variable importance.

use super::ImportanceTable;
use crate::data::{permute_column, Dataset};
use crate::error::{Error, Result};
use crate::model::{evaluate_loss, LossFn, Predictor};
use crate::rng;

/// Importance of each feature as the mean over `repeats` of
/// `loss(permuted) / loss(baseline)` on `eval_ds`.
///
/// Permuting a column breaks its link to the target and the other
/// features; a ratio near 1 means the model's performance does not depend
/// on that feature, while large ratios mark load-bearing features. Each
/// `(feature, repeat)` permutation draws from the stream
/// `split(seed, [column_index, repeat])`, so the result is independent of
/// the order features are requested or evaluated in.
///
/// Errors when the baseline loss is zero: the ratio is undefined there.
pub fn permutation_importance(
    pred: &(impl Predictor + ?Sized),
    eval_ds: &Dataset,
    loss: LossFn,
    features: &[String],
    repeats: usize,
    seed: u64,
) -> Result<ImportanceTable> {
    if features.is_empty() {
        return Err(Error::EmptyInput("no features requested".into()));
    }
    if repeats < 1 {
        return Err(Error::invalid("repeats must be at least 1"));
    }
    if eval_ds.target().is_none() {
        return Err(Error::invalid(
            "permutation importance needs an evaluation dataset with a target",
        ));
    }
    let baseline_loss = evaluate_loss(pred, eval_ds, loss)?;
    if baseline_loss == 0.0 {
        return Err(Error::ZeroBaselineLoss);
    }
    let mut per_repeat = Vec::with_capacity(features.len());
    let mut ratios = Vec::with_capacity(features.len());
    for feature in features {
        let column_index = eval_ds
            .column_names()
            .iter()
            .position(|n| *n == feature.as_str())
            .ok_or_else(|| Error::UnknownColumn(feature.clone()))?
            as u64;
        let mut row = Vec::with_capacity(repeats);
        for repeat in 0..repeats {
            let sub_seed = rng::split(seed, &[column_index, repeat as u64]);
            let permuted = permute_column(eval_ds, feature, sub_seed)?;
            let permuted_loss = evaluate_loss(pred, &permuted, loss)?;
            row.push(permuted_loss / baseline_loss);
        }
        ratios.push(row.iter().sum::<f64>() / repeats as f64);
        per_repeat.push(row);
    }
    Ok(ImportanceTable {
        features: features.to_vec(),
        ratios,
        per_repeat,
        baseline_loss,
        loss,
        repeats,
        seed,
        eval_rows: eval_ds.n_rows(),
    })
}
