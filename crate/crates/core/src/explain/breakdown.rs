//! Break-down attributions: sequential decomposition along one ordering.

use super::shapley::InterventionalGame;
use super::{AttributionMethod, AttributionSet, NamedRow};
use crate::error::{Error, Result};
use crate::model::Predictor;
use crate::reference::ReferenceSample;

/// Sequential attributions along a feature ordering: the contribution of
/// the k-th feature in `order` is `v(first k) - v(first k-1)` under the
/// same interventional value function as Shapley. Completeness holds by
/// telescoping for any order; the result is order-dependent unless the
/// model is additive, and averaging over all orders recovers the Shapley
/// values.
pub fn breakdown(
    pred: &(impl Predictor + ?Sized),
    reference: &ReferenceSample,
    instance: &NamedRow,
    order: &[String],
) -> Result<AttributionSet> {
    let names = pred.feature_names();
    if order.len() != names.len()
        || !names.iter().all(|n| order.contains(n))
        || !order.iter().all(|n| names.contains(n))
    {
        return Err(Error::invalid(format!(
            "order {order:?} is not a permutation of the predictor features {names:?}"
        )));
    }
    let game = InterventionalGame::new(pred, reference, instance, None)?;
    let p = game.n_players();
    let mut in_coalition = vec![false; p];
    let baseline = game.value(&in_coalition)?;
    let mut contributions = vec![0.0f64; p];
    let mut prev = baseline;
    for feature in order {
        let k = names.iter().position(|n| n == feature).unwrap();
        in_coalition[k] = true;
        let v = game.value(&in_coalition)?;
        contributions[k] = v - prev;
        prev = v;
    }
    let prediction = game.prediction()?;
    Ok(game.assemble(
        AttributionMethod::Breakdown,
        contributions,
        None,
        baseline,
        prediction,
    ))
}
