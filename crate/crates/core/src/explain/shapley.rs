//! Shapley value attribution under the interventional value function.

use super::{AttributionMethod, AttributionSet, NamedRow};
use crate::error::{Error, Result};
use crate::model::{Matrix, Predictor};
use crate::reference::ReferenceSample;
use crate::rng;
use rand::seq::SliceRandom;

/// Hard guard for exact enumeration: 2^p coalition evaluations.
pub const MAX_EXACT_FEATURES: usize = 20;

/// Cooperative game whose players are (a subset of) the predictor's
/// features. The value of a coalition `S` is the weighted mean prediction
/// over the reference rows with the features in `S` overwritten by the
/// instance; features outside the player set are always pinned to the
/// instance. Each evaluation is one batched predictor call over the
/// reference rows.
pub(crate) struct InterventionalGame<'a, P: Predictor + ?Sized> {
    pred: &'a P,
    /// Reference rows with non-player columns already pinned to the
    /// instance.
    base: Matrix,
    weights: Vec<f64>,
    instance: Vec<f64>,
    /// Column indices of the players, in predictor feature order.
    players: Vec<usize>,
    reference_label: String,
    reference_rows: usize,
}

impl<'a, P: Predictor + ?Sized> InterventionalGame<'a, P> {
    pub(crate) fn new(
        pred: &'a P,
        reference: &ReferenceSample,
        instance: &NamedRow,
        players: Option<&[String]>,
    ) -> Result<Self> {
        let names = pred.feature_names();
        if instance.names != *names {
            // accept any order: realign by name
            let mut realigned = Vec::with_capacity(names.len());
            for name in names {
                let k = instance
                    .names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| Error::FeatureMismatch {
                        missing: vec![name.clone()],
                    })?;
                realigned.push(instance.values[k]);
            }
            return Self::from_values(pred, reference, realigned, players);
        }
        Self::from_values(pred, reference, instance.values.clone(), players)
    }

    fn from_values(
        pred: &'a P,
        reference: &ReferenceSample,
        instance: Vec<f64>,
        players: Option<&[String]>,
    ) -> Result<Self> {
        let names = pred.feature_names();
        if instance.len() != names.len() {
            return Err(Error::invalid(format!(
                "instance has {} values, predictor declares {} features",
                instance.len(),
                names.len()
            )));
        }
        if instance.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("instance values must be finite"));
        }
        let player_indices: Vec<usize> = match players {
            None => (0..names.len()).collect(),
            Some(subset) => {
                if subset.is_empty() {
                    return Err(Error::EmptyInput("empty feature subset".into()));
                }
                let mut indices = Vec::with_capacity(subset.len());
                for name in subset {
                    let j = names.iter().position(|n| n == name).ok_or_else(|| {
                        Error::FeatureMismatch {
                            missing: vec![name.clone()],
                        }
                    })?;
                    if indices.contains(&j) {
                        return Err(Error::DuplicateColumn(name.clone()));
                    }
                    indices.push(j);
                }
                indices.sort_unstable();
                indices
            }
        };
        let mut base = reference.matrix_for(names)?;
        for (j, value) in instance.iter().enumerate() {
            if !player_indices.contains(&j) {
                base.fill_column(j, *value);
            }
        }
        Ok(InterventionalGame {
            pred,
            base,
            weights: reference.normalized_weights(),
            instance,
            players: player_indices,
            reference_label: reference.label().to_string(),
            reference_rows: reference.n_rows(),
        })
    }

    pub(crate) fn n_players(&self) -> usize {
        self.players.len()
    }

    pub(crate) fn player_names(&self) -> Vec<String> {
        self.players
            .iter()
            .map(|&j| self.pred.feature_names()[j].clone())
            .collect()
    }

    /// v(S) for the coalition given as a boolean mask over players.
    pub(crate) fn value(&self, in_coalition: &[bool]) -> Result<f64> {
        debug_assert_eq!(in_coalition.len(), self.players.len());
        let mut batch = self.base.clone();
        for (k, &j) in self.players.iter().enumerate() {
            if in_coalition[k] {
                batch.fill_column(j, self.instance[j]);
            }
        }
        let scores = self.pred.predict(&batch)?;
        Ok(scores.iter().zip(&self.weights).map(|(s, w)| s * w).sum())
    }

    /// Model prediction at the instance itself.
    pub(crate) fn prediction(&self) -> Result<f64> {
        let x = Matrix::from_rows(std::slice::from_ref(&self.instance))?;
        Ok(self.pred.predict(&x)?[0])
    }

    pub(crate) fn instance_row(&self) -> NamedRow {
        NamedRow {
            names: self.pred.feature_names().to_vec(),
            values: self.instance.clone(),
        }
    }

    pub(crate) fn assemble(
        &self,
        method: AttributionMethod,
        contributions: Vec<f64>,
        standard_errors: Option<Vec<f64>>,
        baseline: f64,
        prediction: f64,
    ) -> AttributionSet {
        AttributionSet {
            method,
            features: self.player_names(),
            contributions,
            standard_errors,
            instance: self.instance_row(),
            baseline,
            prediction,
            value_function: "interventional".to_string(),
            reference_label: self.reference_label.clone(),
            reference_rows: self.reference_rows,
        }
    }
}

/// Exact Shapley attributions by full coalition enumeration.
///
/// `attr_i = Σ_S |S|! (p - |S| - 1)! / p! · (v(S ∪ {i}) - v(S))` over all
/// coalitions `S` not containing `i`. Cost is `2^p` batched predictor
/// calls of `n_ref` rows each, so `p` is guarded at
/// [`MAX_EXACT_FEATURES`]; use [`shapley_sampled`] beyond it.
///
/// `features`, when given, restricts the game to that subset: features
/// outside it stay pinned at their instance values, and the reported
/// baseline is the subset game's empty-coalition value.
pub fn shapley_exact(
    pred: &(impl Predictor + ?Sized),
    reference: &ReferenceSample,
    instance: &NamedRow,
    features: Option<&[String]>,
) -> Result<AttributionSet> {
    let game = InterventionalGame::new(pred, reference, instance, features)?;
    let p = game.n_players();
    if p > MAX_EXACT_FEATURES {
        return Err(Error::TooManyFeatures {
            n_features: p,
            max: MAX_EXACT_FEATURES,
        });
    }

    let mut values = vec![0.0f64; 1 << p];
    let mut in_coalition = vec![false; p];
    for (mask, slot) in values.iter_mut().enumerate() {
        for (k, flag) in in_coalition.iter_mut().enumerate() {
            *flag = mask >> k & 1 == 1;
        }
        *slot = game.value(&in_coalition)?;
    }

    // w(s) = s! (p-1-s)! / p! = 1 / (p * C(p-1, s))
    let mut choose = vec![1.0f64; p];
    for s in 1..p {
        choose[s] = choose[s - 1] * (p - s) as f64 / s as f64;
    }
    let weight: Vec<f64> = choose.iter().map(|c| 1.0 / (p as f64 * c)).collect();

    let mut contributions = vec![0.0f64; p];
    for (k, slot) in contributions.iter_mut().enumerate() {
        let bit = 1usize << k;
        let mut acc = 0.0;
        for mask in 0..values.len() {
            if mask & bit == 0 {
                let s = mask.count_ones() as usize;
                acc += weight[s] * (values[mask | bit] - values[mask]);
            }
        }
        *slot = acc;
    }

    let baseline = values[0];
    let prediction = game.prediction()?;
    Ok(game.assemble(
        AttributionMethod::ShapleyExact,
        contributions,
        None,
        baseline,
        prediction,
    ))
}

/// Per-permutation marginal contribution vectors for the sampling
/// estimator. Permutation `m` draws from the stream `split(seed, [m])`, so
/// a longer run extends a shorter one with the same seed instead of
/// resampling it.
pub(crate) fn sampled_marginals<P: Predictor + ?Sized>(
    game: &InterventionalGame<'_, P>,
    n_permutations: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let p = game.n_players();
    // memoize coalition values when the mask fits comfortably in memory
    let mut memo: Option<Vec<Option<f64>>> = if p <= MAX_EXACT_FEATURES {
        Some(vec![None; 1 << p])
    } else {
        None
    };
    let mut value = |in_coalition: &[bool]| -> Result<f64> {
        if let Some(memo) = memo.as_mut() {
            let mask = in_coalition
                .iter()
                .enumerate()
                .fold(0usize, |m, (k, &b)| if b { m | 1 << k } else { m });
            if let Some(v) = memo[mask] {
                return Ok(v);
            }
            let v = game.value(in_coalition)?;
            memo[mask] = Some(v);
            return Ok(v);
        }
        game.value(in_coalition)
    };

    let empty = vec![false; p];
    let baseline = value(&empty)?;
    let mut order: Vec<usize> = (0..p).collect();
    let mut marginals = Vec::with_capacity(n_permutations);
    for m in 0..n_permutations {
        let mut stream = rng::stream(seed, &[m as u64]);
        order.shuffle(&mut stream);
        let mut in_coalition = vec![false; p];
        let mut prev = baseline;
        let mut row = vec![0.0f64; p];
        for &k in &order {
            in_coalition[k] = true;
            let v = value(&in_coalition)?;
            row[k] = v - prev;
            prev = v;
        }
        marginals.push(row);
    }
    Ok(marginals)
}

/// Monte-Carlo Shapley attributions by permutation sampling.
///
/// Samples `n_permutations` uniformly random feature orderings and
/// averages the marginal contributions along each, under the same
/// interventional value function as [`shapley_exact`]. Reports the
/// per-feature Monte-Carlo standard error. Completeness holds exactly for
/// every sampled path (the marginals telescope to `f(x) - baseline`), so
/// it holds for the mean as well. Deterministic from `seed`.
pub fn shapley_sampled(
    pred: &(impl Predictor + ?Sized),
    reference: &ReferenceSample,
    instance: &NamedRow,
    n_permutations: usize,
    seed: u64,
) -> Result<AttributionSet> {
    if n_permutations < 2 {
        return Err(Error::invalid(
            "n_permutations must be at least 2 to report a standard error",
        ));
    }
    let game = InterventionalGame::new(pred, reference, instance, None)?;
    let p = game.n_players();
    let marginals = sampled_marginals(&game, n_permutations, seed)?;

    let n = n_permutations as f64;
    let mut contributions = vec![0.0f64; p];
    for row in &marginals {
        for (c, v) in contributions.iter_mut().zip(row) {
            *c += v;
        }
    }
    for c in &mut contributions {
        *c /= n;
    }
    let mut standard_errors = vec![0.0f64; p];
    for (k, se) in standard_errors.iter_mut().enumerate() {
        let mean = contributions[k];
        let var: f64 = marginals
            .iter()
            .map(|row| (row[k] - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        *se = (var / n).sqrt();
    }

    let baseline = game.value(&vec![false; p])?;
    let prediction = game.prediction()?;
    Ok(game.assemble(
        AttributionMethod::ShapleySampled,
        contributions,
        Some(standard_errors),
        baseline,
        prediction,
    ))
}
