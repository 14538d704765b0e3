//! The predictor contract, built-in trainable models and loss functions.
//!
//! A [`Predictor`] is an opaque batch scoring function over a declared,
//! ordered feature list. Implementations must be deterministic (same batch,
//! same scores, bit-exact) and batch-invariant (a row's score does not
//! depend on the other rows in the batch). Scores are raw reals;
//! classification models emit probabilities. Nothing downstream assumes a
//! link function.

mod boost;
mod external;
mod linear;
mod logistic;
mod tree;

pub use boost::{fit_boosted_stumps, BoostHyper, BoostedStumps};
pub use external::{external_predictor, ExternalPredictor};
pub use linear::{linear_model, LinearModel};
pub use logistic::{fit_logistic, LogisticHyper, LogisticModel};
pub use tree::{fit_tree, RegressionTree, TreeHyper};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Dense row-major matrix of feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl Matrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Matrix {
            data: vec![0.0; n_rows * n_cols],
            n_rows,
            n_cols,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("matrix has no rows".into()));
        }
        let n_cols = rows[0].len();
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::invalid("ragged rows in matrix"));
        }
        let data = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Ok(Matrix {
            data,
            n_rows: rows.len(),
            n_cols,
        })
    }

    pub fn from_flat(data: Vec<f64>, n_cols: usize) -> Result<Self> {
        if n_cols == 0 || !data.len().is_multiple_of(n_cols) {
            return Err(Error::invalid("flat data length not a multiple of n_cols"));
        }
        let n_rows = data.len() / n_cols;
        Ok(Matrix {
            data,
            n_rows,
            n_cols,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n_cols + j] = value;
    }

    /// Overwrite one column with a constant.
    pub fn fill_column(&mut self, j: usize, value: f64) {
        for i in 0..self.n_rows {
            self.data[i * self.n_cols + j] = value;
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n_cols)
    }
}

/// Opaque batch scoring function over a declared, ordered feature list.
pub trait Predictor: Send + Sync {
    /// Declared features, in the column order `predict` expects.
    fn feature_names(&self) -> &[String];

    /// Score one batch. `x.n_cols()` must equal `feature_names().len()`,
    /// with columns in declared order.
    fn predict(&self, x: &Matrix) -> Result<Vec<f64>>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn feature_names(&self) -> &[String] {
        (**self).feature_names()
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        (**self).predict(x)
    }
}

impl Predictor for Box<dyn Predictor> {
    fn feature_names(&self) -> &[String] {
        (**self).feature_names()
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        (**self).predict(x)
    }
}

pub(crate) fn check_shape(pred: &(impl Predictor + ?Sized), x: &Matrix) -> Result<()> {
    let expected = pred.feature_names().len();
    if x.n_cols() != expected {
        return Err(Error::invalid(format!(
            "batch has {} columns, predictor declares {expected} features",
            x.n_cols()
        )));
    }
    Ok(())
}

/// Project the named columns of `ds` into a matrix in `names` order.
pub fn matrix_from_dataset(ds: &Dataset, names: &[String]) -> Result<Matrix> {
    let missing: Vec<String> = names
        .iter()
        .filter(|n| ds.column(n).is_err())
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Error::FeatureMismatch { missing });
    }
    let cols: Vec<&[f64]> = names.iter().map(|n| ds.column(n).unwrap()).collect();
    let n_rows = ds.n_rows();
    let mut m = Matrix::zeros(n_rows, names.len());
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n_rows {
            m.set(i, j, col[i]);
        }
    }
    Ok(m)
}

/// Score every row of `ds` with `pred`, aligning columns by name.
pub fn predict_dataset(pred: &(impl Predictor + ?Sized), ds: &Dataset) -> Result<Vec<f64>> {
    let x = matrix_from_dataset(ds, pred.feature_names())?;
    pred.predict(&x)
}

/// Loss functions for importance ratios and model evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossFn {
    Mse,
    Mae,
    LogLoss,
    OneMinusAuc,
}

impl LossFn {
    pub fn tag(self) -> &'static str {
        match self {
            LossFn::Mse => "mse",
            LossFn::Mae => "mae",
            LossFn::LogLoss => "logloss",
            LossFn::OneMinusAuc => "one_minus_auc",
        }
    }

    /// Mean loss of `scores` against `targets`.
    pub fn evaluate(self, scores: &[f64], targets: &[f64]) -> Result<f64> {
        if scores.is_empty() || scores.len() != targets.len() {
            return Err(Error::invalid(format!(
                "scores ({}) and targets ({}) must be equal-length and non-empty",
                scores.len(),
                targets.len()
            )));
        }
        let n = scores.len() as f64;
        match self {
            LossFn::Mse => Ok(scores
                .iter()
                .zip(targets)
                .map(|(s, t)| (s - t) * (s - t))
                .sum::<f64>()
                / n),
            LossFn::Mae => Ok(scores
                .iter()
                .zip(targets)
                .map(|(s, t)| (s - t).abs())
                .sum::<f64>()
                / n),
            LossFn::LogLoss => {
                check_binary(targets)?;
                if scores.iter().any(|&s| s <= 0.0 || s >= 1.0) {
                    return Err(Error::invalid(
                        "logloss requires scores strictly inside (0, 1)",
                    ));
                }
                Ok(scores
                    .iter()
                    .zip(targets)
                    .map(|(&s, &t)| -(t * s.ln() + (1.0 - t) * (1.0 - s).ln()))
                    .sum::<f64>()
                    / n)
            }
            LossFn::OneMinusAuc => Ok(1.0 - auc(scores, targets)?),
        }
    }
}

impl std::str::FromStr for LossFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mse" => Ok(LossFn::Mse),
            "mae" => Ok(LossFn::Mae),
            "logloss" => Ok(LossFn::LogLoss),
            "one_minus_auc" | "1-auc" => Ok(LossFn::OneMinusAuc),
            other => Err(Error::invalid(format!("unknown loss {other:?}"))),
        }
    }
}

pub(crate) fn check_binary(targets: &[f64]) -> Result<()> {
    if targets.iter().any(|&t| t != 0.0 && t != 1.0) {
        return Err(Error::invalid("targets must be binary 0/1"));
    }
    Ok(())
}

/// Rank-statistic AUC with 0.5 credit for tied scores (average ranks).
fn auc(scores: &[f64], targets: &[f64]) -> Result<f64> {
    check_binary(targets)?;
    let n_pos = targets.iter().filter(|&&t| t == 1.0).count();
    let n_neg = targets.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::invalid("AUC undefined for a single-class target"));
    }
    let ranks = crate::contrast::average_ranks(scores);
    let rank_sum_pos: f64 = ranks
        .iter()
        .zip(targets)
        .filter(|(_, &t)| t == 1.0)
        .map(|(r, _)| r)
        .sum();
    let np = n_pos as f64;
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * n_neg as f64))
}

/// Mean loss of `pred` on `ds`, which must have a target column.
pub fn evaluate_loss(pred: &(impl Predictor + ?Sized), ds: &Dataset, loss: LossFn) -> Result<f64> {
    let targets = ds
        .target()
        .ok_or_else(|| Error::invalid("dataset has no target column"))?;
    let scores = predict_dataset(pred, ds)?;
    loss.evaluate(&scores, targets)
}
