//! Stagewise least-squares gradient boosting over shallow trees.

use super::tree::{grow_on_matrix, RegressionTree, TreeHyper};
use super::{check_shape, matrix_from_dataset, Matrix, Predictor};
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct BoostHyper {
    pub n_trees: usize,
    pub lr: f64,
    /// Depth of each weak learner; stumps, so at most 2.
    pub max_depth: usize,
}

impl Default for BoostHyper {
    fn default() -> Self {
        BoostHyper {
            n_trees: 100,
            lr: 0.1,
            max_depth: 2,
        }
    }
}

/// Boosted ensemble: mean target plus `lr`-scaled residual trees.
#[derive(Debug, Clone)]
pub struct BoostedStumps {
    feature_names: Vec<String>,
    base: f64,
    lr: f64,
    trees: Vec<RegressionTree>,
}

/// Fit least-squares gradient boosting: start from the target mean, then
/// repeatedly fit a depth-limited tree to the current residuals and add it
/// with step `lr`. Fully deterministic.
pub fn fit_boosted_stumps(ds: &Dataset, hyper: &BoostHyper) -> Result<BoostedStumps> {
    if hyper.n_trees < 1 {
        return Err(Error::invalid("n_trees must be at least 1"));
    }
    if hyper.max_depth == 0 || hyper.max_depth > 2 {
        return Err(Error::invalid("stump depth must be 1 or 2"));
    }
    if !(hyper.lr.is_finite() && hyper.lr > 0.0) {
        return Err(Error::invalid("lr must be positive"));
    }
    let y = ds
        .target()
        .ok_or_else(|| Error::invalid("fit_boosted_stumps needs a target column"))?;
    let feature_names = ds.feature_names();
    let x = matrix_from_dataset(ds, &feature_names)?;
    let tree_hyper = TreeHyper {
        max_depth: hyper.max_depth,
        min_leaf: 1,
    };
    let base = y.iter().sum::<f64>() / y.len() as f64;
    let mut current: Vec<f64> = vec![base; y.len()];
    let mut trees = Vec::with_capacity(hyper.n_trees);
    for _ in 0..hyper.n_trees {
        let residuals: Vec<f64> = y.iter().zip(&current).map(|(t, c)| t - c).collect();
        let tree = grow_on_matrix(&x, &residuals, &feature_names, &tree_hyper);
        let correction = tree.predict(&x)?;
        for (c, d) in current.iter_mut().zip(&correction) {
            *c += hyper.lr * d;
        }
        trees.push(tree);
    }
    Ok(BoostedStumps {
        feature_names,
        base,
        lr: hyper.lr,
        trees,
    })
}

impl Predictor for BoostedStumps {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_shape(self, x)?;
        let mut scores = vec![self.base; x.n_rows()];
        for tree in &self.trees {
            let correction = tree.predict(x)?;
            for (s, d) in scores.iter_mut().zip(&correction) {
                *s += self.lr * d;
            }
        }
        Ok(scores)
    }
}
