//! Shared fixtures for the integration suites.
#![allow(dead_code)] // each test target uses a different subset

use refx_core::{
    fit_boosted_stumps, fit_tree, linear_model, BoostHyper, Dataset, LinearModel, Matrix, NamedRow,
    Predictor, ReferenceSample, Result, TreeHyper,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Pure product of the first two features; the smallest model with an
/// interaction.
pub struct ProductModel(pub Vec<String>);

impl Predictor for ProductModel {
    fn feature_names(&self) -> &[String] {
        &self.0
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        Ok(x.rows().map(|r| r[0] * r[1]).collect())
    }
}

/// `alpha * f + beta * g` over a shared feature list.
pub struct CombinedModel<F, G> {
    pub f: F,
    pub g: G,
    pub alpha: f64,
    pub beta: f64,
}

impl<F: Predictor, G: Predictor> Predictor for CombinedModel<F, G> {
    fn feature_names(&self) -> &[String] {
        self.f.feature_names()
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        let a = self.f.predict(x)?;
        let b = self.g.predict(x)?;
        Ok(a.iter()
            .zip(&b)
            .map(|(u, v)| self.alpha * u + self.beta * v)
            .collect())
    }
}

pub fn feature_names(p: usize) -> Vec<String> {
    (0..p).map(|i| format!("f{i}")).collect()
}

/// Random dataset with `p` features plus a noisy nonlinear target `y`.
pub fn random_dataset(rng: &mut ChaCha8Rng, n_rows: usize, p: usize) -> Dataset {
    let mut columns: Vec<(String, Vec<f64>)> = feature_names(p)
        .into_iter()
        .map(|name| {
            let values = (0..n_rows).map(|_| rng.random_range(-3.0..3.0)).collect();
            (name, values)
        })
        .collect();
    let y: Vec<f64> = (0..n_rows)
        .map(|i| {
            let row: Vec<f64> = columns.iter().map(|(_, v)| v[i]).collect();
            let mut acc = row[0];
            if p > 1 {
                acc += 0.5 * row[0] * row[1];
            }
            if p > 2 {
                acc += row[2].sin();
            }
            acc + 0.1 * rng.random_range(-1.0..1.0)
        })
        .collect();
    columns.push(("y".into(), y));
    Dataset::new(columns, Some("y")).unwrap()
}

/// Random linear model over `names`.
pub fn random_linear(rng: &mut ChaCha8Rng, names: &[String]) -> LinearModel {
    let coefs: Vec<(String, f64)> = names
        .iter()
        .map(|n| (n.clone(), rng.random_range(-2.0..2.0)))
        .collect();
    linear_model(&coefs, rng.random_range(-1.0..1.0)).unwrap()
}

/// A boxed model of one of the three built-in families, fitted to random
/// data when trainable.
pub fn random_model(rng: &mut ChaCha8Rng, kind: usize, ds: &Dataset) -> Box<dyn Predictor> {
    match kind % 3 {
        0 => Box::new(random_linear(rng, &ds.feature_names())),
        1 => Box::new(
            fit_tree(
                ds,
                &TreeHyper {
                    max_depth: 3,
                    min_leaf: 1,
                },
            )
            .unwrap(),
        ),
        _ => Box::new(
            fit_boosted_stumps(
                ds,
                &BoostHyper {
                    n_trees: 12,
                    lr: 0.3,
                    max_depth: 2,
                },
            )
            .unwrap(),
        ),
    }
}

/// Random reference over the feature columns of `ds`: a random subset of
/// rows, optionally with random positive weights.
pub fn random_reference(rng: &mut ChaCha8Rng, ds: &Dataset, label: &str) -> ReferenceSample {
    let names = ds.feature_names();
    let n = ds.n_rows();
    let take = rng.random_range(1..=n.min(12));
    let rows: Vec<Vec<f64>> = (0..take)
        .map(|_| {
            let r = rng.random_range(0..n);
            names
                .iter()
                .map(|name| ds.column(name).unwrap()[r])
                .collect()
        })
        .collect();
    let weights = if rng.random_bool(0.5) {
        Some((0..take).map(|_| rng.random_range(0.1..2.0)).collect())
    } else {
        None
    };
    ReferenceSample::new(
        names,
        Matrix::from_rows(&rows).unwrap(),
        weights,
        label,
        "random-fixture",
    )
    .unwrap()
}

/// A random instance drawn from the rows of `ds`.
pub fn random_instance(rng: &mut ChaCha8Rng, ds: &Dataset) -> NamedRow {
    let names = ds.feature_names();
    let r = rng.random_range(0..ds.n_rows());
    let values = names
        .iter()
        .map(|name| ds.column(name).unwrap()[r])
        .collect();
    NamedRow { names, values }
}
