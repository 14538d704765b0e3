//! Linear scoring model.

use super::{check_shape, Matrix, Predictor};
use crate::error::{Error, Result};

/// `intercept + Σ coef_i · x_i` over named features.
#[derive(Debug, Clone)]
pub struct LinearModel {
    feature_names: Vec<String>,
    coefs: Vec<f64>,
    intercept: f64,
}

/// Build a linear predictor from `(feature, coefficient)` pairs. The pair
/// order becomes the declared feature order.
pub fn linear_model(coefs: &[(String, f64)], intercept: f64) -> Result<LinearModel> {
    if coefs.is_empty() {
        return Err(Error::EmptyInput(
            "linear model needs at least one coefficient".into(),
        ));
    }
    let mut names = Vec::with_capacity(coefs.len());
    let mut values = Vec::with_capacity(coefs.len());
    for (name, coef) in coefs {
        if names.contains(name) {
            return Err(Error::DuplicateColumn(name.clone()));
        }
        if !coef.is_finite() || !intercept.is_finite() {
            return Err(Error::invalid("coefficients must be finite"));
        }
        names.push(name.clone());
        values.push(*coef);
    }
    Ok(LinearModel {
        feature_names: names,
        coefs: values,
        intercept,
    })
}

impl LinearModel {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefs
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }
}

impl Predictor for LinearModel {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_shape(self, x)?;
        Ok(x.rows()
            .map(|row| {
                self.intercept + row.iter().zip(&self.coefs).map(|(v, c)| v * c).sum::<f64>()
            })
            .collect())
    }
}
