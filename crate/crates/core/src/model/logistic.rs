//! Logistic regression trained by full-batch gradient descent.
//!
//! Weights start at zero and updates are full-batch, so a fit is a pure
//! function of the dataset and hyperparameters. Emitted probabilities are
//! clamped to `[1e-12, 1 - 1e-12]` so they stay strictly inside (0, 1).

use super::{check_binary, check_shape, matrix_from_dataset, Matrix, Predictor};
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LogisticHyper {
    pub lr: f64,
    pub iters: usize,
    pub l2: f64,
}

impl Default for LogisticHyper {
    fn default() -> Self {
        LogisticHyper {
            lr: 0.1,
            iters: 500,
            l2: 0.0,
        }
    }
}

/// Fitted logistic model emitting probabilities.
#[derive(Debug, Clone)]
pub struct LogisticModel {
    feature_names: Vec<String>,
    weights: Vec<f64>,
    bias: f64,
}

const PROB_CLAMP: f64 = 1e-12;

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^t) without overflow.
fn ln_1p_exp(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// Regularized mean log-loss and its gradient at `(weights, bias)`.
/// The L2 penalty `l2/2 · ||w||²` excludes the bias.
pub fn logistic_loss_and_gradient(
    x: &Matrix,
    y: &[f64],
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.n_rows() as f64;
    let p = x.n_cols();
    let mut loss = 0.0;
    let mut grad_w = vec![0.0f64; p];
    let mut grad_b = 0.0;
    for (i, row) in x.rows().enumerate() {
        let z: f64 = bias + row.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>();
        // per-row logloss = ln(1 + e^{-z}) + (1 - y) z
        loss += ln_1p_exp(-z) + (1.0 - y[i]) * z;
        let resid = sigmoid(z) - y[i];
        for (g, v) in grad_w.iter_mut().zip(row) {
            *g += resid * v;
        }
        grad_b += resid;
    }
    loss /= n;
    grad_b /= n;
    for (g, w) in grad_w.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad_w, grad_b)
}

/// Fit a logistic regression on `ds`, whose target must be binary {0, 1}
/// with both classes present.
pub fn fit_logistic(ds: &Dataset, hyper: &LogisticHyper) -> Result<LogisticModel> {
    let y = ds
        .target()
        .ok_or_else(|| Error::invalid("fit_logistic needs a target column"))?
        .to_vec();
    check_binary(&y)?;
    let pos = y.iter().filter(|&&t| t == 1.0).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::invalid(
            "fit_logistic needs both classes present in the target",
        ));
    }
    if y.len() < 2 {
        return Err(Error::invalid("fit_logistic needs at least 2 rows"));
    }
    if hyper.lr <= 0.0 || !hyper.lr.is_finite() || hyper.l2 < 0.0 {
        return Err(Error::invalid("lr must be positive and l2 nonnegative"));
    }
    let feature_names = ds.feature_names();
    let x = matrix_from_dataset(ds, &feature_names)?;
    let mut weights = vec![0.0f64; feature_names.len()];
    let mut bias = 0.0f64;
    for _ in 0..hyper.iters {
        let (_, grad_w, grad_b) = logistic_loss_and_gradient(&x, &y, &weights, bias, hyper.l2);
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= hyper.lr * g;
        }
        bias -= hyper.lr * grad_b;
    }
    Ok(LogisticModel {
        feature_names,
        weights,
        bias,
    })
}

impl LogisticModel {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }
}

impl Predictor for LogisticModel {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_shape(self, x)?;
        Ok(x.rows()
            .map(|row| {
                let z: f64 = self.bias
                    + row
                        .iter()
                        .zip(&self.weights)
                        .map(|(v, w)| v * w)
                        .sum::<f64>();
                sigmoid(z).clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn separable_1d() -> Dataset {
        Dataset::new(
            vec![("x".into(), vec![-1.0, 1.0]), ("y".into(), vec![0.0, 1.0])],
            Some("y"),
        )
        .unwrap()
    }

    #[test]
    fn monotone_on_separable_data() {
        let model = fit_logistic(&separable_1d(), &LogisticHyper::default()).unwrap();
        let x = Matrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap();
        let p = model.predict(&x).unwrap();
        assert!(p[0] > p[1], "p(+1)={} must exceed p(-1)={}", p[0], p[1]);
        assert!(p.iter().all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn rejects_bad_targets() {
        let single = Dataset::new(
            vec![("x".into(), vec![0.0, 1.0]), ("y".into(), vec![1.0, 1.0])],
            Some("y"),
        )
        .unwrap();
        assert!(fit_logistic(&single, &LogisticHyper::default()).is_err());
        let nonbinary = Dataset::new(
            vec![("x".into(), vec![0.0, 1.0]), ("y".into(), vec![0.0, 2.0])],
            Some("y"),
        )
        .unwrap();
        assert!(fit_logistic(&nonbinary, &LogisticHyper::default()).is_err());
    }

    /// Two well-separated Gaussian classes; the class means sit many
    /// standard deviations apart so > 0.95 training accuracy is forced.
    fn two_gaussians(seed: u64, n_per_class: usize) -> Dataset {
        let mut savings = Vec::new();
        let mut wages = Vec::new();
        let mut label = Vec::new();
        for (class, (ms, mw)) in [(0.0, (25.0, 40.0)), (1.0, (75.0, 60.0))] {
            let mut r1 = rng::stream(seed, &[class as u64, 0]);
            let mut r2 = rng::stream(seed, &[class as u64, 1]);
            let normal = Normal::new(0.0, 5.0).unwrap();
            for _ in 0..n_per_class {
                savings.push(ms + normal.sample(&mut r1));
                wages.push(mw + normal.sample(&mut r2));
                label.push(class);
            }
        }
        Dataset::new(
            vec![
                ("savings".into(), savings),
                ("wages".into(), wages),
                ("paid".into(), label),
            ],
            Some("paid"),
        )
        .unwrap()
    }

    #[test]
    fn separated_gaussians_train_accurately() {
        let ds = two_gaussians(11, 100);
        let hyper = LogisticHyper {
            lr: 0.001,
            iters: 2000,
            l2: 0.0,
        };
        let model = fit_logistic(&ds, &hyper).unwrap();
        let scores = super::super::predict_dataset(&model, &ds).unwrap();
        let y = ds.target().unwrap();
        let correct = scores
            .iter()
            .zip(y)
            .filter(|(s, &t)| (**s >= 0.5) == (t == 1.0))
            .count();
        let acc = correct as f64 / y.len() as f64;
        assert!(acc > 0.95, "training accuracy {acc} too low");
    }

    // Oracle: central finite differences of the loss.
    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rng::rng_from(5);
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = (0..12)
            .map(|_| f64::from(rng.random_range(0..2u8)))
            .collect();
        let w: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: f64 = rng.random_range(-0.5..0.5);
        let l2 = 0.3;

        let (_, grad_w, grad_b) = logistic_loss_and_gradient(&x, &y, &w, b, l2);
        let h = 1e-6;
        for k in 0..w.len() {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[k] += h;
            wm[k] -= h;
            let (lp, _, _) = logistic_loss_and_gradient(&x, &y, &wp, b, l2);
            let (lm, _, _) = logistic_loss_and_gradient(&x, &y, &wm, b, l2);
            let fd = (lp - lm) / (2.0 * h);
            let rel = (grad_w[k] - fd).abs() / fd.abs().max(1e-8);
            assert!(rel < 1e-5, "weight {k}: analytic {} vs fd {fd}", grad_w[k]);
        }
        let (lp, _, _) = logistic_loss_and_gradient(&x, &y, &w, b + h, l2);
        let (lm, _, _) = logistic_loss_and_gradient(&x, &y, &w, b - h, l2);
        let fd = (lp - lm) / (2.0 * h);
        let rel = (grad_b - fd).abs() / fd.abs().max(1e-8);
        assert!(rel < 1e-5, "bias: analytic {grad_b} vs fd {fd}");
    }

    #[test]
    fn loss_non_increasing_over_iterations() {
        let ds = two_gaussians(3, 40);
        let names = ds.feature_names();
        let x = matrix_from_dataset(&ds, &names).unwrap();
        let y = ds.target().unwrap().to_vec();
        let lr = 0.0005;
        let mut w = vec![0.0; names.len()];
        let mut b = 0.0;
        let mut prev = f64::INFINITY;
        for _ in 0..200 {
            let (loss, gw, gb) = logistic_loss_and_gradient(&x, &y, &w, b, 0.0);
            assert!(loss <= prev + 1e-12, "loss increased: {prev} -> {loss}");
            prev = loss;
            for (wk, g) in w.iter_mut().zip(&gw) {
                *wk -= lr * g;
            }
            b -= lr * gb;
        }
    }
}
