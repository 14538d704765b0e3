//! The five explanation families, every one parameterized by an explicit
//! reference sample.
//!
//! - permutation importance: loss ratio after breaking a feature's link to
//!   the rest of the data;
//! - PDP / ICE: prediction profiles over a feature grid, marginalizing the
//!   remaining features over the reference (or holding one instance fixed);
//! - ALE: accumulated within-bin finite differences, robust to correlated
//!   features;
//! - Shapley values (exact and permutation-sampled) and break-down:
//!   additive decompositions of `prediction - baseline`.
//!
//! Attribution value functions are interventional throughout: coalition
//! values overwrite out-of-coalition features with reference rows,
//! ignoring feature dependence. Every artifact records the reference label
//! and row count it was computed against.

mod ale;
mod breakdown;
mod grid;
mod importance;
mod profile;
mod shapley;

pub use ale::ale;
pub use breakdown::breakdown;
pub use grid::{make_grid, GridStrategy};
pub use importance::permutation_importance;
pub use profile::{ice, pdp};
pub use shapley::{shapley_exact, shapley_sampled, MAX_EXACT_FEATURES};

use crate::model::LossFn;
use serde::{Deserialize, Serialize};

/// A row with named values, in a fixed order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedRow {
    pub names: Vec<String>,
    pub values: Vec<f64>,
}

/// How an attribution set was estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributionMethod {
    ShapleyExact,
    ShapleySampled,
    Breakdown,
}

impl AttributionMethod {
    pub fn tag(self) -> &'static str {
        match self {
            AttributionMethod::ShapleyExact => "shapley_exact",
            AttributionMethod::ShapleySampled => "shapley_sampled",
            AttributionMethod::Breakdown => "breakdown",
        }
    }
}

/// Per-feature contributions decomposing `prediction - baseline`.
///
/// Completeness is an invariant: the contributions sum to
/// `prediction - baseline` within 1e-9 for exact and break-down
/// attributions, and within the reported Monte-Carlo tolerance for sampled
/// ones.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttributionSet {
    pub method: AttributionMethod,
    /// Features that were attributed (the players of the game).
    pub features: Vec<String>,
    /// Contributions aligned with `features`.
    pub contributions: Vec<f64>,
    /// Monte-Carlo standard errors (sampled method only).
    pub standard_errors: Option<Vec<f64>>,
    /// The explained row over the predictor's full feature list.
    pub instance: NamedRow,
    /// Expected prediction with no feature fixed to the instance: the zero
    /// point of the decomposition.
    pub baseline: f64,
    /// Model prediction at the instance.
    pub prediction: f64,
    /// Always "interventional": out-of-coalition features come from the
    /// reference rows, ignoring feature dependence.
    pub value_function: String,
    pub reference_label: String,
    pub reference_rows: usize,
}

impl AttributionSet {
    /// |Σ contributions − (prediction − baseline)|.
    pub fn completeness_gap(&self) -> f64 {
        let sum: f64 = self.contributions.iter().sum();
        (sum - (self.prediction - self.baseline)).abs()
    }

    /// Contribution of one feature by name.
    pub fn contribution(&self, feature: &str) -> Option<f64> {
        self.features
            .iter()
            .position(|f| f == feature)
            .map(|i| self.contributions[i])
    }
}

/// Kind of a profile curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Pdp,
    Ale,
    Ice,
}

/// A curve of model behavior over a strictly increasing feature grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Profile {
    pub kind: ProfileKind,
    pub feature: String,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Row index of the explained instance (ICE only).
    pub instance: Option<usize>,
    /// Indices (1-based) of ALE bins that contained no reference rows and
    /// therefore contributed zero effect.
    pub empty_bins: Vec<usize>,
    pub reference_label: String,
    pub reference_rows: usize,
}

/// Permutation importance ratios per feature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImportanceTable {
    pub features: Vec<String>,
    /// Mean over repeats of (permuted loss / baseline loss), per feature.
    pub ratios: Vec<f64>,
    /// `per_repeat[k][r]` is repeat `r` for feature `k`.
    pub per_repeat: Vec<Vec<f64>>,
    pub baseline_loss: f64,
    pub loss: LossFn,
    pub repeats: usize,
    pub seed: u64,
    /// Rows of the evaluation dataset the ratios were computed on.
    pub eval_rows: usize,
}

/// Linear interpolation of `(xs, ys)` at `x`, clamped to the endpoints.
/// `xs` must be strictly increasing.
pub(crate) fn interp_clamped(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    debug_assert!(!xs.is_empty());
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let hi = xs.partition_point(|&v| v < x);
    let lo = hi - 1;
    if xs[hi] == xs[lo] {
        return ys[lo];
    }
    let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    ys[lo] + t * (ys[hi] - ys[lo])
}

pub(crate) fn check_grid(grid: &[f64]) -> crate::error::Result<()> {
    if grid.is_empty() {
        return Err(crate::error::Error::EmptyInput("grid has no points".into()));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(crate::error::Error::invalid(
            "grid contains non-finite values",
        ));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(crate::error::Error::invalid(
            "grid must be strictly increasing",
        ));
    }
    Ok(())
}
