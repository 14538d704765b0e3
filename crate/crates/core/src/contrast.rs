//! Contrastive analysis: how explanations change across reference
//! distributions, and how marginal drift relates to explanation
//! divergence.

use crate::data::{ks_distance, wasserstein1, Dataset};
use crate::error::{Error, Result};
use crate::explain::{make_grid, pdp, AttributionSet, GridStrategy, Profile};
use crate::model::{evaluate_loss, predict_dataset, LossFn, Predictor};
use crate::reference::ref_from_dataset;
use serde::{Deserialize, Serialize};

/// One attributed explanation entering a contrast.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContrastInput {
    pub label: String,
    pub attribution: AttributionSet,
}

/// Per-feature view across the contrasted references.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureContrast {
    pub feature: String,
    /// Contribution under each input reference, in input order.
    pub values: Vec<f64>,
    /// Largest pairwise absolute difference.
    pub max_delta: f64,
    /// Some pair of references gives this feature strictly opposite signs,
    /// both exceeding the tolerance in magnitude.
    pub sign_flip: bool,
}

/// How the same instance's attributions differ across references.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContrastReport {
    pub inputs: Vec<ContrastInput>,
    /// Sign-flip tolerance actually used.
    pub tolerance: f64,
    pub per_feature: Vec<FeatureContrast>,
    /// `spearman_abs[i][j]`: rank correlation of attribution magnitudes
    /// between inputs `i` and `j`; `None` where ranks are degenerate
    /// (constant magnitudes).
    pub spearman_abs: Vec<Vec<Option<f64>>>,
    /// `rankings[i]`: features of input `i` ordered by |contribution|
    /// descending (ties keep feature order).
    pub rankings: Vec<Vec<String>>,
}

/// Compare attribution sets for the same instance computed against
/// different references.
///
/// `tolerance` guards sign flips: a flip is only reported when both
/// compared contributions exceed it in magnitude. `None` picks
/// `1e-6 · max_k |prediction_k - baseline_k|`, which is scale-free.
pub fn compare_attributions(
    sets: &[AttributionSet],
    tolerance: Option<f64>,
) -> Result<ContrastReport> {
    if sets.len() < 2 {
        return Err(Error::invalid("contrast needs at least 2 attribution sets"));
    }
    let first = &sets[0];
    for set in &sets[1..] {
        if set.features != first.features {
            return Err(Error::invalid(format!(
                "feature mismatch between contrasted sets: {:?} vs {:?}",
                first.features, set.features
            )));
        }
        if set.instance != first.instance {
            return Err(Error::invalid(
                "contrasted sets explain different instances",
            ));
        }
    }
    let tolerance = match tolerance {
        Some(t) => {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::invalid("tolerance must be finite and nonnegative"));
            }
            t
        }
        None => {
            1e-6 * sets
                .iter()
                .map(|s| (s.prediction - s.baseline).abs())
                .fold(0.0, f64::max)
        }
    };

    let mut per_feature = Vec::with_capacity(first.features.len());
    for (k, feature) in first.features.iter().enumerate() {
        let values: Vec<f64> = sets.iter().map(|s| s.contributions[k]).collect();
        let mut max_delta = 0.0f64;
        let mut sign_flip = false;
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                max_delta = max_delta.max((values[i] - values[j]).abs());
                let (a, b) = (values[i], values[j]);
                if a.abs() > tolerance && b.abs() > tolerance && a.signum() != b.signum() {
                    sign_flip = true;
                }
            }
        }
        per_feature.push(FeatureContrast {
            feature: feature.clone(),
            values,
            max_delta,
            sign_flip,
        });
    }

    let magnitudes: Vec<Vec<f64>> = sets
        .iter()
        .map(|s| s.contributions.iter().map(|c| c.abs()).collect())
        .collect();
    let mut spearman_abs = vec![vec![None; sets.len()]; sets.len()];
    for i in 0..sets.len() {
        for j in 0..sets.len() {
            spearman_abs[i][j] = if i == j {
                Some(1.0)
            } else {
                spearman(&magnitudes[i], &magnitudes[j]).ok()
            };
        }
    }

    let rankings: Vec<Vec<String>> = magnitudes
        .iter()
        .map(|mags| {
            let mut order: Vec<usize> = (0..mags.len()).collect();
            order.sort_by(|&a, &b| mags[b].total_cmp(&mags[a]).then(a.cmp(&b)));
            order.iter().map(|&k| first.features[k].clone()).collect()
        })
        .collect();

    Ok(ContrastReport {
        inputs: sets
            .iter()
            .map(|s| ContrastInput {
                label: s.reference_label.clone(),
                attribution: s.clone(),
            })
            .collect(),
        tolerance,
        per_feature,
        spearman_abs,
        rankings,
    })
}

/// L2 and sup distance between two profile curves.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CurveDistance {
    /// `sqrt( ∫ (a-b)² / range length )` by the trapezoid rule on the
    /// union grid.
    pub l2: f64,
    /// Largest absolute difference at a union-grid point.
    pub sup: f64,
}

/// Compare two profiles of the same feature. Curves are linearly
/// interpolated onto the union of their grids, restricted to the
/// overlapping range.
pub fn compare_profiles(a: &Profile, b: &Profile) -> Result<CurveDistance> {
    if a.feature != b.feature {
        return Err(Error::invalid(format!(
            "profiles describe different features: {:?} vs {:?}",
            a.feature, b.feature
        )));
    }
    let lo = a.grid[0].max(b.grid[0]);
    let hi = a.grid[a.grid.len() - 1].min(b.grid[b.grid.len() - 1]);
    if lo > hi {
        return Err(Error::invalid(format!(
            "profile grids do not overlap for feature {:?}",
            a.feature
        )));
    }
    let mut union: Vec<f64> = a
        .grid
        .iter()
        .chain(b.grid.iter())
        .copied()
        .filter(|&z| z >= lo && z <= hi)
        .chain([lo, hi])
        .collect();
    union.sort_by(f64::total_cmp);
    union.dedup();

    let interp = |p: &Profile, z: f64| crate::explain::interp_clamped(&p.grid, &p.values, z);
    let diffs: Vec<f64> = union.iter().map(|&z| interp(a, z) - interp(b, z)).collect();
    let sup = diffs.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    if lo == hi {
        return Ok(CurveDistance { l2: sup, sup });
    }
    let mut integral = 0.0;
    for k in 0..union.len() - 1 {
        let width = union[k + 1] - union[k];
        integral += 0.5 * (diffs[k] * diffs[k] + diffs[k + 1] * diffs[k + 1]) * width;
    }
    Ok(CurveDistance {
        l2: (integral / (hi - lo)).sqrt(),
        sup,
    })
}

/// Spearman rank correlation with average ranks for ties. Errors when
/// either vector has constant ranks (zero rank variance).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::invalid(
            "spearman needs two equal-length vectors of at least 2 values",
        ));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let var = |r: &[f64]| r.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    let (vx, vy) = (var(&rx), var(&ry));
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::invalid(
            "spearman undefined: a vector has zero rank variance",
        ));
    }
    let cov: f64 = rx
        .iter()
        .zip(&ry)
        .map(|(a, b)| (a - mean) * (b - mean))
        .sum();
    Ok(cov / (vx * vy).sqrt())
}

/// 1-based average ranks (ties share the mean of their rank range).
pub(crate) fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0f64; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0;
        for k in i..=j {
            ranks[idx[k]] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Model performance on the two drifted datasets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerformanceNote {
    pub loss: LossFn,
    pub on_a: f64,
    pub on_b: f64,
}

/// Marginal and explanation distances for one feature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureDrift {
    pub feature: String,
    pub ks: f64,
    pub wasserstein1: f64,
    pub pdp_l2: f64,
    pub pdp_sup: f64,
    pub ale_l2: f64,
    pub ale_sup: f64,
}

/// Diagnostic relating marginal similarity to explanation divergence
/// between two datasets used as references for the same model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftReport {
    pub label_a: String,
    pub label_b: String,
    pub features: Vec<FeatureDrift>,
    pub performance: Option<PerformanceNote>,
    /// Marginal-similarity threshold used for the flag.
    pub kappa: f64,
    /// Curve-divergence threshold used for the flag.
    pub delta: f64,
    /// Every per-feature KS distance is below `kappa`, yet some profile
    /// distance exceeds `delta`: the datasets look alike marginally while
    /// the model's explanations disagree.
    pub similar_marginals_different_explanations: bool,
}

/// Settings for [`drift_report`]. Thresholds are echoed in the report.
#[derive(Debug, Clone)]
pub struct DriftSettings {
    pub label_a: String,
    pub label_b: String,
    /// Points for the per-dataset quantile PDP grid.
    pub grid_points: usize,
    /// Quantile bins for the per-dataset ALE curves.
    pub ale_bins: usize,
    /// KS threshold below which marginals count as similar.
    pub kappa: f64,
    /// Curve-distance threshold; `None` resolves to 5% of the prediction
    /// range on the first dataset.
    pub delta: Option<f64>,
    /// Loss for the performance note, when both datasets carry a target.
    pub loss: Option<LossFn>,
}

impl Default for DriftSettings {
    fn default() -> Self {
        DriftSettings {
            label_a: "a".into(),
            label_b: "b".into(),
            grid_points: 21,
            ale_bins: 10,
            kappa: 0.1,
            delta: None,
            loss: Some(LossFn::Mse),
        }
    }
}

/// Compute marginal distances (KS, W1) and explanation distances (PDP and
/// ALE curves, each dataset taken as the reference) per feature, and flag
/// the "similar marginals, different explanations" situation.
pub fn drift_report(
    pred: &(impl Predictor + ?Sized),
    ds_a: &Dataset,
    ds_b: &Dataset,
    features: &[String],
    settings: &DriftSettings,
) -> Result<DriftReport> {
    if features.is_empty() {
        return Err(Error::EmptyInput("no features requested".into()));
    }
    let ref_a = ref_from_dataset(ds_a, settings.label_a.clone())?;
    let ref_b = ref_from_dataset(ds_b, settings.label_b.clone())?;

    let scores_a = predict_dataset(pred, ds_a)?;
    let range = {
        let lo = scores_a.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = scores_a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let delta = settings.delta.unwrap_or(0.05 * range);

    let mut drifts = Vec::with_capacity(features.len());
    for feature in features {
        let col_a = ds_a.column(feature)?;
        let col_b = ds_b.column(feature)?;
        let ks = ks_distance(col_a, col_b)?;
        let w1 = wasserstein1(col_a, col_b)?;

        let grid_a = make_grid(
            &ref_a,
            feature,
            GridStrategy::Quantile,
            settings.grid_points,
        )?;
        let grid_b = make_grid(
            &ref_b,
            feature,
            GridStrategy::Quantile,
            settings.grid_points,
        )?;
        let pdp_a = pdp(pred, &ref_a, feature, &grid_a)?;
        let pdp_b = pdp(pred, &ref_b, feature, &grid_b)?;
        let pdp_dist = compare_profiles(&pdp_a, &pdp_b)?;

        let ale_a = crate::explain::ale(pred, &ref_a, feature, settings.ale_bins)?;
        let ale_b = crate::explain::ale(pred, &ref_b, feature, settings.ale_bins)?;
        let ale_dist = compare_profiles(&ale_a, &ale_b)?;

        drifts.push(FeatureDrift {
            feature: feature.clone(),
            ks,
            wasserstein1: w1,
            pdp_l2: pdp_dist.l2,
            pdp_sup: pdp_dist.sup,
            ale_l2: ale_dist.l2,
            ale_sup: ale_dist.sup,
        });
    }

    let performance = match settings.loss {
        Some(loss) if ds_a.target().is_some() && ds_b.target().is_some() => Some(PerformanceNote {
            loss,
            on_a: evaluate_loss(pred, ds_a, loss)?,
            on_b: evaluate_loss(pred, ds_b, loss)?,
        }),
        _ => None,
    };

    let marginals_similar = drifts.iter().all(|d| d.ks < settings.kappa);
    let explanations_differ = drifts
        .iter()
        .any(|d| d.pdp_l2 > delta || d.pdp_sup > delta || d.ale_l2 > delta || d.ale_sup > delta);

    Ok(DriftReport {
        label_a: settings.label_a.clone(),
        label_b: settings.label_b.clone(),
        features: drifts,
        performance,
        kappa: settings.kappa,
        delta,
        similar_marginals_different_explanations: marginals_similar && explanations_differ,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explain::{shapley_exact, NamedRow, ProfileKind};
    use crate::model::linear_model;
    use crate::reference::ref_gaussian;
    use approx::assert_relative_eq;

    fn credit_sets() -> (AttributionSet, AttributionSet) {
        let model = linear_model(
            &[("wages".into(), 5.0 / 3.0), ("savings".into(), 2.0 / 3.0)],
            0.0,
        )
        .unwrap();
        let instance = NamedRow {
            names: vec!["wages".into(), "savings".into()],
            values: vec![35.0, 40.0],
        };
        let defaulted = ref_gaussian(
            &[("savings".into(), 25.0, 0.0), ("wages".into(), 40.0, 0.0)],
            1,
            0,
            "defaulted",
        )
        .unwrap();
        let paid = ref_gaussian(
            &[("savings".into(), 75.0, 0.0), ("wages".into(), 60.0, 0.0)],
            1,
            0,
            "paid",
        )
        .unwrap();
        (
            shapley_exact(&model, &defaulted, &instance, None).unwrap(),
            shapley_exact(&model, &paid, &instance, None).unwrap(),
        )
    }

    #[test]
    fn identical_sets_have_no_deltas_or_flips() {
        let (a, _) = credit_sets();
        let report = compare_attributions(&[a.clone(), a], None).unwrap();
        for f in &report.per_feature {
            assert_eq!(f.max_delta, 0.0);
            assert!(!f.sign_flip);
        }
        assert_eq!(report.spearman_abs[0][1], Some(1.0));
    }

    // Closed-form per reference: savings flips sign (+10 vs -70/3), wages
    // stays negative (-25/3 vs -125/3).
    #[test]
    fn credit_references_flip_savings_but_not_wages() {
        let (defaulted, paid) = credit_sets();
        let report = compare_attributions(&[defaulted, paid], None).unwrap();
        let savings = report
            .per_feature
            .iter()
            .find(|f| f.feature == "savings")
            .unwrap();
        assert_relative_eq!(savings.values[0], 10.0, epsilon = 1e-9);
        assert_relative_eq!(savings.values[1], -70.0 / 3.0, epsilon = 1e-9);
        assert!(savings.sign_flip);
        let wages = report
            .per_feature
            .iter()
            .find(|f| f.feature == "wages")
            .unwrap();
        assert_relative_eq!(wages.values[0], -25.0 / 3.0, epsilon = 1e-9);
        assert_relative_eq!(wages.values[1], -125.0 / 3.0, epsilon = 1e-9);
        assert!(!wages.sign_flip);
    }

    #[test]
    fn zero_attribution_never_flips_under_tolerance() {
        let (mut a, mut b) = credit_sets();
        // append a dummy zero-attribution feature to both sets
        for set in [&mut a, &mut b] {
            set.features.push("noise".into());
            set.contributions.push(0.0);
        }
        // tiny opposite-signed noise below tolerance must not flip either
        a.contributions[2] = 1e-12;
        b.contributions[2] = -1e-12;
        let report = compare_attributions(&[a, b], None).unwrap();
        let noise = report
            .per_feature
            .iter()
            .find(|f| f.feature == "noise")
            .unwrap();
        assert!(!noise.sign_flip);
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let (a, b) = credit_sets();
        assert!(compare_attributions(std::slice::from_ref(&a), None).is_err());
        let mut other = b.clone();
        other.instance.values[0] += 1.0;
        assert!(compare_attributions(&[a.clone(), other], None).is_err());
        let mut renamed = b;
        renamed.features[0] = "zzz".into();
        assert!(compare_attributions(&[a, renamed], None).is_err());
    }

    fn flat_profile(feature: &str, grid: Vec<f64>, value: f64) -> Profile {
        Profile {
            kind: ProfileKind::Pdp,
            feature: feature.into(),
            values: vec![value; grid.len()],
            grid,
            instance: None,
            empty_bins: vec![],
            reference_label: "test".into(),
            reference_rows: 1,
        }
    }

    #[test]
    fn identical_profiles_have_zero_distance() {
        let a = flat_profile("x", vec![0.0, 1.0, 2.0], 3.0);
        let d = compare_profiles(&a, &a).unwrap();
        assert_eq!(d.l2, 0.0);
        assert_eq!(d.sup, 0.0);
    }

    #[test]
    fn constant_curves_unit_apart() {
        let a = flat_profile("x", vec![0.0, 1.0], 0.0);
        let b = flat_profile("x", vec![0.0, 0.5, 1.0], 1.0);
        let d = compare_profiles(&a, &b).unwrap();
        assert_relative_eq!(d.l2, 1.0, epsilon = 1e-12);
        assert_relative_eq!(d.sup, 1.0, epsilon = 1e-12);
    }

    // Oracle: ∫ (z - 2z)² dz over [0,1] = 1/3, so L2 = sqrt(1/3). The
    // trapezoid error on step h is bounded by h²/6 for this quadratic.
    #[test]
    fn line_pair_matches_analytic_integral() {
        let grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
        let a = Profile {
            values: grid.clone(),
            ..flat_profile("x", grid.clone(), 0.0)
        };
        let b = Profile {
            values: grid.iter().map(|z| 2.0 * z).collect(),
            ..flat_profile("x", grid.clone(), 0.0)
        };
        let d = compare_profiles(&a, &b).unwrap();
        let analytic = (1.0f64 / 3.0).sqrt();
        let h: f64 = 0.1;
        let bound = h * h / 6.0;
        assert!(
            (d.l2 - analytic).abs() <= bound,
            "l2 {} vs analytic {analytic}, bound {bound}",
            d.l2
        );
        assert_relative_eq!(d.sup, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn non_overlapping_grids_error() {
        let a = flat_profile("x", vec![0.0, 1.0], 0.0);
        let b = flat_profile("x", vec![2.0, 3.0], 0.0);
        assert!(compare_profiles(&a, &b).is_err());
    }

    #[test]
    fn profile_comparison_is_symmetric() {
        let a = flat_profile("x", vec![0.0, 0.7, 2.0], 1.0);
        let b = Profile {
            values: vec![0.0, 2.0, -1.0],
            ..flat_profile("x", vec![0.0, 1.0, 2.0], 0.0)
        };
        let ab = compare_profiles(&a, &b).unwrap();
        let ba = compare_profiles(&b, &a).unwrap();
        assert_eq!(ab.l2, ba.l2);
        assert_eq!(ab.sup, ba.sup);
    }

    #[test]
    fn spearman_basics() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(spearman(&x, &x).unwrap(), 1.0);
        let rev = [4.0, 3.0, 2.0, 1.0];
        assert_relative_eq!(spearman(&x, &rev).unwrap(), -1.0);
        assert!(spearman(&x, &[1.0, 1.0, 1.0, 1.0]).is_err());
        assert!(spearman(&x, &[1.0]).is_err());
    }

    // Oracle: hand rank computation. x = [1,2,3] ranks (1,2,3);
    // y = [1,3,2] ranks (1,3,2). Pearson of ranks = 0.5.
    #[test]
    fn spearman_matches_hand_ranks() {
        let v = spearman(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert_relative_eq!(v, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn drift_of_dataset_with_itself_is_zero() {
        let ds = Dataset::new(
            vec![
                ("a".into(), vec![1.0, 2.0, 3.0, 4.0, 5.0]),
                ("b".into(), vec![2.0, 1.0, 4.0, 3.0, 6.0]),
            ],
            None,
        )
        .unwrap();
        let model = linear_model(&[("a".into(), 1.0), ("b".into(), 0.5)], 0.0).unwrap();
        let report = drift_report(
            &model,
            &ds,
            &ds,
            &["a".into(), "b".into()],
            &DriftSettings::default(),
        )
        .unwrap();
        for f in &report.features {
            assert_eq!(f.ks, 0.0);
            assert_eq!(f.wasserstein1, 0.0);
            assert_eq!(f.pdp_sup, 0.0);
            assert_eq!(f.ale_sup, 0.0);
        }
        assert!(!report.similar_marginals_different_explanations);
    }

    // Additive closed form: a linear model's PDP on two datasets differs by
    // the constant |coef_other| * |mean difference of the other feature|.
    #[test]
    fn linear_pdp_shift_matches_closed_form() {
        let model = linear_model(&[("a".into(), 2.0), ("b".into(), 3.0)], 1.0).unwrap();
        let ds_a = Dataset::new(
            vec![
                ("a".into(), vec![0.0, 1.0, 2.0, 3.0]),
                ("b".into(), vec![0.0, 0.0, 1.0, 1.0]),
            ],
            None,
        )
        .unwrap();
        let ds_b = Dataset::new(
            vec![
                ("a".into(), vec![0.0, 1.0, 2.0, 3.0]),
                ("b".into(), vec![2.0, 2.0, 3.0, 3.0]),
            ],
            None,
        )
        .unwrap();
        let settings = DriftSettings {
            delta: Some(1e9), // avoid flag noise; we check distances here
            ..DriftSettings::default()
        };
        let report = drift_report(&model, &ds_a, &ds_b, &["a".into()], &settings).unwrap();
        // identical 'a' grids; curves differ by 3 * (mean_b_a - mean_b_b) = 3*2
        let drift = &report.features[0];
        assert_relative_eq!(drift.pdp_sup, 6.0, epsilon = 1e-9);
        assert_relative_eq!(drift.pdp_l2, 6.0, epsilon = 1e-9);
    }
}
