//! Reference samples: the data context every explanation is computed
//! against.
//!
//! A [`ReferenceSample`] is a concrete weighted set of rows, never a
//! parametric distribution object. All expectations downstream (baselines,
//! profiles, attribution value functions) are weighted sample means over
//! these rows, which keeps the provenance of every explanation auditable:
//! the sample records a human-readable `label` and a `source` description
//! of how it was built, and both travel into every artifact derived from
//! it.

use crate::data::{filter_rows, Dataset, RowPredicate};
use crate::error::{Error, Result};
use crate::model::{matrix_from_dataset, predict_dataset, Matrix, Predictor};
use crate::rng;
use rand_distr::{Distribution, Normal};

/// Weighted sample of rows over named features.
#[derive(Debug, Clone)]
pub struct ReferenceSample {
    feature_names: Vec<String>,
    rows: Matrix,
    /// Strictly positive; used normalized to sum 1. `None` means uniform.
    weights: Option<Vec<f64>>,
    label: String,
    source: String,
}

/// Ranking direction for [`ref_top_k`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Highest,
    Lowest,
}

/// Ranking key for [`ref_top_k`]: a column or a model score.
pub enum TopKKey<'a> {
    Column(&'a str),
    Predictor(&'a dyn Predictor),
}

impl ReferenceSample {
    /// Build directly from parts. `weights`, when given, must be strictly
    /// positive and match the row count.
    pub fn new(
        feature_names: Vec<String>,
        rows: Matrix,
        weights: Option<Vec<f64>>,
        label: impl Into<String>,
        source: impl Into<String>,
    ) -> Result<Self> {
        if rows.n_rows() == 0 {
            return Err(Error::EmptyReference("reference sample has no rows".into()));
        }
        if feature_names.len() != rows.n_cols() {
            return Err(Error::invalid(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                rows.n_cols()
            )));
        }
        if let Some(w) = &weights {
            if w.len() != rows.n_rows() {
                return Err(Error::invalid("weights length must equal row count"));
            }
            if w.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
                return Err(Error::invalid("weights must be strictly positive"));
            }
        }
        Ok(ReferenceSample {
            feature_names,
            rows,
            weights,
            label: label.into(),
            source: source.into(),
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.n_rows()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Replace the source description (the CLI embeds the verbatim config
    /// spec here).
    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn rows(&self) -> &Matrix {
        &self.rows
    }

    /// Weights normalized to sum 1 (uniform when none were given).
    pub fn normalized_weights(&self) -> Vec<f64> {
        match &self.weights {
            None => vec![1.0 / self.n_rows() as f64; self.n_rows()],
            Some(w) => {
                let total: f64 = w.iter().sum();
                w.iter().map(|v| v / total).collect()
            }
        }
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .feature_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        Ok((0..self.rows.n_rows())
            .map(|i| self.rows.get(i, j))
            .collect())
    }

    /// Project rows into `names` order. The reference's features must form
    /// a superset of `names`; missing ones are reported by name.
    pub fn matrix_for(&self, names: &[String]) -> Result<Matrix> {
        let mut indices = Vec::with_capacity(names.len());
        let mut missing = Vec::new();
        for name in names {
            match self.feature_names.iter().position(|n| n == name) {
                Some(j) => indices.push(j),
                None => missing.push(name.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(Error::FeatureMismatch { missing });
        }
        let mut m = Matrix::zeros(self.rows.n_rows(), names.len());
        for i in 0..self.rows.n_rows() {
            for (out_j, &src_j) in indices.iter().enumerate() {
                m.set(i, out_j, self.rows.get(i, src_j));
            }
        }
        Ok(m)
    }
}

/// All rows of `ds` with uniform weights; the target column is not a
/// feature of the reference.
pub fn ref_from_dataset(ds: &Dataset, label: impl Into<String>) -> Result<ReferenceSample> {
    if ds.n_rows() == 0 {
        return Err(Error::EmptyReference("dataset has no rows".into()));
    }
    let feature_names = ds.feature_names();
    let rows = matrix_from_dataset(ds, &feature_names)?;
    let n = rows.n_rows();
    ReferenceSample::new(
        feature_names,
        rows,
        None,
        label,
        format!("dataset(rows={n})"),
    )
}

/// Rows of `ds` matching `pred`. An empty result is an explicit error: an
/// empty context is never silently substituted.
pub fn ref_from_filter(
    ds: &Dataset,
    pred: &RowPredicate,
    label: impl Into<String>,
) -> Result<ReferenceSample> {
    let sub = filter_rows(ds, pred)?;
    if sub.n_rows() == 0 {
        return Err(Error::EmptyReference(format!(
            "filter [{}] matched no rows",
            pred.describe()
        )));
    }
    let label = label.into();
    let source = format!("filter({}; rows={})", pred.describe(), sub.n_rows());
    Ok(ref_from_dataset(&sub, label)?.with_source(source))
}

/// The `k` rows of `ds` with the most extreme key values. Ties are broken
/// by original row order (stable), and selected rows keep their original
/// relative order.
pub fn ref_top_k(
    ds: &Dataset,
    key: TopKKey<'_>,
    k: usize,
    direction: Direction,
    label: impl Into<String>,
) -> Result<ReferenceSample> {
    if k == 0 || k > ds.n_rows() {
        return Err(Error::invalid(format!(
            "k = {k} out of range 1..={}",
            ds.n_rows()
        )));
    }
    let (scores, key_desc): (Vec<f64>, String) = match key {
        TopKKey::Column(name) => (ds.column(name)?.to_vec(), format!("column {name}")),
        TopKKey::Predictor(pred) => (predict_dataset(pred, ds)?, "model score".to_string()),
    };
    let mut order: Vec<usize> = (0..ds.n_rows()).collect();
    // stable sort keeps original order among ties
    match direction {
        Direction::Highest => order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a])),
        Direction::Lowest => order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b])),
    }
    let mut selected: Vec<usize> = order[..k].to_vec();
    selected.sort_unstable();

    let feature_names = ds.feature_names();
    let full = matrix_from_dataset(ds, &feature_names)?;
    let rows: Vec<Vec<f64>> = selected.iter().map(|&r| full.row(r).to_vec()).collect();
    let dir = match direction {
        Direction::Highest => "highest",
        Direction::Lowest => "lowest",
    };
    ReferenceSample::new(
        feature_names,
        Matrix::from_rows(&rows)?,
        None,
        label,
        format!("topk({dir} {k} by {key_desc})"),
    )
}

/// `n` i.i.d. rows with independent Gaussian coordinates, deterministic
/// from `seed`. A zero standard deviation yields that coordinate exactly at
/// its mean (degenerate point mass). Each coordinate draws from its own
/// split stream, so the sample for a feature does not depend on how many
/// features precede it.
pub fn ref_gaussian(
    features: &[(String, f64, f64)], // (name, mean, std)
    n: usize,
    seed: u64,
    label: impl Into<String>,
) -> Result<ReferenceSample> {
    if features.is_empty() {
        return Err(Error::EmptyInput(
            "ref_gaussian needs at least one feature".into(),
        ));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    for (name, mean, std) in features {
        if !(mean.is_finite() && std.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite parameters for {name:?}"
            )));
        }
        if *std < 0.0 {
            return Err(Error::invalid(format!("negative std for {name:?}")));
        }
    }
    let names: Vec<String> = features.iter().map(|(n, _, _)| n.clone()).collect();
    if let Some(dup) = names
        .iter()
        .enumerate()
        .find(|(i, n)| names[..*i].contains(n))
    {
        return Err(Error::DuplicateColumn(dup.1.clone()));
    }
    let mut m = Matrix::zeros(n, features.len());
    for (j, (_, mean, std)) in features.iter().enumerate() {
        if *std == 0.0 {
            for i in 0..n {
                m.set(i, j, *mean);
            }
        } else {
            let mut stream = rng::stream(seed, &[j as u64]);
            let normal = Normal::new(*mean, *std).expect("validated parameters");
            for i in 0..n {
                m.set(i, j, normal.sample(&mut stream));
            }
        }
    }
    let spec: Vec<String> = features
        .iter()
        .map(|(name, mean, std)| format!("{name}~N({mean},{std})"))
        .collect();
    ReferenceSample::new(
        names,
        m,
        None,
        label,
        format!("gaussian({}; n={n}, seed={seed})", spec.join(", ")),
    )
}

/// Expected model prediction over the reference: the weight-normalized mean
/// score. This is the zero point of every attribution decomposition.
pub fn baseline(pred: &(impl Predictor + ?Sized), reference: &ReferenceSample) -> Result<f64> {
    let x = reference.matrix_for(pred.feature_names())?;
    let scores = pred.predict(&x)?;
    let weights = reference.normalized_weights();
    Ok(scores.iter().zip(&weights).map(|(s, w)| s * w).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Comparator;
    use crate::model::linear_model;
    use approx::assert_relative_eq;

    fn toy_dataset() -> Dataset {
        Dataset::new(
            vec![
                ("a".into(), vec![5.0, 1.0, 9.0, 7.0]),
                ("b".into(), vec![1.0, 2.0, 3.0, 4.0]),
                ("y".into(), vec![0.0, 1.0, 0.0, 1.0]),
            ],
            Some("y"),
        )
        .unwrap()
    }

    #[test]
    fn from_dataset_uniform_weights_and_no_target() {
        let ds = toy_dataset();
        let r = ref_from_dataset(&ds, "all").unwrap();
        assert_eq!(r.n_rows(), 4);
        assert_eq!(r.feature_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(r.normalized_weights(), vec![0.25; 4]);
        // rows equal dataset rows bit-exactly
        for i in 0..4 {
            assert_eq!(r.rows().row(i)[0], ds.column("a").unwrap()[i]);
            assert_eq!(r.rows().row(i)[1], ds.column("b").unwrap()[i]);
        }
    }

    #[test]
    fn filter_keeps_positive_class() {
        let ds = toy_dataset();
        let pred = RowPredicate::clause("y", Comparator::Eq, 1.0);
        let r = ref_from_filter(&ds, &pred, "positives").unwrap();
        assert_eq!(r.n_rows(), 2);
        assert_eq!(r.column("a").unwrap(), vec![1.0, 7.0]);
    }

    #[test]
    fn empty_filter_is_an_error() {
        let ds = toy_dataset();
        let pred = RowPredicate::clause("a", Comparator::Gt, 100.0);
        assert!(matches!(
            ref_from_filter(&ds, &pred, "none"),
            Err(Error::EmptyReference(_))
        ));
    }

    // Oracle: sort the column, take the top two values.
    #[test]
    fn top_k_by_column_matches_sort() {
        let ds = toy_dataset();
        let r = ref_top_k(&ds, TopKKey::Column("a"), 2, Direction::Highest, "top2").unwrap();
        assert_eq!(r.column("a").unwrap(), vec![9.0, 7.0]);
        let r = ref_top_k(&ds, TopKKey::Column("a"), 2, Direction::Lowest, "bot2").unwrap();
        assert_eq!(r.column("a").unwrap(), vec![5.0, 1.0]);
    }

    #[test]
    fn top_k_equals_full_dataset_at_k_n() {
        let ds = toy_dataset();
        let all = ref_from_dataset(&ds, "all").unwrap();
        let top = ref_top_k(&ds, TopKKey::Column("a"), 4, Direction::Highest, "all").unwrap();
        assert_eq!(top.n_rows(), all.n_rows());
        for i in 0..all.n_rows() {
            assert_eq!(top.rows().row(i), all.rows().row(i));
        }
    }

    // Oracle: score rows with the model, sort scores, compare selections.
    #[test]
    fn top_k_by_predictor_matches_score_sort() {
        let ds = toy_dataset();
        let model = linear_model(&[("a".into(), 1.0), ("b".into(), -2.0)], 0.0).unwrap();
        let scores = predict_dataset(&model, &ds).unwrap();
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]));
        let mut expected = order[..2].to_vec();
        expected.sort_unstable();

        let r = ref_top_k(&ds, TopKKey::Predictor(&model), 2, Direction::Highest, "t").unwrap();
        let full = matrix_from_dataset(&ds, &ds.feature_names()).unwrap();
        for (out, &src) in expected.iter().enumerate() {
            assert_eq!(r.rows().row(out), full.row(src));
        }
    }

    #[test]
    fn top_k_ties_keep_original_order() {
        let ds = Dataset::new(
            vec![
                ("v".into(), vec![3.0, 7.0, 7.0, 1.0]),
                ("id".into(), vec![0.0, 1.0, 2.0, 3.0]),
            ],
            None,
        )
        .unwrap();
        let r = ref_top_k(&ds, TopKKey::Column("v"), 2, Direction::Highest, "t").unwrap();
        // both 7s tie; the earlier rows (ids 1 and 2) win and keep order
        assert_eq!(r.column("id").unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn k_out_of_range_errors() {
        let ds = toy_dataset();
        assert!(ref_top_k(&ds, TopKKey::Column("a"), 0, Direction::Highest, "t").is_err());
        assert!(ref_top_k(&ds, TopKKey::Column("a"), 5, Direction::Highest, "t").is_err());
    }

    #[test]
    fn gaussian_point_mass_is_exact() {
        let r = ref_gaussian(
            &[("savings".into(), 75.0, 0.0), ("wages".into(), 60.0, 0.0)],
            1,
            1,
            "paid",
        )
        .unwrap();
        assert_eq!(r.rows().row(0), &[75.0, 60.0]);
    }

    #[test]
    fn gaussian_is_deterministic() {
        let a = ref_gaussian(&[("x".into(), 0.0, 1.0)], 64, 9, "g").unwrap();
        let b = ref_gaussian(&[("x".into(), 0.0, 1.0)], 64, 9, "g").unwrap();
        assert_eq!(a.column("x").unwrap(), b.column("x").unwrap());
    }

    // Oracle: CLT bound, 4 standard errors at n = 10_000.
    #[test]
    fn gaussian_sample_mean_concentrates() {
        let n = 10_000;
        let r = ref_gaussian(
            &[("u".into(), 25.0, 5.0), ("v".into(), 40.0, 5.0)],
            n,
            17,
            "g",
        )
        .unwrap();
        for (name, mean) in [("u", 25.0), ("v", 40.0)] {
            let values = r.column(name).unwrap();
            let sample_mean = values.iter().sum::<f64>() / n as f64;
            let bound = 4.0 * 5.0 / (n as f64).sqrt();
            assert!(
                (sample_mean - mean).abs() < bound,
                "{name}: |{sample_mean} - {mean}| >= {bound}"
            );
        }
    }

    #[test]
    fn gaussian_rejects_negative_std() {
        assert!(ref_gaussian(&[("x".into(), 0.0, -1.0)], 1, 0, "g").is_err());
    }

    #[test]
    fn baseline_single_row_is_model_score() {
        let model = linear_model(
            &[("wages".into(), 5.0 / 3.0), ("savings".into(), 2.0 / 3.0)],
            0.0,
        )
        .unwrap();
        let r = ref_gaussian(
            &[("savings".into(), 75.0, 0.0), ("wages".into(), 60.0, 0.0)],
            1,
            0,
            "paid",
        )
        .unwrap();
        // 5/3 * 60 + 2/3 * 75 = 150
        assert_relative_eq!(baseline(&model, &r).unwrap(), 150.0, epsilon = 1e-12);
    }

    #[test]
    fn baseline_is_weight_normalized() {
        let model = linear_model(&[("x".into(), 1.0)], 0.0).unwrap();
        let uniform = ReferenceSample::new(
            vec!["x".into()],
            Matrix::from_rows(&[vec![1.0], vec![3.0]]).unwrap(),
            None,
            "u",
            "test",
        )
        .unwrap();
        let duplicated = ReferenceSample::new(
            vec!["x".into()],
            Matrix::from_rows(&[vec![1.0], vec![1.0], vec![3.0], vec![3.0]]).unwrap(),
            Some(vec![0.5, 0.5, 0.5, 0.5]),
            "d",
            "test",
        )
        .unwrap();
        assert_relative_eq!(
            baseline(&model, &uniform).unwrap(),
            baseline(&model, &duplicated).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn baseline_feature_mismatch_names_missing() {
        let model = linear_model(&[("z".into(), 1.0)], 0.0).unwrap();
        let r = ref_gaussian(&[("x".into(), 0.0, 0.0)], 1, 0, "g").unwrap();
        match baseline(&model, &r) {
            Err(Error::FeatureMismatch { missing }) => assert_eq!(missing, vec!["z".to_string()]),
            other => panic!("expected mismatch, got {other:?}"),
        }
    }

    #[test]
    fn weights_must_be_positive() {
        let m = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(ReferenceSample::new(vec!["x".into()], m, Some(vec![0.0]), "w", "test").is_err());
    }
}
