//! Reference-aware model explanations.
//!
//! Every explanation in this crate is computed against an explicit
//! [`ReferenceSample`] — a concrete, weighted, labeled set of rows. There
//! is no default context: attributions, profiles and importance ratios all
//! name the data they were derived from, because the same model and the
//! same instance yield different (and differently meaningful) explanations
//! under different reference distributions.

pub mod contrast;
pub mod data;
pub mod error;
pub mod explain;
pub mod model;
pub mod reference;
pub mod rng;

pub use contrast::{
    compare_attributions, compare_profiles, drift_report, spearman, ContrastInput, ContrastReport,
    CurveDistance, DriftReport, DriftSettings, FeatureContrast, FeatureDrift, PerformanceNote,
};
pub use data::{
    column_stats, filter_rows, ks_distance, load_csv, permute_column, wasserstein1, write_csv,
    Clause, ColumnStats, Comparator, CsvOptions, Dataset, MissingPolicy, RowPredicate,
};
pub use error::{Error, Result};
pub use explain::{
    ale, breakdown, ice, make_grid, pdp, permutation_importance, shapley_exact, shapley_sampled,
    AttributionMethod, AttributionSet, GridStrategy, ImportanceTable, NamedRow, Profile,
    ProfileKind, MAX_EXACT_FEATURES,
};
pub use model::{
    evaluate_loss, external_predictor, fit_boosted_stumps, fit_logistic, fit_tree, linear_model,
    matrix_from_dataset, predict_dataset, BoostHyper, BoostedStumps, ExternalPredictor,
    LinearModel, LogisticHyper, LogisticModel, LossFn, Matrix, Predictor, RegressionTree,
    TreeHyper,
};
pub use reference::{
    baseline, ref_from_dataset, ref_from_filter, ref_gaussian, ref_top_k, Direction,
    ReferenceSample, TopKKey,
};
