//! Tabular datasets: named numeric columns, row filtering, column
//! statistics, distribution distances and seeded column permutation.
//!
//! Columns are numeric only; categorical data must be integer-coded before
//! ingestion. Every value is finite once a [`Dataset`] exists.

mod csv_io;
mod distance;
mod stats;

pub use csv_io::{load_csv, write_csv, CsvOptions, MissingPolicy};
pub use distance::{ks_distance, wasserstein1};
pub use stats::{column_stats, quantile_sorted, ColumnStats};

use crate::error::{Error, Result};
use crate::rng;
use rand::seq::SliceRandom;

/// A named numeric column.
#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// Immutable table of named numeric columns, optionally with one column
/// designated as the prediction target.
///
/// Invariants, checked at construction:
/// - at least one column, all of identical length ≥ 1;
/// - column names unique and non-empty;
/// - every value finite.
#[derive(Debug, Clone)]
pub struct Dataset {
    columns: Vec<Column>,
    target_name: Option<String>,
}

impl Dataset {
    /// Build a dataset from `(name, values)` pairs.
    pub fn new(columns: Vec<(String, Vec<f64>)>, target: Option<&str>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyInput("dataset has no columns".into()));
        }
        let n_rows = columns[0].1.len();
        if n_rows == 0 {
            return Err(Error::EmptyInput("dataset has no rows".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for (name, values) in &columns {
            if name.is_empty() {
                return Err(Error::invalid("empty column name"));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
            if values.len() != n_rows {
                return Err(Error::invalid(format!(
                    "column {name:?} has {} values, expected {n_rows}",
                    values.len()
                )));
            }
            if let Some(row) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    column: name.clone(),
                    row,
                });
            }
        }
        let columns = columns
            .into_iter()
            .map(|(name, values)| Column { name, values })
            .collect();
        let mut ds = Dataset {
            columns,
            target_name: None,
        };
        if let Some(t) = target {
            ds.set_target(t)?;
        }
        Ok(ds)
    }

    /// Internal constructor for row subsets of an already-validated dataset.
    /// Unlike [`Dataset::new`], the result may have zero rows.
    pub(crate) fn from_validated(columns: Vec<Column>, target_name: Option<String>) -> Self {
        Dataset {
            columns,
            target_name,
        }
    }

    /// Mark an existing column as the target.
    pub fn set_target(&mut self, name: &str) -> Result<()> {
        if !self.columns.iter().any(|c| c.name == name) {
            return Err(Error::UnknownColumn(name.to_string()));
        }
        self.target_name = Some(name.to_string());
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    /// Number of feature columns (the target, when set, is not a feature).
    pub fn n_features(&self) -> usize {
        self.columns.len() - usize::from(self.target_name.is_some())
    }

    pub fn target_name(&self) -> Option<&str> {
        self.target_name.as_deref()
    }

    /// Target values, if a target column is set.
    pub fn target(&self) -> Option<&[f64]> {
        let name = self.target_name.as_deref()?;
        self.column(name).ok()
    }

    /// All column names in order, including the target.
    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    /// Feature column names in order (target excluded).
    pub fn feature_names(&self) -> Vec<String> {
        self.columns
            .iter()
            .filter(|c| Some(c.name.as_str()) != self.target_name.as_deref())
            .map(|c| c.name.clone())
            .collect()
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub(crate) fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub(crate) fn columns(&self) -> &[Column] {
        &self.columns
    }

    /// One row as a vector over all columns (target included), in column order.
    pub fn row(&self, index: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c.values[index]).collect()
    }
}

/// Comparison operator of a predicate clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Comparator {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Comparator::Lt => value < threshold,
            Comparator::Le => value <= threshold,
            Comparator::Eq => value == threshold,
            Comparator::Ge => value >= threshold,
            Comparator::Gt => value > threshold,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
        }
    }
}

impl std::str::FromStr for Comparator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "<" => Ok(Comparator::Lt),
            "<=" => Ok(Comparator::Le),
            "=" | "==" => Ok(Comparator::Eq),
            ">=" => Ok(Comparator::Ge),
            ">" => Ok(Comparator::Gt),
            other => Err(Error::invalid(format!("unknown comparator {other:?}"))),
        }
    }
}

/// One atomic condition on a column.
#[derive(Debug, Clone)]
pub struct Clause {
    pub column: String,
    pub comparator: Comparator,
    pub threshold: f64,
}

/// Conjunction of atomic clauses; a row matches when every clause holds.
#[derive(Debug, Clone)]
pub struct RowPredicate {
    clauses: Vec<Clause>,
}

impl RowPredicate {
    pub fn new(clauses: Vec<Clause>) -> Result<Self> {
        if clauses.is_empty() {
            return Err(Error::EmptyInput(
                "predicate needs at least one clause".into(),
            ));
        }
        Ok(RowPredicate { clauses })
    }

    /// Single-clause predicate.
    pub fn clause(column: impl Into<String>, comparator: Comparator, threshold: f64) -> Self {
        RowPredicate {
            clauses: vec![Clause {
                column: column.into(),
                comparator,
                threshold,
            }],
        }
    }

    /// Conjoin another clause.
    pub fn and(
        mut self,
        column: impl Into<String>,
        comparator: Comparator,
        threshold: f64,
    ) -> Self {
        self.clauses.push(Clause {
            column: column.into(),
            comparator,
            threshold,
        });
        self
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Check that every referenced column exists in `ds`.
    pub fn validate(&self, ds: &Dataset) -> Result<()> {
        for clause in &self.clauses {
            ds.column(&clause.column)?;
        }
        Ok(())
    }

    fn matches(&self, ds: &Dataset, row: usize) -> bool {
        self.clauses.iter().all(|clause| {
            let values = ds.column(&clause.column).expect("validated column");
            clause.comparator.holds(values[row], clause.threshold)
        })
    }

    /// Human-readable form, e.g. `a >= 2 and b < 5`.
    pub fn describe(&self) -> String {
        self.clauses
            .iter()
            .map(|c| format!("{} {} {}", c.column, c.comparator.symbol(), c.threshold))
            .collect::<Vec<_>>()
            .join(" and ")
    }
}

/// Rows of `ds` satisfying `pred`, preserving column order and relative row
/// order. The result may be empty; callers decide whether that is an error.
pub fn filter_rows(ds: &Dataset, pred: &RowPredicate) -> Result<Dataset> {
    pred.validate(ds)?;
    let keep: Vec<usize> = (0..ds.n_rows()).filter(|&r| pred.matches(ds, r)).collect();
    let columns = ds
        .columns
        .iter()
        .map(|c| Column {
            name: c.name.clone(),
            values: keep.iter().map(|&r| c.values[r]).collect(),
        })
        .collect();
    Ok(Dataset::from_validated(columns, ds.target_name.clone()))
}

/// New dataset identical to `ds` except that `col`'s values are uniformly
/// permuted, deterministically from `seed`. Every other column is untouched.
pub fn permute_column(ds: &Dataset, col: &str, seed: u64) -> Result<Dataset> {
    let idx = ds.column_index(col)?;
    if ds.n_rows() < 2 {
        return Err(Error::invalid("permute_column needs at least 2 rows"));
    }
    let mut columns = ds.columns.clone();
    let mut rng = rng::rng_from(seed);
    columns[idx].values.shuffle(&mut rng);
    Ok(Dataset::from_validated(columns, ds.target_name.clone()))
}
