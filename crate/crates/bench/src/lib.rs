//! Shared fixtures for the benchmark targets.

use refx_core::{
    fit_boosted_stumps, ref_gaussian, BoostHyper, BoostedStumps, Dataset, NamedRow, ReferenceSample,
};

/// Deterministic synthetic regression data over `p` features.
pub fn synthetic_dataset(n_rows: usize, p: usize) -> Dataset {
    let mut columns: Vec<(String, Vec<f64>)> = (0..p)
        .map(|j| {
            let values = (0..n_rows)
                .map(|i| ((i * (j + 3) * 2654435761) % 1000) as f64 / 100.0 - 5.0)
                .collect();
            (format!("f{j}"), values)
        })
        .collect();
    let y: Vec<f64> = (0..n_rows)
        .map(|i| {
            let row: Vec<f64> = columns.iter().map(|(_, v)| v[i]).collect();
            row[0] * 0.8 + row[1 % p] * row[2 % p] * 0.1
        })
        .collect();
    columns.push(("y".into(), y));
    Dataset::new(columns, Some("y")).unwrap()
}

pub fn boosted_model(ds: &Dataset) -> BoostedStumps {
    fit_boosted_stumps(
        ds,
        &BoostHyper {
            n_trees: 30,
            lr: 0.3,
            max_depth: 2,
        },
    )
    .unwrap()
}

pub fn gaussian_reference(p: usize, n: usize) -> ReferenceSample {
    let spec: Vec<(String, f64, f64)> = (0..p).map(|j| (format!("f{j}"), 0.0, 2.0)).collect();
    ref_gaussian(&spec, n, 99, "bench").unwrap()
}

pub fn instance(p: usize) -> NamedRow {
    NamedRow {
        names: (0..p).map(|j| format!("f{j}")).collect(),
        values: (0..p).map(|j| j as f64 * 0.5 - 1.0).collect(),
    }
}
