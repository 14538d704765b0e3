//! Execution engine: build the model and references from a config, run
//! explanation requests, and write artifacts plus a manifest.
//!
//! Independent requests may run concurrently; every artifact is a pure
//! function of (config, seed), artifacts land in their own files via
//! write-temp-then-rename, and the manifest is written last, so outputs
//! are byte-identical across runs and thread counts.

use crate::artifact::{emit_json, Artifact, ReferenceInfo};
use crate::config::{
    is_stochastic, request_stem, GaussianFeature, InstanceSpec, ReferenceSpec, RequestSpec,
    RunConfig,
};
use crate::svg;
use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use refx_core::{
    ale, breakdown, compare_attributions, drift_report, ice, make_grid, pdp,
    permutation_importance, ref_from_dataset, ref_from_filter, ref_gaussian, ref_top_k,
    shapley_exact, shapley_sampled, Clause, Comparator, CsvOptions, Dataset, Direction,
    DriftSettings, GridStrategy, LossFn, Matrix, MissingPolicy, NamedRow, Predictor,
    ReferenceSample, RowPredicate, TopKKey,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Everything a run needs, built once from a validated config.
pub struct Workspace {
    pub config: RunConfig,
    pub config_path: PathBuf,
    pub datasets: BTreeMap<String, Dataset>,
    pub model: Box<dyn Predictor>,
    pub references: BTreeMap<String, ReferenceSample>,
}

/// One line of the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub method: String,
    pub reference: String,
    pub seed: Option<u64>,
    /// Companion SVG renderings, when requested.
    #[serde(default)]
    pub svgs: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub toolkit_version: String,
    pub seed: Option<u64>,
    pub artifacts: Vec<ManifestEntry>,
}

/// Result of executing requests: written entries plus any failures.
pub struct RunOutcome {
    pub manifest_path: PathBuf,
    pub entries: Vec<ManifestEntry>,
    pub failures: Vec<(String, String)>,
}

struct Rendered {
    stem: String,
    method: String,
    reference_label: String,
    seed: Option<u64>,
    json: Vec<u8>,
    svg: Option<Vec<u8>>,
}

impl Workspace {
    /// Load datasets, train or launch the model, and materialize every
    /// reference of a validated config.
    pub fn build(config: RunConfig, config_path: &Path) -> Result<Workspace> {
        let mut datasets = BTreeMap::new();
        for (key, spec) in &config.data {
            let path = config.resolve_data_path(config_path, &spec.path);
            let on_missing = match spec.on_missing.as_deref() {
                None | Some("reject") => MissingPolicy::Reject,
                Some("drop_row") => MissingPolicy::DropRow,
                Some(other) => {
                    bail!("data.{key}.on_missing: unknown policy {other:?} (reject, drop_row)")
                }
            };
            let options = CsvOptions {
                has_header: spec.has_header,
                target: spec.target.clone(),
                on_missing,
            };
            let ds = refx_core::load_csv(&path, &options)
                .with_context(|| format!("data.{key}: loading {}", path.display()))?;
            datasets.insert(key.clone(), ds);
        }

        let model = build_model(&config, &datasets)?;
        let mut references = BTreeMap::new();
        for (i, spec) in config.references.iter().enumerate() {
            let reference = build_reference(spec, &datasets, model.as_ref(), config.seed)
                .with_context(|| format!("reference[{i}] ({:?})", spec.label))?;
            references.insert(spec.label.clone(), reference);
        }
        Ok(Workspace {
            config,
            config_path: config_path.to_path_buf(),
            datasets,
            model,
            references,
        })
    }

    pub fn reference(&self, label: &str) -> Result<&ReferenceSample> {
        self.references
            .get(label)
            .ok_or_else(|| anyhow!("reference label {label:?} is not defined"))
    }

    pub fn dataset(&self, key: &str) -> Result<&Dataset> {
        self.datasets
            .get(key)
            .ok_or_else(|| anyhow!("dataset {key:?} is not defined under [data]"))
    }

    /// Resolve an instance selector to a named row.
    pub fn instance(&self, spec: &InstanceSpec) -> Result<(NamedRow, String)> {
        if let (Some(key), Some(row)) = (&spec.data, &spec.row) {
            let ds = self.dataset(key)?;
            if *row >= ds.n_rows() {
                bail!(
                    "instance row {row} out of range: dataset {key:?} has {} rows",
                    ds.n_rows()
                );
            }
            let names = ds.feature_names();
            let values = names
                .iter()
                .map(|n| ds.column(n).expect("validated")[*row])
                .collect();
            return Ok((NamedRow { names, values }, format!("{key}[{row}]")));
        }
        let values = spec
            .values
            .as_ref()
            .ok_or_else(|| anyhow!("instance selector has neither (data, row) nor values"))?;
        let names: Vec<String> = values.keys().cloned().collect();
        let row = NamedRow {
            values: names.iter().map(|n| values[n]).collect(),
            names,
        };
        let desc: Vec<String> = row
            .names
            .iter()
            .zip(&row.values)
            .map(|(n, v)| format!("{n}={v}"))
            .collect();
        Ok((row, format!("inline{{{}}}", desc.join(", "))))
    }
}

fn build_model(
    config: &RunConfig,
    datasets: &BTreeMap<String, Dataset>,
) -> Result<Box<dyn Predictor>> {
    let m = &config.model;
    let train = |key: &Option<String>| -> Result<&Dataset> {
        let key = key.as_deref().expect("validated");
        datasets
            .get(key)
            .ok_or_else(|| anyhow!("model.data: dataset {key:?} missing"))
    };
    let model: Box<dyn Predictor> = match m.kind.as_str() {
        "linear" => {
            let coefs: Vec<(String, f64)> = m
                .coefficients
                .as_ref()
                .expect("validated")
                .iter()
                .map(|c| (c.name.clone(), c.value))
                .collect();
            Box::new(refx_core::linear_model(&coefs, m.intercept.unwrap_or(0.0))?)
        }
        "logistic" => {
            let hyper = refx_core::LogisticHyper {
                lr: m.lr.unwrap_or(0.1),
                iters: m.iters.unwrap_or(500),
                l2: m.l2.unwrap_or(0.0),
            };
            Box::new(refx_core::fit_logistic(train(&m.data)?, &hyper)?)
        }
        "tree" => {
            let hyper = refx_core::TreeHyper {
                max_depth: m.max_depth.unwrap_or(4),
                min_leaf: m.min_leaf.unwrap_or(1),
            };
            Box::new(refx_core::fit_tree(train(&m.data)?, &hyper)?)
        }
        "boosted_stumps" => {
            let hyper = refx_core::BoostHyper {
                n_trees: m.n_trees.unwrap_or(100),
                lr: m.lr.unwrap_or(0.1),
                max_depth: m.max_depth.unwrap_or(2),
            };
            Box::new(refx_core::fit_boosted_stumps(train(&m.data)?, &hyper)?)
        }
        "external" => {
            let command = m.command.as_ref().expect("validated");
            let features = m.features.clone().expect("validated");
            Box::new(refx_core::external_predictor(command, features)?)
        }
        other => bail!("model.kind: unknown kind {other:?}"),
    };
    Ok(model)
}

fn predicate_from(clauses: &[crate::config::ClauseSpec]) -> Result<RowPredicate> {
    let parsed: Result<Vec<Clause>> = clauses
        .iter()
        .map(|c| {
            Ok(Clause {
                column: c.column.clone(),
                comparator: c.op.parse::<Comparator>().map_err(|e| anyhow!("{e}"))?,
                threshold: c.value,
            })
        })
        .collect();
    Ok(RowPredicate::new(parsed?)?)
}

fn gaussian_spec_string(features: &[GaussianFeature], n: usize, seed: u64) -> String {
    let parts: Vec<String> = features
        .iter()
        .map(|f| format!("{}~N({},{})", f.name, f.mean, f.std))
        .collect();
    format!(
        "source=gaussian n={n} seed={seed} features=[{}]",
        parts.join(", ")
    )
}

fn build_reference(
    spec: &ReferenceSpec,
    datasets: &BTreeMap<String, Dataset>,
    model: &dyn Predictor,
    global_seed: Option<u64>,
) -> Result<ReferenceSample> {
    let data = |key: &'_ Option<String>| -> Result<(String, &Dataset)> {
        let key = key.as_deref().expect("validated");
        Ok((
            key.to_string(),
            datasets
                .get(key)
                .ok_or_else(|| anyhow!("dataset {key:?} missing"))?,
        ))
    };
    let reference = match spec.source.as_str() {
        "dataset" => {
            let (key, ds) = data(&spec.data)?;
            ref_from_dataset(ds, spec.label.clone())?
                .with_source(format!("source=dataset data={key} rows={}", ds.n_rows()))
        }
        "filter" => {
            let (key, ds) = data(&spec.data)?;
            let predicate = predicate_from(spec.r#where.as_ref().expect("validated"))?;
            let built = ref_from_filter(ds, &predicate, spec.label.clone())?;
            let rows = built.n_rows();
            built.with_source(format!(
                "source=filter data={key} where=[{}] rows={rows}",
                predicate.describe()
            ))
        }
        "topk" => {
            let (key, ds) = data(&spec.data)?;
            let k = spec.k.expect("validated");
            let direction = match spec.direction.as_deref() {
                None | Some("highest") => Direction::Highest,
                Some("lowest") => Direction::Lowest,
                Some(other) => bail!("direction: unknown {other:?}"),
            };
            let rank_key = spec.key.as_deref().expect("validated");
            let top_key = if rank_key == "@model" {
                TopKKey::Predictor(model)
            } else {
                TopKKey::Column(rank_key)
            };
            let built = ref_top_k(ds, top_key, k, direction, spec.label.clone())?;
            let dir = match direction {
                Direction::Highest => "highest",
                Direction::Lowest => "lowest",
            };
            built.with_source(format!(
                "source=topk data={key} key={rank_key} k={k} direction={dir}"
            ))
        }
        "gaussian" => {
            let features = spec.features.as_ref().expect("validated");
            let n = spec.n.expect("validated");
            let seed = spec.seed.or(global_seed).expect("validated");
            let triples: Vec<(String, f64, f64)> = features
                .iter()
                .map(|f| (f.name.clone(), f.mean, f.std))
                .collect();
            ref_gaussian(&triples, n, seed, spec.label.clone())?
                .with_source(gaussian_spec_string(features, n, seed))
        }
        other => bail!("source: unknown {other:?}"),
    };
    Ok(reference)
}

fn grid_for(reference: &ReferenceSample, req: &RequestSpec, feature: &str) -> Result<Vec<f64>> {
    let strategy = match req.grid.as_deref() {
        None | Some("quantile") => GridStrategy::Quantile,
        Some("equidistant") => GridStrategy::Equidistant,
        Some(other) => bail!("grid: unknown strategy {other:?}"),
    };
    Ok(make_grid(
        reference,
        feature,
        strategy,
        req.grid_points.unwrap_or(21),
    )?)
}

fn execute_request(workspace: &Workspace, index: usize, req: &RequestSpec) -> Result<Rendered> {
    let stem = request_stem(index, req);
    let model = &workspace.model;
    let global_seed = workspace.config.seed;
    let request_seed = req.seed.or(global_seed);
    let effective_seed = if is_stochastic(&req.method) {
        request_seed
    } else {
        None
    };

    let (artifact, info): (Artifact, ReferenceInfo) = match req.method.as_str() {
        "shapley_exact" | "shapley_sampled" | "breakdown" => {
            let reference = workspace.reference(req.reference.as_deref().expect("validated"))?;
            let (instance, _) = workspace.instance(req.instance.as_ref().expect("validated"))?;
            let set = match req.method.as_str() {
                "shapley_exact" => {
                    shapley_exact(model, reference, &instance, req.features.as_deref())?
                }
                "shapley_sampled" => shapley_sampled(
                    model,
                    reference,
                    &instance,
                    req.n_permutations.unwrap_or(2000),
                    effective_seed.expect("validated"),
                )?,
                _ => {
                    let order = req
                        .order
                        .clone()
                        .unwrap_or_else(|| model.feature_names().to_vec());
                    breakdown(model, reference, &instance, &order)?
                }
            };
            (Artifact::Attribution(set), ReferenceInfo::of(reference))
        }
        "pdp" | "ale" => {
            let reference = workspace.reference(req.reference.as_deref().expect("validated"))?;
            let feature = req.feature.as_deref().expect("validated");
            let profile = if req.method == "pdp" {
                let grid = grid_for(reference, req, feature)?;
                pdp(model, reference, feature, &grid)?
            } else {
                ale(model, reference, feature, req.bins.unwrap_or(10))?
            };
            (Artifact::Profile(profile), ReferenceInfo::of(reference))
        }
        "ice" => {
            let reference = workspace.reference(req.reference.as_deref().expect("validated"))?;
            let feature = req.feature.as_deref().expect("validated");
            let (instance, desc) = workspace.instance(req.instance.as_ref().expect("validated"))?;
            let grid = grid_for(reference, req, feature)?;
            let row = ReferenceSample::new(
                instance.names.clone(),
                Matrix::from_rows(std::slice::from_ref(&instance.values))?,
                None,
                desc.clone(),
                desc,
            )?;
            let curves = ice(model, &row, feature, &grid)?;
            let profile = curves.into_iter().next().expect("one instance, one curve");
            (Artifact::Profile(profile), ReferenceInfo::of(reference))
        }
        "importance" => {
            let key = req.data.as_deref().expect("validated");
            let ds = workspace.dataset(key)?;
            let loss: LossFn = req
                .loss
                .as_deref()
                .unwrap_or("mse")
                .parse()
                .map_err(|e| anyhow!("{e}"))?;
            let features = req.features.clone().unwrap_or_else(|| ds.feature_names());
            let table = permutation_importance(
                model,
                ds,
                loss,
                &features,
                req.repeats.unwrap_or(10),
                effective_seed.expect("validated"),
            )?;
            let spec_path = &workspace.config.data[key].path;
            let info = ReferenceInfo {
                label: format!("data:{key}"),
                n_rows: ds.n_rows(),
                spec: format!("source=dataset data={key} path={spec_path}"),
            };
            (Artifact::Importance(table), info)
        }
        other => bail!("method: unknown {other:?}"),
    };

    let svg_bytes = if req.svg {
        Some(match &artifact {
            Artifact::Attribution(set) => svg::attribution_svg(set)?,
            Artifact::Profile(profile) => svg::profiles_svg(std::slice::from_ref(profile))?,
            _ => bail!("svg: only attribution and profile artifacts render to SVG"),
        })
    } else {
        None
    };

    let json = emit_json(&req.method, &info, effective_seed, &artifact);
    Ok(Rendered {
        stem,
        method: req.method.clone(),
        reference_label: info.label,
        seed: effective_seed,
        json,
        svg: svg_bytes,
    })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .ok_or_else(|| anyhow!("artifact path {} has no parent", path.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Execute every request of the workspace's config and write artifacts
/// plus the manifest under `out_dir`. Returns the outcome; failed requests
/// do not abort the others, but they surface in `failures` and the
/// manifest stays partial.
pub fn run(workspace: &Workspace, out_dir: &Path, threads: Option<usize>) -> Result<RunOutcome> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    let requests: Vec<(usize, &RequestSpec)> =
        workspace.config.requests.iter().enumerate().collect();
    let results: Vec<(usize, Result<Rendered>)> = match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building thread pool")?;
            pool.install(|| {
                requests
                    .par_iter()
                    .map(|(i, req)| (*i, execute_request(workspace, *i, req)))
                    .collect()
            })
        }
        None => requests
            .par_iter()
            .map(|(i, req)| (*i, execute_request(workspace, *i, req)))
            .collect(),
    };

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (index, result) in results {
        let req = &workspace.config.requests[index];
        match result {
            Ok(rendered) => {
                let json_name = format!("{}.json", rendered.stem);
                write_atomic(&out_dir.join(&json_name), &rendered.json)?;
                let mut svgs = Vec::new();
                if let Some(svg_bytes) = &rendered.svg {
                    let svg_name = format!("{}.svg", rendered.stem);
                    write_atomic(&out_dir.join(&svg_name), svg_bytes)?;
                    svgs.push(svg_name);
                }
                entries.push(ManifestEntry {
                    file: json_name,
                    method: rendered.method,
                    reference: rendered.reference_label,
                    seed: rendered.seed,
                    svgs,
                });
            }
            Err(e) => failures.push((request_stem(index, req), format!("{e:#}"))),
        }
    }

    let manifest = Manifest {
        schema_version: 1,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: workspace.config.seed,
        artifacts: entries.clone(),
    };
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest)?;
    manifest_bytes.push(b'\n');
    let manifest_path = out_dir.join("manifest.json");
    write_atomic(&manifest_path, &manifest_bytes)?;

    Ok(RunOutcome {
        manifest_path,
        entries,
        failures,
    })
}

/// Compute attributions for one instance under several references and
/// write a contrast artifact.
#[allow(clippy::too_many_arguments)]
pub fn run_contrast(
    workspace: &Workspace,
    method: &str,
    labels: &[String],
    instance_spec: &InstanceSpec,
    tolerance: Option<f64>,
    n_permutations: usize,
    seed: Option<u64>,
    out_dir: &Path,
    render_svg: bool,
) -> Result<RunOutcome> {
    if labels.len() < 2 {
        bail!("--references: contrast needs at least 2 reference labels");
    }
    let (instance, _) = workspace.instance(instance_spec)?;
    let model = &workspace.model;
    let mut sets = Vec::new();
    let mut infos = Vec::new();
    for label in labels {
        let reference = workspace.reference(label)?;
        let set = match method {
            "shapley_exact" => shapley_exact(model, reference, &instance, None)?,
            "shapley_sampled" => shapley_sampled(
                model,
                reference,
                &instance,
                n_permutations,
                seed.ok_or_else(|| anyhow!("--seed: required for shapley_sampled"))?,
            )?,
            "breakdown" => {
                let order = model.feature_names().to_vec();
                breakdown(model, reference, &instance, &order)?
            }
            other => bail!("--method: unknown attribution method {other:?}"),
        };
        infos.push(ReferenceInfo::of(reference));
        sets.push(set);
    }
    let report = compare_attributions(&sets, tolerance)?;

    std::fs::create_dir_all(out_dir)?;
    let combined = ReferenceInfo {
        label: labels.join("+"),
        n_rows: infos.iter().map(|i| i.n_rows).sum(),
        spec: infos
            .iter()
            .map(|i| format!("{}: {}", i.label, i.spec))
            .collect::<Vec<_>>()
            .join("; "),
    };
    let effective_seed = if method == "shapley_sampled" {
        seed
    } else {
        None
    };
    let json = emit_json(
        "contrast",
        &combined,
        effective_seed,
        &Artifact::Contrast(report),
    );
    let stem = format!("contrast_{}", labels.join("_"));
    write_atomic(&out_dir.join(format!("{stem}.json")), &json)?;
    let mut svgs = Vec::new();
    if render_svg {
        // one bar chart per reference, sharing the instance
        for (set, label) in sets.iter().zip(labels) {
            let bytes = svg::attribution_svg(set)?;
            let name = format!("{stem}_{label}.svg");
            write_atomic(&out_dir.join(&name), &bytes)?;
            svgs.push(name);
        }
    }
    let entries = vec![ManifestEntry {
        file: format!("{stem}.json"),
        method: "contrast".into(),
        reference: combined.label.clone(),
        seed: effective_seed,
        svgs,
    }];
    let manifest = Manifest {
        schema_version: 1,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: workspace.config.seed,
        artifacts: entries.clone(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    let manifest_path = out_dir.join("manifest.json");
    write_atomic(&manifest_path, &bytes)?;
    Ok(RunOutcome {
        manifest_path,
        entries,
        failures: vec![],
    })
}

/// Compare marginals and explanations between two datasets and write a
/// drift artifact. Dataset arguments may be config data keys or CSV paths.
#[allow(clippy::too_many_arguments)]
pub fn run_drift(
    workspace: &Workspace,
    data_a: &str,
    data_b: &str,
    features: Option<Vec<String>>,
    grid_points: Option<usize>,
    bins: Option<usize>,
    kappa: Option<f64>,
    delta: Option<f64>,
    out_dir: &Path,
) -> Result<RunOutcome> {
    let resolve = |arg: &str| -> Result<(String, Dataset)> {
        if let Ok(ds) = workspace.dataset(arg) {
            return Ok((format!("data:{arg}"), ds.clone()));
        }
        let ds = refx_core::load_csv(Path::new(arg), &CsvOptions::default())
            .with_context(|| format!("loading {arg}"))?;
        Ok((arg.to_string(), ds))
    };
    let (label_a, ds_a) = resolve(data_a)?;
    let (label_b, ds_b) = resolve(data_b)?;
    let features = match features {
        Some(f) if !f.is_empty() => f,
        _ => ds_a.feature_names(),
    };
    let defaults = DriftSettings::default();
    let settings = DriftSettings {
        label_a: label_a.clone(),
        label_b: label_b.clone(),
        grid_points: grid_points.unwrap_or(defaults.grid_points),
        ale_bins: bins.unwrap_or(defaults.ale_bins),
        kappa: kappa.unwrap_or(defaults.kappa),
        delta,
        loss: defaults.loss,
    };
    let report = drift_report(&workspace.model, &ds_a, &ds_b, &features, &settings)?;

    std::fs::create_dir_all(out_dir)?;
    let info = ReferenceInfo {
        label: format!("{label_a} vs {label_b}"),
        n_rows: ds_a.n_rows() + ds_b.n_rows(),
        spec: format!("a={data_a}; b={data_b}"),
    };
    let json = emit_json("drift", &info, None, &Artifact::Drift(report));
    write_atomic(&out_dir.join("drift.json"), &json)?;
    let entries = vec![ManifestEntry {
        file: "drift.json".into(),
        method: "drift".into(),
        reference: info.label.clone(),
        seed: None,
        svgs: vec![],
    }];
    let manifest = Manifest {
        schema_version: 1,
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: workspace.config.seed,
        artifacts: entries.clone(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    let manifest_path = out_dir.join("manifest.json");
    write_atomic(&manifest_path, &bytes)?;
    Ok(RunOutcome {
        manifest_path,
        entries,
        failures: vec![],
    })
}
