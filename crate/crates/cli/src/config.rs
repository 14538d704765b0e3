//! Run-configuration file: a single TOML document naming the model, the
//! datasets, the reference samples and the explanation requests.
//!
//! The exact grammar is documented in the repository README. Validation
//! errors name the offending section and field.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Config schema version; only 1 exists.
    #[serde(default = "default_version")]
    pub version: u32,
    /// Global default seed for stochastic work.
    pub seed: Option<u64>,
    /// Output directory for artifacts and the manifest.
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    /// Named datasets, loaded from CSV.
    #[serde(default)]
    pub data: BTreeMap<String, DataSpec>,
    pub model: ModelSpec,
    #[serde(default, rename = "reference")]
    pub references: Vec<ReferenceSpec>,
    #[serde(default, rename = "request")]
    pub requests: Vec<RequestSpec>,
}

fn default_version() -> u32 {
    1
}

fn default_out_dir() -> String {
    "artifacts".into()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub path: String,
    #[serde(default = "default_true")]
    pub has_header: bool,
    pub target: Option<String>,
    /// "reject" (default) or "drop_row".
    #[serde(default)]
    pub on_missing: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// linear | logistic | tree | boosted_stumps | external
    pub kind: String,
    // linear
    pub coefficients: Option<Vec<NamedValue>>,
    pub intercept: Option<f64>,
    // trainable kinds
    pub data: Option<String>,
    pub lr: Option<f64>,
    pub iters: Option<usize>,
    pub l2: Option<f64>,
    pub max_depth: Option<usize>,
    pub min_leaf: Option<usize>,
    pub n_trees: Option<usize>,
    // external
    pub command: Option<Vec<String>>,
    pub features: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClauseSpec {
    pub column: String,
    /// One of `<`, `<=`, `=`, `>=`, `>`.
    pub op: String,
    pub value: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianFeature {
    pub name: String,
    pub mean: f64,
    #[serde(default)]
    pub std: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    pub label: String,
    /// dataset | filter | topk | gaussian
    pub source: String,
    pub data: Option<String>,
    /// Conjunction of clauses (filter source).
    pub r#where: Option<Vec<ClauseSpec>>,
    /// Ranking column, or "@model" for the model score (topk source).
    pub key: Option<String>,
    pub k: Option<usize>,
    /// highest (default) | lowest
    pub direction: Option<String>,
    /// Independent Gaussian coordinates (gaussian source).
    pub features: Option<Vec<GaussianFeature>>,
    pub n: Option<usize>,
    pub seed: Option<u64>,
}

/// Instance selector: a row of a named dataset, or inline values.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub data: Option<String>,
    pub row: Option<usize>,
    pub values: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestSpec {
    /// Artifact file stem; defaults to `{index}_{method}_{reference}`.
    pub name: Option<String>,
    /// shapley_exact | shapley_sampled | breakdown | pdp | ale | ice | importance
    pub method: String,
    pub reference: Option<String>,
    pub instance: Option<InstanceSpec>,
    /// Feature subset for shapley_exact.
    pub features: Option<Vec<String>>,
    /// Profiled feature for pdp/ale/ice.
    pub feature: Option<String>,
    /// quantile (default) | equidistant
    pub grid: Option<String>,
    pub grid_points: Option<usize>,
    pub bins: Option<usize>,
    pub n_permutations: Option<usize>,
    /// Break-down ordering; defaults to the predictor's feature order.
    pub order: Option<Vec<String>>,
    pub seed: Option<u64>,
    // importance
    pub data: Option<String>,
    pub loss: Option<String>,
    pub repeats: Option<usize>,
    /// Also render an SVG next to the JSON artifact.
    #[serde(default)]
    pub svg: bool,
}

pub const METHODS: &[&str] = &[
    "shapley_exact",
    "shapley_sampled",
    "breakdown",
    "pdp",
    "ale",
    "ice",
    "importance",
];

pub fn is_stochastic(method: &str) -> bool {
    matches!(method, "shapley_sampled" | "importance")
}

impl RunConfig {
    /// Parse and validate the file at `path`. Relative data paths resolve
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("config {}: cannot read", path.display()))?;
        let config: RunConfig =
            toml::from_str(&text).map_err(|e| anyhow!("config {}: {e}", path.display()))?;
        config
            .validate()
            .map_err(|e| anyhow!("config {}: {e}", path.display()))?;
        Ok(config)
    }

    pub fn resolve_data_path(&self, config_path: &Path, spec_path: &str) -> PathBuf {
        let p = Path::new(spec_path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            config_path
                .parent()
                .unwrap_or_else(|| Path::new("."))
                .join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != 1 {
            bail!(
                "version: only schema version 1 is supported, got {}",
                self.version
            );
        }
        self.validate_model()?;
        let mut labels = Vec::new();
        for (i, r) in self.references.iter().enumerate() {
            self.validate_reference(i, r)?;
            if labels.contains(&r.label) {
                bail!("reference[{i}].label: duplicate label {:?}", r.label);
            }
            labels.push(r.label.clone());
        }
        let mut names = Vec::new();
        for (i, req) in self.requests.iter().enumerate() {
            self.validate_request(i, req, &labels)?;
            let name = request_stem(i, req);
            if names.contains(&name) {
                bail!("request[{i}].name: duplicate artifact name {name:?}");
            }
            names.push(name);
        }
        Ok(())
    }

    fn data_key_exists(&self, key: &str) -> bool {
        self.data.contains_key(key)
    }

    fn validate_model(&self) -> Result<()> {
        let m = &self.model;
        match m.kind.as_str() {
            "linear" => {
                if m.coefficients.as_ref().is_none_or(|c| c.is_empty()) {
                    bail!("model.coefficients: a linear model needs at least one coefficient");
                }
            }
            "logistic" | "tree" | "boosted_stumps" => {
                let key = m
                    .data
                    .as_deref()
                    .ok_or_else(|| anyhow!("model.data: {} models train on a named dataset", m.kind))?;
                if !self.data_key_exists(key) {
                    bail!("model.data: dataset {key:?} is not defined under [data]");
                }
            }
            "external" => {
                if m.command.as_ref().is_none_or(|c| c.is_empty()) {
                    bail!("model.command: an external model needs a command (argv list)");
                }
                if m.features.as_ref().is_none_or(|f| f.is_empty()) {
                    bail!("model.features: an external model needs its ordered feature names");
                }
            }
            other => bail!(
                "model.kind: unknown kind {other:?} (linear, logistic, tree, boosted_stumps, external)"
            ),
        }
        Ok(())
    }

    fn validate_reference(&self, i: usize, r: &ReferenceSpec) -> Result<()> {
        let at = |field: &str| format!("reference[{i}] ({:?}).{field}", r.label);
        if r.label.is_empty() {
            bail!("reference[{i}].label: must not be empty");
        }
        match r.source.as_str() {
            "dataset" => {
                let key = r
                    .data
                    .as_deref()
                    .ok_or_else(|| anyhow!("{}: required", at("data")))?;
                if !self.data_key_exists(key) {
                    bail!(
                        "{}: dataset {key:?} is not defined under [data]",
                        at("data")
                    );
                }
            }
            "filter" => {
                let key = r
                    .data
                    .as_deref()
                    .ok_or_else(|| anyhow!("{}: required", at("data")))?;
                if !self.data_key_exists(key) {
                    bail!(
                        "{}: dataset {key:?} is not defined under [data]",
                        at("data")
                    );
                }
                let clauses = r
                    .r#where
                    .as_ref()
                    .ok_or_else(|| anyhow!("{}: required for filter sources", at("where")))?;
                if clauses.is_empty() {
                    bail!("{}: needs at least one clause", at("where"));
                }
                for (k, c) in clauses.iter().enumerate() {
                    c.op.parse::<refx_core::Comparator>().map_err(|_| {
                        anyhow!("{}[{k}].op: unknown comparator {:?}", at("where"), c.op)
                    })?;
                }
            }
            "topk" => {
                let key = r
                    .data
                    .as_deref()
                    .ok_or_else(|| anyhow!("{}: required", at("data")))?;
                if !self.data_key_exists(key) {
                    bail!(
                        "{}: dataset {key:?} is not defined under [data]",
                        at("data")
                    );
                }
                if r.key.as_deref().is_none_or(str::is_empty) {
                    bail!("{}: required (a column name, or \"@model\")", at("key"));
                }
                if r.k.is_none() {
                    bail!("{}: required", at("k"));
                }
                if let Some(d) = r.direction.as_deref() {
                    if d != "highest" && d != "lowest" {
                        bail!("{}: must be \"highest\" or \"lowest\"", at("direction"));
                    }
                }
            }
            "gaussian" => {
                if r.features.as_ref().is_none_or(|f| f.is_empty()) {
                    bail!("{}: required for gaussian sources", at("features"));
                }
                if r.n.is_none() {
                    bail!("{}: required (number of rows to draw)", at("n"));
                }
                if r.seed.or(self.seed).is_none() {
                    bail!("{}: required (no global seed is set)", at("seed"));
                }
            }
            other => bail!(
                "reference[{i}].source: unknown source {other:?} (dataset, filter, topk, gaussian)"
            ),
        }
        Ok(())
    }

    fn validate_request(&self, i: usize, req: &RequestSpec, labels: &[String]) -> Result<()> {
        let at = |field: &str| format!("request[{i}].{field}");
        if !METHODS.contains(&req.method.as_str()) {
            bail!(
                "{}: unknown method {:?} (expected one of {})",
                at("method"),
                req.method,
                METHODS.join(", ")
            );
        }
        let needs_reference = req.method != "importance";
        match (&req.reference, needs_reference) {
            (None, true) => bail!(
                "{}: a reference is mandatory; every explanation is computed \
                 against an explicit reference sample",
                at("reference")
            ),
            (Some(label), _) if !labels.contains(label) => bail!(
                "{}: reference label {label:?} is not defined under [[reference]]",
                at("reference")
            ),
            _ => {}
        }
        if is_stochastic(&req.method) && req.seed.or(self.seed).is_none() {
            bail!(
                "{}: {} is stochastic and needs a seed (none set globally)",
                at("seed"),
                req.method
            );
        }
        match req.method.as_str() {
            "shapley_exact" | "shapley_sampled" | "breakdown" | "ice" => {
                let inst = req
                    .instance
                    .as_ref()
                    .ok_or_else(|| anyhow!("{}: required for {}", at("instance"), req.method))?;
                self.validate_instance(&at("instance"), inst)?;
            }
            _ => {}
        }
        match req.method.as_str() {
            "pdp" | "ale" | "ice" => {
                if req.feature.as_deref().is_none_or(str::is_empty) {
                    bail!("{}: required for {}", at("feature"), req.method);
                }
                if let Some(g) = req.grid.as_deref() {
                    if g != "quantile" && g != "equidistant" {
                        bail!("{}: must be \"quantile\" or \"equidistant\"", at("grid"));
                    }
                }
            }
            "importance" => {
                let key = req.data.as_deref().ok_or_else(|| {
                    anyhow!("{}: importance evaluates on a named dataset", at("data"))
                })?;
                if !self.data_key_exists(key) {
                    bail!(
                        "{}: dataset {key:?} is not defined under [data]",
                        at("data")
                    );
                }
                if let Some(loss) = req.loss.as_deref() {
                    loss.parse::<refx_core::LossFn>()
                        .map_err(|_| anyhow!("{}: unknown loss {loss:?}", at("loss")))?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn validate_instance(&self, at: &str, inst: &InstanceSpec) -> Result<()> {
        match (&inst.data, &inst.row, &inst.values) {
            (Some(key), Some(_), None) => {
                if !self.data_key_exists(key) {
                    bail!("{at}.data: dataset {key:?} is not defined under [data]");
                }
                Ok(())
            }
            (None, None, Some(values)) if !values.is_empty() => Ok(()),
            _ => bail!(
                "{at}: select an instance either by {{ data, row }} or by inline {{ values }}"
            ),
        }
    }
}

/// Artifact file stem for request `i`.
pub fn request_stem(i: usize, req: &RequestSpec) -> String {
    match &req.name {
        Some(name) => name.clone(),
        None => {
            let context = req
                .reference
                .clone()
                .or_else(|| req.data.clone())
                .unwrap_or_else(|| "unnamed".into());
            format!("{i:02}_{}_{}", req.method, context)
        }
    }
}
