//! `refx` — reference-aware model explanations.

use anyhow::{anyhow, Result};
use clap::{Parser, Subcommand};
use refx_cli::config::{InstanceSpec, RequestSpec, RunConfig};
use refx_cli::runner::{self, RunOutcome, Workspace};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "refx",
    version,
    about = "Model explanations with explicit data context: every artifact names the reference sample it was computed against."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Check a run config without executing anything
    Validate {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's global seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run explanation requests: all requests in the config, or a single
    /// one built from flags when METHOD is given
    Explain {
        /// shap | shapley_exact | shapley_sampled | breakdown | pdp | ale |
        /// ice | importance; omit to run every request in the config
        method: Option<String>,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for independent requests (default: one per core)
        #[arg(long)]
        threads: Option<usize>,
        /// Reference label defined in the config (mandatory for ad-hoc
        /// explanations; there is no default context)
        #[arg(long)]
        reference: Option<String>,
        /// Dataset key for row-based instance selection
        #[arg(long)]
        instance_data: Option<String>,
        /// Row index for instance selection
        #[arg(long)]
        instance_row: Option<usize>,
        /// Inline instance, e.g. --values savings=40,wages=35
        #[arg(long)]
        values: Option<String>,
        /// Profiled feature (pdp/ale/ice)
        #[arg(long)]
        feature: Option<String>,
        /// Comma-separated feature list (shapley subset, importance)
        #[arg(long)]
        features: Option<String>,
        /// Grid strategy: quantile (default) | equidistant
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        grid_points: Option<usize>,
        /// ALE bins
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        n_permutations: Option<usize>,
        /// Break-down order, comma-separated
        #[arg(long)]
        order: Option<String>,
        /// Evaluation dataset key (importance)
        #[arg(long)]
        data: Option<String>,
        /// mse | mae | logloss | one_minus_auc
        #[arg(long)]
        loss: Option<String>,
        #[arg(long)]
        repeats: Option<usize>,
        /// Artifact file stem
        #[arg(long)]
        name: Option<String>,
        /// Also render an SVG next to the JSON artifact
        #[arg(long)]
        svg: bool,
    },
    /// Compare attributions for one instance across several references
    Contrast {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Attribution method: shapley_exact (default) | shapley_sampled |
        /// breakdown
        #[arg(long, default_value = "shapley_exact")]
        method: String,
        /// Comma-separated reference labels, at least two
        #[arg(long)]
        references: String,
        #[arg(long)]
        instance_data: Option<String>,
        #[arg(long)]
        instance_row: Option<usize>,
        #[arg(long)]
        values: Option<String>,
        /// Sign-flip tolerance (default: 1e-6 of the largest
        /// prediction-baseline gap)
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        n_permutations: Option<usize>,
        #[arg(long)]
        svg: bool,
    },
    /// Marginal distances vs explanation divergence between two datasets
    Drift {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Config data key or CSV path
        #[arg(long)]
        data_a: String,
        /// Config data key or CSV path
        #[arg(long)]
        data_b: String,
        /// Comma-separated feature list (default: all shared features)
        #[arg(long)]
        features: Option<String>,
        #[arg(long)]
        grid_points: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
        /// Marginal-similarity threshold on the KS distance
        #[arg(long)]
        kappa: Option<f64>,
        /// Explanation-divergence threshold on curve distances
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Permutation importance on a named dataset
    Importance {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Evaluation dataset key
        #[arg(long)]
        data: String,
        #[arg(long)]
        loss: Option<String>,
        #[arg(long)]
        features: Option<String>,
        #[arg(long)]
        repeats: Option<usize>,
    },
}

enum Failure {
    /// Bad invocation: usage text, exit 2.
    Usage(String),
    /// Everything else: message, exit 1.
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn parse_comma_list(arg: &Option<String>) -> Option<Vec<String>> {
    arg.as_ref().map(|s| {
        s.split(',')
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty())
            .collect()
    })
}

fn parse_inline_values(arg: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for pair in arg.split(',') {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| anyhow!("--values: expected name=value pairs, got {pair:?}"))?;
        let parsed: f64 = value
            .trim()
            .parse()
            .map_err(|_| anyhow!("--values: {value:?} is not a number"))?;
        out.insert(name.trim().to_string(), parsed);
    }
    if out.is_empty() {
        return Err(anyhow!("--values: no pairs given"));
    }
    Ok(out)
}

fn instance_from_flags(
    instance_data: &Option<String>,
    instance_row: &Option<usize>,
    values: &Option<String>,
) -> Result<Option<InstanceSpec>> {
    match (instance_data, instance_row, values) {
        (Some(data), Some(row), None) => Ok(Some(InstanceSpec {
            data: Some(data.clone()),
            row: Some(*row),
            values: None,
        })),
        (None, None, Some(raw)) => Ok(Some(InstanceSpec {
            data: None,
            row: None,
            values: Some(parse_inline_values(raw)?),
        })),
        (None, None, None) => Ok(None),
        _ => Err(anyhow!(
            "select an instance either with --instance-data KEY --instance-row N, or with --values a=1,b=2"
        )),
    }
}

/// Canonical method names, with short aliases.
fn normalize_method(raw: &str) -> Result<String> {
    Ok(match raw {
        "shap" | "shapley" | "shapley_exact" => "shapley_exact",
        "shap_sampled" | "sampled" | "shapley_sampled" => "shapley_sampled",
        "breakdown" | "break_down" => "breakdown",
        "pdp" => "pdp",
        "ale" => "ale",
        "ice" | "ceteris_paribus" => "ice",
        "importance" => "importance",
        other => return Err(anyhow!("unknown method {other:?}")),
    }
    .to_string())
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig> {
    let mut config = RunConfig::load(path)?;
    if seed.is_some() {
        config.seed = seed;
        config
            .validate()
            .map_err(|e| anyhow!("config {}: {e}", path.display()))?;
    }
    Ok(config)
}

fn out_dir(config: &RunConfig, flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .unwrap_or_else(|| PathBuf::from(&config.out_dir))
}

fn finish(outcome: RunOutcome) -> Result<ExitCode, Failure> {
    for (name, error) in &outcome.failures {
        eprintln!("request {name}: {error}");
    }
    println!(
        "wrote {} artifact(s) and {}",
        outcome.entries.len(),
        outcome.manifest_path.display()
    );
    if outcome.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Validate { config, seed, .. } => {
            let config = load_config(&config, seed)?;
            println!(
                "config ok: {} dataset(s), {} reference(s), {} request(s)",
                config.data.len(),
                config.references.len(),
                config.requests.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Explain {
            method,
            config: config_path,
            out,
            seed,
            threads,
            reference,
            instance_data,
            instance_row,
            values,
            feature,
            features,
            grid,
            grid_points,
            bins,
            n_permutations,
            order,
            data,
            loss,
            repeats,
            name,
            svg,
        } => {
            let mut config = load_config(&config_path, seed)?;
            if let Some(raw) = method {
                let method = normalize_method(&raw).map_err(|e| Failure::Usage(e.to_string()))?;
                if method != "importance" && reference.is_none() {
                    return Err(Failure::Usage(
                        "a reference is mandatory: explanations are only meaningful \
                         against an explicit reference sample; pass --reference <LABEL> \
                         (define it under [[reference]] in the config)"
                            .into(),
                    ));
                }
                let request = RequestSpec {
                    name: Some(name.unwrap_or_else(|| method.clone())),
                    method,
                    reference,
                    instance: instance_from_flags(&instance_data, &instance_row, &values)?,
                    features: parse_comma_list(&features),
                    feature,
                    grid,
                    grid_points,
                    bins,
                    n_permutations,
                    order: parse_comma_list(&order),
                    seed,
                    data,
                    loss,
                    repeats,
                    svg,
                };
                config.requests = vec![request];
                config
                    .validate()
                    .map_err(|e| Failure::Usage(format!("{e:#}")))?;
            }
            let dir = out_dir(&config, &out);
            let workspace = Workspace::build(config, &config_path)?;
            let outcome = runner::run(&workspace, &dir, threads)?;
            finish(outcome)
        }
        Command::Contrast {
            config: config_path,
            out,
            seed,
            method,
            references,
            instance_data,
            instance_row,
            values,
            tau,
            n_permutations,
            svg,
        } => {
            let config = load_config(&config_path, seed)?;
            let method = normalize_method(&method).map_err(|e| Failure::Usage(e.to_string()))?;
            let labels: Vec<String> = references
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            let instance =
                instance_from_flags(&instance_data, &instance_row, &values)?.ok_or_else(|| {
                    Failure::Usage(
                        "contrast explains one instance: pass --instance-data/--instance-row or --values"
                            .into(),
                    )
                })?;
            let dir = out_dir(&config, &out);
            let effective_seed = seed.or(config.seed);
            let workspace = Workspace::build(config, &config_path)?;
            let outcome = runner::run_contrast(
                &workspace,
                &method,
                &labels,
                &instance,
                tau,
                n_permutations.unwrap_or(2000),
                effective_seed,
                &dir,
                svg,
            )?;
            finish(outcome)
        }
        Command::Drift {
            config: config_path,
            out,
            seed,
            data_a,
            data_b,
            features,
            grid_points,
            bins,
            kappa,
            delta,
        } => {
            let config = load_config(&config_path, seed)?;
            let dir = out_dir(&config, &out);
            let workspace = Workspace::build(config, &config_path)?;
            let outcome = runner::run_drift(
                &workspace,
                &data_a,
                &data_b,
                parse_comma_list(&features),
                grid_points,
                bins,
                kappa,
                delta,
                &dir,
            )?;
            finish(outcome)
        }
        Command::Importance {
            config: config_path,
            out,
            seed,
            data,
            loss,
            features,
            repeats,
        } => {
            let mut config = load_config(&config_path, seed)?;
            let request = RequestSpec {
                name: Some("importance".into()),
                method: "importance".into(),
                reference: None,
                instance: None,
                features: parse_comma_list(&features),
                feature: None,
                grid: None,
                grid_points: None,
                bins: None,
                n_permutations: None,
                order: None,
                seed,
                data: Some(data),
                loss,
                repeats,
                svg: false,
            };
            config.requests = vec![request];
            config
                .validate()
                .map_err(|e| Failure::Usage(format!("{e:#}")))?;
            let dir = out_dir(&config, &out);
            let workspace = Workspace::build(config, &config_path)?;
            let outcome = runner::run(&workspace, &dir, None)?;
            finish(outcome)
        }
    }
}
