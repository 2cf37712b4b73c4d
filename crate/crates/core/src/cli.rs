//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 when the configuration is invalid (the message
//! names the field), 1 when a computation fails.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::json;

use crate::chernoff::{gaussian_chernoff_information, rho_ratio_grid, CellStatus, Divergence, GridCell, GridModel};
use crate::embed::{embed, EmbeddingMethod};
use crate::error::Error;
use crate::gaussian::GaussianParams;
use crate::harness::{
    run_clt_check, run_clustering_experiment, run_frobenius_check, run_section43_replication, Clusterer,
    CltReport, ClusteringReport, ExperimentConfig, FrobeniusReport, Section43Preset, Section43Report,
    DEFAULT_RESTARTS,
};
use crate::limits::{
    ase_frobenius_limit, ase_row_cov, lse_frobenius_limit, lse_row_cov, moments, sbm_block_gaussians,
    within_block_limit, RhoRegime,
};
use crate::model::{mixture_from_block_model, BlockModelParams, RdpgSample};
use crate::output::{write_csv_matrix, write_results, Cell, OutputError, OutputFormat, ResultTable, RunManifest};

#[derive(Debug)]
pub enum CliError {
    Config { field: String, message: String },
    Runtime(String),
}

impl CliError {
    fn config(field: &str, message: impl Into<String>) -> Self {
        CliError::Config { field: field.to_string(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config { field, message } => write!(f, "invalid configuration: {field}: {message}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<OutputError> for CliError {
    fn from(e: OutputError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "rdpg", version, about = "Spectral embeddings of random dot product graphs")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw latent positions and a graph; write latents, labels and adjacency CSVs.
    Sample(SampleArgs),
    /// Embed an adjacency matrix read from CSV.
    Embed(EmbedArgs),
    /// Compare per-block residual covariances against the CLT limits.
    CltCheck(CltArgs),
    /// Compare squared Frobenius errors against their limits.
    FrobeniusCheck(ExperimentArgs),
    /// Block-recovery error rates for embeddings and clusterers.
    ClusterExperiment(ClusterArgs),
    /// Chernoff information between two Gaussians.
    Chernoff(ChernoffArgs),
    /// Grid of rho_A / rho_L over (p, r) with q = p + r.
    RatioGrid(GridArgs),
    /// GMM error rates after ASE and LSE for the built-in comparison models.
    Section43(Section43Args),
    /// Print the limit covariances and Gaussian approximations of a model.
    Limits(LimitsArgs),
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Preset (example1, two-block, three-block, er) or a config file.
    #[arg(long)]
    model: String,
    /// Preset parameter p.
    #[arg(long)]
    p: Option<f64>,
    /// Preset parameter q.
    #[arg(long)]
    q: Option<f64>,
    /// Block proportions, comma separated.
    #[arg(long, value_delimiter = ',')]
    pi: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sparsity: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EmbedArgs {
    /// Adjacency matrix CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "ase")]
    method: String,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct ExperimentArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Graph sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    regime: Option<String>,
    #[arg(long)]
    sparsity: Option<f64>,
    /// Embedding methods, comma separated (ase, lse).
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Use P in place of A.
    #[arg(long)]
    noiseless: bool,
    #[arg(long)]
    out: PathBuf,
    /// csv or json; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Debug)]
struct CltArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Single embedding method (overrides --methods).
    #[arg(long)]
    method: Option<String>,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Clusterers, comma separated (kmeans, gmm, linear, bayes).
    #[arg(long, value_delimiter = ',')]
    clusterers: Option<Vec<String>>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    oracle_samples: Option<usize>,
}

#[derive(Args, Debug)]
struct ChernoffArgs {
    /// Mean vector, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    mean0: String,
    /// Covariance rows separated by ';', entries by ','.
    #[arg(long, allow_hyphen_values = true)]
    cov0: String,
    #[arg(long, allow_hyphen_values = true)]
    mean1: String,
    #[arg(long, allow_hyphen_values = true)]
    cov1: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// two-block or three-block.
    #[arg(long)]
    model: String,
    #[arg(long, value_delimiter = ',')]
    pi: Option<Vec<f64>>,
    /// Range start:stop:step (inclusive), or a comma separated list.
    /// Defaults to 0.2:0.8:0.05 (two-block) or 0.3:0.9:0.05 (three-block).
    #[arg(long, allow_hyphen_values = true)]
    p: Option<String>,
    /// Defaults to -0.15:0.15:0.05 (two-block) or -0.2:-0.01:0.01 (three-block).
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Debug)]
struct Section43Args {
    /// two-block-a, two-block-b, three-block-a, three-block-b, or all.
    #[arg(long, default_value = "all")]
    which: String,
    #[arg(long, default_value_t = 1000)]
    replicates: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args, Debug)]
struct LimitsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    regime: Option<String>,
    #[arg(long)]
    sparsity: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Config file contents (TOML).
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    model: ModelSection,
    #[serde(default)]
    experiment: ExperimentSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    /// Preset name; ignored when `b` is given.
    preset: Option<String>,
    b: Option<Vec<Vec<f64>>>,
    pi: Option<Vec<f64>>,
    p: Option<f64>,
    q: Option<f64>,
    regime: Option<String>,
    sparsity: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSection {
    n: Option<Vec<usize>>,
    replicates: Option<usize>,
    seed: Option<u64>,
    methods: Option<Vec<String>>,
    clusterers: Option<Vec<String>>,
    restarts: Option<usize>,
    oracle_samples: Option<usize>,
}

fn load_config(model: &str) -> CliResult<(Option<ConfigFile>, String)> {
    let path = Path::new(model);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| CliError::config("model", format!("{}: {e}", path.display())))?;
        let cfg: ConfigFile = toml::from_str(&text).map_err(|e| {
            CliError::config("model", format!("{}: {}", path.display(), e.message()))
        })?;
        Ok((Some(cfg), model.to_string()))
    } else {
        Ok((None, model.to_string()))
    }
}

fn preset_model(name: &str, p: Option<f64>, q: Option<f64>, pi: Option<Vec<f64>>) -> CliResult<BlockModelParams> {
    let need = |v: Option<f64>, f: &str| v.ok_or_else(|| CliError::config(f, format!("required by the {name} model")));
    let model_err = |e: Error| match e {
        Error::InvalidMixture(m) => CliError::config("pi", m),
        Error::DimensionMismatch(m) => CliError::config("pi", m),
        other => CliError::config("model", other.to_string()),
    };
    match name.to_ascii_lowercase().replace('_', "-").as_str() {
        "example1" => {
            let pi = pi.unwrap_or_else(|| vec![0.6, 0.4]);
            BlockModelParams::new(DMatrix::from_row_slice(2, 2, &[0.42, 0.42, 0.42, 0.5]), pi).map_err(model_err)
        }
        "two-block" => BlockModelParams::two_block(need(p, "p")?, need(q, "q")?, pi.unwrap_or_else(|| vec![0.6, 0.4]))
            .map_err(model_err),
        "three-block" => {
            BlockModelParams::three_block(need(p, "p")?, need(q, "q")?, pi.unwrap_or_else(|| vec![0.8, 0.1, 0.1]))
                .map_err(model_err)
        }
        "er" => BlockModelParams::new(DMatrix::from_element(1, 1, need(p, "p")?), vec![1.0]).map_err(model_err),
        other => Err(CliError::config(
            "model",
            format!("'{other}' is neither a preset (example1, two-block, three-block, er) nor a readable file"),
        )),
    }
}

/// Model, regime and sparsity from a preset or config file, with flag overrides.
struct Resolved {
    model: BlockModelParams,
    regime: RhoRegime,
    sparsity: f64,
    experiment: ExperimentSection,
    source: String,
}

fn resolve_model(args: &ModelArgs, regime: Option<&str>, sparsity: Option<f64>) -> CliResult<Resolved> {
    let (cfg, source) = load_config(&args.model)?;
    let (model_sec, experiment) = match cfg {
        Some(c) => (Some(c.model), c.experiment),
        None => (None, ExperimentSection::default()),
    };
    let pi = args.pi.clone().or_else(|| model_sec.as_ref().and_then(|m| m.pi.clone()));
    let model = match &model_sec {
        Some(m) if m.b.is_some() => {
            let rows = m.b.clone().expect("checked");
            let k = rows.len();
            if k == 0 || rows.iter().any(|r| r.len() != k) {
                return Err(CliError::config("model.b", "must be a nonempty square matrix"));
            }
            let flat: Vec<f64> = rows.into_iter().flatten().collect();
            let pi = pi.ok_or_else(|| CliError::config("model.pi", "required with model.b"))?;
            BlockModelParams::new(DMatrix::from_row_slice(k, k, &flat), pi).map_err(|e| match e {
                Error::InvalidMixture(m) | Error::DimensionMismatch(m) => CliError::config("model.pi", m),
                other => CliError::config("model.b", other.to_string()),
            })?
        }
        Some(m) => {
            let name = m
                .preset
                .clone()
                .ok_or_else(|| CliError::config("model", "config needs model.b or model.preset"))?;
            preset_model(&name, args.p.or(m.p), args.q.or(m.q), pi)?
        }
        None => preset_model(&args.model, args.p, args.q, pi)?,
    };
    let regime_str = regime
        .map(str::to_string)
        .or_else(|| model_sec.as_ref().and_then(|m| m.regime.clone()));
    let regime = match regime_str {
        Some(s) => s.parse::<RhoRegime>().map_err(|e| CliError::config("regime", e.to_string()))?,
        None => RhoRegime::Dense,
    };
    let sparsity = sparsity.or_else(|| model_sec.as_ref().and_then(|m| m.sparsity)).unwrap_or(1.0);
    if !(sparsity > 0.0 && sparsity <= 1.0) {
        return Err(CliError::config("sparsity", "must lie in (0, 1]"));
    }
    Ok(Resolved { model, regime, sparsity, experiment, source })
}

fn parse_methods(list: &[String]) -> CliResult<Vec<EmbeddingMethod>> {
    list.iter()
        .map(|s| s.parse().map_err(|e: Error| CliError::config("methods", e.to_string())))
        .collect()
}

fn build_experiment(args: &ExperimentArgs) -> CliResult<(ExperimentConfig, Resolved)> {
    let r = resolve_model(&args.model, args.regime.as_deref(), args.sparsity)?;
    let n_values = args
        .n
        .clone()
        .or_else(|| r.experiment.n.clone())
        .ok_or_else(|| CliError::config("n", "required"))?;
    let seed = args
        .seed
        .or(r.experiment.seed)
        .ok_or_else(|| CliError::config("seed", "required; every run must be seeded explicitly"))?;
    let replicates = args.replicates.or(r.experiment.replicates).unwrap_or(100);
    let mut cfg = ExperimentConfig::new(r.model.clone(), n_values, replicates, seed);
    cfg.regime = r.regime;
    cfg.sparsity = r.sparsity;
    if let Some(m) = args.methods.clone().or_else(|| r.experiment.methods.clone()) {
        cfg.methods = parse_methods(&m)?;
    }
    if let Some(x) = r.experiment.restarts {
        cfg.restarts = x;
    }
    if let Some(x) = r.experiment.oracle_samples {
        cfg.oracle_samples = x;
    }
    if let Some(c) = &r.experiment.clusterers {
        cfg.clusterers = parse_clusterers(c)?;
    }
    cfg.noiseless = args.noiseless;
    Ok((cfg, r))
}

fn parse_clusterers(list: &[String]) -> CliResult<Vec<Clusterer>> {
    list.iter()
        .map(|s| s.parse().map_err(|e: Error| CliError::config("clusterers", e.to_string())))
        .collect()
}

fn validate(cfg: &ExperimentConfig) -> CliResult<()> {
    cfg.validate().map_err(|e| {
        let msg = e.to_string();
        let msg = msg.strip_prefix("invalid input: ").unwrap_or(&msg).to_string();
        match msg.split_once(": ") {
            Some((field, rest)) => CliError::config(field, rest),
            None => CliError::config("config", msg),
        }
    })
}

fn config_echo(cfg: &ExperimentConfig, source: &str) -> serde_json::Value {
    json!({
        "model_source": source,
        "b": cfg.model.rows(),
        "pi": cfg.model.weights(),
        "n": cfg.n_values,
        "replicates": cfg.replicates,
        "seed": cfg.base_seed,
        "regime": cfg.regime.to_string(),
        "sparsity": cfg.sparsity,
        "methods": cfg.methods.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        "clusterers": cfg.clusterers.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "restarts": cfg.restarts,
        "oracle_samples": cfg.oracle_samples,
        "noiseless": cfg.noiseless,
    })
}

fn output_format(format: &Option<String>, path: &Path) -> CliResult<OutputFormat> {
    match format {
        Some(f) => f.parse().map_err(|m: String| CliError::config("format", m)),
        None => Ok(OutputFormat::from_path(path)),
    }
}

fn finish(
    table: &ResultTable,
    path: &Path,
    format: OutputFormat,
    mut manifest: RunManifest,
    started: Instant,
) -> CliResult<()> {
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    let written = write_results(table, path, format, &manifest)?;
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn div_cell(d: Option<Divergence>) -> Cell {
    match d {
        Some(Divergence::Finite(v)) => Cell::Float(v),
        Some(Divergence::Infinite) => Cell::Inf,
        None => Cell::Empty,
    }
}

pub fn clt_table(report: &CltReport) -> ResultTable {
    let mut t = ResultTable::new(&["block", "entry_i", "entry_j", "empirical", "theoretical", "rel_err", "coverage"]);
    for row in &report.rows {
        let d = row.theoretical_cov.nrows();
        for i in 0..d {
            for j in 0..d {
                t.push(vec![
                    Cell::from(row.block + 1),
                    Cell::from(i + 1),
                    Cell::from(j + 1),
                    Cell::Float(row.empirical_cov[(i, j)]),
                    Cell::Float(row.theoretical_cov[(i, j)]),
                    Cell::Float(row.rel_frobenius_error),
                    Cell::Float(row.coverage),
                ]);
            }
        }
    }
    t
}

pub fn frobenius_table(report: &FrobeniusReport) -> ResultTable {
    let mut t = ResultTable::new(&["n", "method", "empirical", "stderr", "theoretical", "ratio", "replicates"]);
    for r in &report.rows {
        t.push(vec![
            Cell::from(r.n),
            Cell::text(r.method.to_string()),
            Cell::Float(r.empirical_mean),
            Cell::Float(r.stderr),
            Cell::Float(r.theoretical),
            Cell::Float(r.ratio),
            Cell::from(r.replicates),
        ]);
    }
    t
}

pub fn clustering_table(report: &ClusteringReport) -> ResultTable {
    let mut t = ResultTable::new(&["n", "method", "clusterer", "mean_error", "stderr", "replicates"]);
    for r in &report.rows {
        t.push(vec![
            Cell::from(r.n),
            Cell::text(r.method.to_string()),
            Cell::text(r.clusterer.to_string()),
            Cell::Float(r.mean_error),
            Cell::Float(r.stderr),
            Cell::from(r.replicates),
        ]);
    }
    t
}

pub fn grid_table(cells: &[GridCell]) -> ResultTable {
    let mut t = ResultTable::new(&["p", "r", "rho_a", "rho_l", "ratio", "status"]);
    for c in cells {
        let ratio = match (c.status, c.ratio) {
            (_, Some(v)) => Cell::Float(v),
            (CellStatus::Infinite, None) => Cell::Inf,
            _ => Cell::Empty,
        };
        t.push(vec![
            Cell::Float(c.p),
            Cell::Float(c.r),
            div_cell(c.rho_a),
            div_cell(c.rho_l),
            ratio,
            Cell::text(c.status.to_string()),
        ]);
    }
    t
}

pub fn section43_table(reports: &[Section43Report]) -> ResultTable {
    let mut t = ResultTable::new(&[
        "preset", "n", "method", "mean_error", "stderr", "replicates", "rho_a", "rho_l", "ratio",
    ]);
    for rep in reports {
        for row in [&rep.ase, &rep.lse] {
            t.push(vec![
                Cell::text(rep.preset.to_string()),
                Cell::from(rep.n),
                Cell::text(row.method.to_string()),
                Cell::Float(row.mean_error),
                Cell::Float(row.stderr),
                Cell::from(row.replicates),
                div_cell(Some(rep.rho_a)),
                div_cell(Some(rep.rho_l)),
                rep.ratio.map(Cell::Float).unwrap_or(Cell::Empty),
            ]);
        }
    }
    t
}

/// Inclusive `start:stop:step` range or a comma separated list.
pub fn parse_range(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("'{x}' is not a number"));
    match parts.len() {
        1 => s.split(',').map(num).collect(),
        3 => {
            let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if !(step > 0.0) || b < a {
                return Err(format!("'{s}' is not an increasing range with positive step"));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count)
                .map(|i| {
                    let v = a + step * i as f64;
                    (v * 1e12).round() / 1e12
                })
                .collect())
        }
        _ => Err(format!("'{s}' is not start:stop:step")),
    }
}

fn parse_vector(s: &str, field: &str) -> CliResult<DVector<f64>> {
    let v: std::result::Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    v.map(DVector::from_vec)
        .map_err(|_| CliError::config(field, format!("'{s}' is not a comma separated list of numbers")))
}

fn parse_matrix(s: &str, field: &str) -> CliResult<DMatrix<f64>> {
    let rows: Vec<DVector<f64>> = s.split(';').map(|r| parse_vector(r, field)).collect::<CliResult<_>>()?;
    let k = rows.len();
    if rows.iter().any(|r| r.len() != k) {
        return Err(CliError::config(field, "must be a square matrix with rows separated by ';'"));
    }
    Ok(DMatrix::from_fn(k, k, |i, j| rows[i][j]))
}

fn fmt_matrix(m: &DMatrix<f64>) -> String {
    m.row_iter()
        .map(|r| format!("[{}]", r.iter().map(|v| format!("{v:.6e}")).collect::<Vec<_>>().join(", ")))
        .collect::<Vec<_>>()
        .join(", ")
}

fn fmt_vector(v: &DVector<f64>) -> String {
    format!("[{}]", v.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(", "))
}

fn cmd_sample(args: SampleArgs) -> CliResult<()> {
    let started = Instant::now();
    let r = resolve_model(&args.model, None, args.sparsity)?;
    let n = args.n.or_else(|| r.experiment.n.as_ref().and_then(|v| v.first().copied()));
    let n = n.ok_or_else(|| CliError::config("n", "required"))?;
    if n < 2 {
        return Err(CliError::config("n", "must be at least 2"));
    }
    let seed = args
        .seed
        .or(r.experiment.seed)
        .ok_or_else(|| CliError::config("seed", "required; every run must be seeded explicitly"))?;
    let f = mixture_from_block_model(&r.model, r.model.numerical_rank())?;
    let s = RdpgSample::draw(&f, n, r.sparsity, seed)?;
    fs::create_dir_all(&args.out).map_err(|e| CliError::Runtime(format!("{}: {e}", args.out.display())))?;
    let latents = args.out.join("latents.csv");
    let adjacency = args.out.join("adjacency.csv");
    let labels = args.out.join("labels.csv");
    write_csv_matrix(&s.latents, "x", &latents)?;
    write_csv_matrix(&s.adjacency, "v", &adjacency)?;
    let mut lt = ResultTable::new(&["vertex", "block"]);
    for (i, &l) in s.labels.as_ref().expect("labels").iter().enumerate() {
        lt.push(vec![Cell::from(i + 1), Cell::from(l + 1)]);
    }
    let mut manifest = RunManifest::new(
        "sample",
        Some(seed),
        json!({"model_source": r.source, "b": r.model.rows(), "pi": r.model.weights(), "n": n, "sparsity": r.sparsity, "seed": seed}),
    );
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    let written = write_results(&lt, &labels, OutputFormat::Csv, &manifest)?;
    let mpath = args.out.join("manifest.json");
    manifest.outputs = vec![latents.display().to_string(), adjacency.display().to_string()];
    manifest.outputs.extend(written.iter().map(|p| p.display().to_string()));
    manifest.outputs.push(mpath.display().to_string());
    fs::write(&mpath, serde_json::to_string_pretty(&manifest).expect("serializable") + "\n")
        .map_err(|e| CliError::Runtime(format!("{}: {e}", mpath.display())))?;
    for p in &manifest.outputs {
        println!("wrote {p}");
    }
    Ok(())
}

fn cmd_embed(args: EmbedArgs) -> CliResult<()> {
    let started = Instant::now();
    let method: EmbeddingMethod = args.method.parse().map_err(|e: Error| CliError::config("method", e.to_string()))?;
    let a = crate::output::read_csv_matrix(&args.input)?;
    if args.dim == 0 || args.dim > a.nrows() {
        return Err(CliError::config("dim", format!("must lie in 1..={}", a.nrows())));
    }
    let e = embed(&a, args.dim, method)?;
    write_csv_matrix(&e.rows, "x", &args.out)?;
    let mut manifest = RunManifest::new(
        "embed",
        None,
        json!({"input": args.input.display().to_string(), "method": method.to_string(), "dim": args.dim}),
    );
    manifest.wall_time_seconds = started.elapsed().as_secs_f64();
    manifest.outputs = vec![args.out.display().to_string()];
    let mpath = crate::output::manifest_path(&args.out);
    manifest.outputs.push(mpath.display().to_string());
    fs::write(&mpath, serde_json::to_string_pretty(&manifest).expect("serializable") + "\n")
        .map_err(|e| CliError::Runtime(format!("{}: {e}", mpath.display())))?;
    println!("eigenvalues {:?}", e.eigenvalues);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_clt(args: CltArgs) -> CliResult<()> {
    let started = Instant::now();
    let (mut cfg, r) = build_experiment(&args.exp)?;
    if let Some(m) = &args.method {
        cfg.methods = parse_methods(std::slice::from_ref(m))?;
    } else if args.exp.methods.is_none() && r.experiment.methods.is_none() {
        cfg.methods = vec![EmbeddingMethod::Lse];
    }
    if cfg.methods.len() != 1 {
        return Err(CliError::config("method", "clt-check takes a single embedding method"));
    }
    if cfg.n_values.len() != 1 {
        return Err(CliError::config("n", "clt-check takes a single graph size"));
    }
    validate(&cfg)?;
    let report = run_clt_check(&cfg)?;
    for f in &report.failures {
        eprintln!("replicate {} failed after {} attempts: {}", f.replicate, f.attempts, f.error);
    }
    for row in &report.rows {
        eprintln!(
            "{} n={} block {}: rel_err {:.4}, coverage {:.3} ({} samples)",
            row.method,
            row.n,
            row.block + 1,
            row.rel_frobenius_error,
            row.coverage,
            row.samples
        );
    }
    let fmt = output_format(&args.exp.format, &args.exp.out)?;
    let manifest = RunManifest::new("clt-check", Some(cfg.base_seed), config_echo(&cfg, &r.source));
    finish(&clt_table(&report), &args.exp.out, fmt, manifest, started)
}

fn cmd_frobenius(args: ExperimentArgs) -> CliResult<()> {
    let started = Instant::now();
    let (cfg, r) = build_experiment(&args)?;
    validate(&cfg)?;
    let report = run_frobenius_check(&cfg)?;
    for f in &report.failures {
        eprintln!("n={} replicate {} failed: {}", f.n, f.replicate, f.error);
    }
    let fmt = output_format(&args.format, &args.out)?;
    let manifest = RunManifest::new("frobenius-check", Some(cfg.base_seed), config_echo(&cfg, &r.source));
    finish(&frobenius_table(&report), &args.out, fmt, manifest, started)
}

fn cmd_cluster(args: ClusterArgs) -> CliResult<()> {
    let started = Instant::now();
    let (mut cfg, r) = build_experiment(&args.exp)?;
    if let Some(c) = &args.clusterers {
        cfg.clusterers = parse_clusterers(c)?;
    }
    if let Some(x) = args.restarts {
        cfg.restarts = x;
    }
    if let Some(x) = args.oracle_samples {
        cfg.oracle_samples = x;
    }
    if cfg.clusterers.is_empty() {
        return Err(CliError::config("clusterers", "at least one clusterer is required"));
    }
    validate(&cfg)?;
    let report = run_clustering_experiment(&cfg)?;
    for f in &report.failures {
        eprintln!("n={} replicate {} failed: {}", f.n, f.replicate, f.error);
    }
    let fmt = output_format(&args.exp.format, &args.exp.out)?;
    let manifest = RunManifest::new("cluster-experiment", Some(cfg.base_seed), config_echo(&cfg, &r.source));
    finish(&clustering_table(&report), &args.exp.out, fmt, manifest, started)
}

fn cmd_chernoff(args: ChernoffArgs) -> CliResult<()> {
    let started = Instant::now();
    let g = |mean: &str, cov: &str, mf: &str, cf: &str| -> CliResult<GaussianParams> {
        let m = parse_vector(mean, mf)?;
        let c = parse_matrix(cov, cf)?;
        GaussianParams::new(m, c).map_err(|e| CliError::config(cf, e.to_string()))
    };
    let g0 = g(&args.mean0, &args.cov0, "mean0", "cov0")?;
    let g1 = g(&args.mean1, &args.cov1, "mean1", "cov1")?;
    if g0.dim() != g1.dim() {
        return Err(CliError::config("mean1", "dimension differs from mean0"));
    }
    let e = gaussian_chernoff_information(&g0, &g1)?;
    match e.value {
        Divergence::Finite(v) => println!("value {v:?}"),
        Divergence::Infinite => println!("value inf"),
    }
    println!("t_star {:?}", e.t_star);
    println!("iterations {}", e.iterations);
    if let Some(out) = &args.out {
        let mut t = ResultTable::new(&["value", "t_star", "iterations"]);
        t.push(vec![div_cell(Some(e.value)), Cell::Float(e.t_star), Cell::from(e.iterations)]);
        let manifest = RunManifest::new(
            "chernoff",
            None,
            json!({"mean0": args.mean0, "cov0": args.cov0, "mean1": args.mean1, "cov1": args.cov1}),
        );
        finish(&t, out, OutputFormat::from_path(out), manifest, started)?;
    }
    Ok(())
}

fn cmd_grid(args: GridArgs) -> CliResult<()> {
    let started = Instant::now();
    let model = match args.model.to_ascii_lowercase().replace('_', "-").as_str() {
        "two-block" => GridModel::TwoBlock,
        "three-block" => GridModel::ThreeBlock,
        other => return Err(CliError::config("model", format!("'{other}' must be two-block or three-block"))),
    };
    let k = if model == GridModel::TwoBlock { 2 } else { 3 };
    let pi = args.pi.clone().unwrap_or_else(|| if k == 2 { vec![0.6, 0.4] } else { vec![0.8, 0.1, 0.1] });
    if pi.len() != k {
        return Err(CliError::config("pi", format!("needs {k} entries for the {} model", args.model)));
    }
    crate::model::check_weights(&pi).map_err(|m| CliError::config("pi", m))?;
    let (p_default, r_default) =
        if k == 2 { ("0.2:0.8:0.05", "-0.15:0.15:0.05") } else { ("0.3:0.9:0.05", "-0.2:-0.01:0.01") };
    let p_spec = args.p.as_deref().unwrap_or(p_default);
    let r_spec = args.r.as_deref().unwrap_or(r_default);
    let ps = parse_range(p_spec).map_err(|m| CliError::config("p", m))?;
    let rs = parse_range(r_spec).map_err(|m| CliError::config("r", m))?;
    if args.n == 0 {
        return Err(CliError::config("n", "must be positive"));
    }
    let cells = rho_ratio_grid(&ps, &rs, &pi, args.n, model);
    let table = grid_table(&cells);
    let manifest = RunManifest::new(
        "ratio-grid",
        None,
        json!({"model": args.model, "pi": pi, "p": p_spec, "r": r_spec, "n": args.n}),
    );
    match &args.out {
        Some(out) => {
            let fmt = output_format(&args.format, out)?;
            finish(&table, out, fmt, manifest, started)
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            let _ = w.write_record(&table.columns);
            for row in &cells {
                let _ = w.write_record([
                    row.p.to_string(),
                    row.r.to_string(),
                    row.rho_a.map(|d| d.to_string()).unwrap_or_default(),
                    row.rho_l.map(|d| d.to_string()).unwrap_or_default(),
                    match (row.status, row.ratio) {
                        (_, Some(v)) => v.to_string(),
                        (CellStatus::Infinite, None) => "inf".into(),
                        _ => String::new(),
                    },
                    row.status.to_string(),
                ]);
            }
            let _ = w.flush();
            Ok(())
        }
    }
}

fn cmd_section43(args: Section43Args) -> CliResult<()> {
    let started = Instant::now();
    let seed = args
        .seed
        .ok_or_else(|| CliError::config("seed", "required; every run must be seeded explicitly"))?;
    let presets: Vec<Section43Preset> = if args.which.eq_ignore_ascii_case("all") {
        Section43Preset::ALL.to_vec()
    } else {
        vec![args.which.parse().map_err(|e: Error| CliError::config("which", e.to_string()))?]
    };
    if args.replicates == 0 {
        return Err(CliError::config("replicates", "must be at least 1"));
    }
    if args.restarts == 0 {
        return Err(CliError::config("restarts", "must be at least 1"));
    }
    let mut reports = Vec::new();
    for p in presets {
        let rep = run_section43_replication(p, args.replicates, seed, args.restarts)?;
        println!(
            "{} (n={}): GMM-ASE {:.4} (se {:.4}), GMM-LSE {:.4} (se {:.4}), rho_A/rho_L {}",
            rep.preset,
            rep.n,
            rep.ase.mean_error,
            rep.ase.stderr,
            rep.lse.mean_error,
            rep.lse.stderr,
            rep.ratio.map(|r| format!("{r:.4}")).unwrap_or_else(|| "n/a".into())
        );
        reports.push(rep);
    }
    if let Some(out) = &args.out {
        let fmt = output_format(&args.format, out)?;
        let manifest = RunManifest::new(
            "section43",
            Some(seed),
            json!({"which": args.which, "replicates": args.replicates, "seed": seed, "restarts": args.restarts}),
        );
        finish(&section43_table(&reports), out, fmt, manifest, started)?;
    }
    Ok(())
}

fn cmd_limits(args: LimitsArgs) -> CliResult<()> {
    let started = Instant::now();
    let r = resolve_model(&args.model, args.regime.as_deref(), args.sparsity)?;
    let n = args
        .n
        .or_else(|| r.experiment.n.as_ref().and_then(|v| v.first().copied()))
        .ok_or_else(|| CliError::config("n", "required"))?;
    if n == 0 {
        return Err(CliError::config("n", "must be positive"));
    }
    if r.regime == RhoRegime::Dense && r.sparsity != 1.0 {
        return Err(CliError::config("sparsity", "the dense regime requires sparsity 1"));
    }
    let f = mixture_from_block_model(&r.model, r.model.numerical_rank())?;
    let mom = moments(&f)?;
    let ase_g = sbm_block_gaussians(&f, EmbeddingMethod::Ase, r.regime, n, r.sparsity)?;
    let lse_g = sbm_block_gaussians(&f, EmbeddingMethod::Lse, r.regime, n, r.sparsity)?;
    println!("B = {}", fmt_matrix(r.model.block_probs()));
    println!("pi = {:?}", r.model.weights());
    println!("regime = {}, n = {n}", r.regime);
    let mut t = ResultTable::new(&["block", "method", "quantity", "entry_i", "entry_j", "value"]);
    for k in 0..f.n_atoms() {
        let nu = f.atom(k);
        let sig = ase_row_cov(&f, &nu, r.regime)?;
        let sig_t = lse_row_cov(&f, &nu, r.regime)?;
        let nu_t = &nu / nu.dot(&mom.mu).sqrt();
        println!("block {}", k + 1);
        println!("  nu_k        = {}", fmt_vector(&nu));
        println!("  Sigma_k     = {}", fmt_matrix(&sig));
        println!("  nu~_k       = {}", fmt_vector(&nu_t));
        println!("  Sigma~_k    = {}", fmt_matrix(&sig_t));
        println!("  ASE N(mean) = {}, cov = {}", fmt_vector(ase_g[k].mean()), fmt_matrix(ase_g[k].cov()));
        println!("  LSE N(mean) = {}, cov = {}", fmt_vector(lse_g[k].mean()), fmt_matrix(lse_g[k].cov()));
        for m in [EmbeddingMethod::Ase, EmbeddingMethod::Lse] {
            let w = within_block_limit(&f, k, m, r.regime)?;
            println!("  {m} within-block limit n^2 d_kk -> {w:.6e}");
            t.push(vec![Cell::from(k + 1), Cell::text(m.to_string()), Cell::text("within_block"), Cell::Empty, Cell::Empty, Cell::Float(w)]);
        }
        let d = f.dim();
        for (method, name, v) in [
            ("ASE", "sigma", &sig),
            ("LSE", "sigma_tilde", &sig_t),
            ("ASE", "gaussian_cov", ase_g[k].cov()),
            ("LSE", "gaussian_cov", lse_g[k].cov()),
        ] {
            for i in 0..d {
                for j in 0..d {
                    t.push(vec![
                        Cell::from(k + 1),
                        Cell::text(method),
                        Cell::text(name),
                        Cell::from(i + 1),
                        Cell::from(j + 1),
                        Cell::Float(v[(i, j)]),
                    ]);
                }
            }
        }
        for i in 0..d {
            t.push(vec![Cell::from(k + 1), Cell::text("LSE"), Cell::text("nu_tilde"), Cell::from(i + 1), Cell::Empty, Cell::Float(nu_t[i])]);
        }
    }
    let fa = ase_frobenius_limit(&f, r.regime)?;
    let fl = lse_frobenius_limit(&f, r.regime)?;
    println!("ASE Frobenius limit = {fa:.6e}");
    println!("LSE Frobenius limit = {fl:.6e}");
    if let Some(out) = &args.out {
        t.push(vec![Cell::Empty, Cell::text("ASE"), Cell::text("frobenius"), Cell::Empty, Cell::Empty, Cell::Float(fa)]);
        t.push(vec![Cell::Empty, Cell::text("LSE"), Cell::text("frobenius"), Cell::Empty, Cell::Empty, Cell::Float(fl)]);
        let manifest = RunManifest::new(
            "limits",
            None,
            json!({"model_source": r.source, "b": r.model.rows(), "pi": r.model.weights(), "n": n, "regime": r.regime.to_string(), "sparsity": r.sparsity}),
        );
        finish(&t, out, OutputFormat::from_path(out), manifest, started)?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Embed(a) => cmd_embed(a),
        Command::CltCheck(a) => cmd_clt(a),
        Command::FrobeniusCheck(a) => cmd_frobenius(a),
        Command::ClusterExperiment(a) => cmd_cluster(a),
        Command::Chernoff(a) => cmd_chernoff(a),
        Command::RatioGrid(a) => cmd_grid(a),
        Command::Section43(a) => cmd_section43(a),
        Command::Limits(a) => cmd_limits(a),
    }
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
