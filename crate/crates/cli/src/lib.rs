//! Subcommands of the `adgcl` binary.
//!
//! Each subcommand writes its outputs plus a `manifest.json` holding the
//! resolved configuration and seed. Errors map to exit codes: 2 for bad
//! parameters or configs, 3 for file problems, 4 for numerical failure.

use std::fs;
use std::path::{Path, PathBuf};

use adgcl::augment::ScoreWindow;
use adgcl::checkpoint::{load_checkpoint, save_checkpoint};
use adgcl::config::{load_config, StratifyMode};
use adgcl::inject::{default_clique_count, inject_benchmark, InjectionManifest, DEFAULT_CLIQUE_SIZE, DEFAULT_K_CANDIDATES};
use adgcl::io::{load_dataset, read_edges, read_labels, read_scores, write_scores};
use adgcl::graph::partition_by_degree;
use adgcl::metrics::stratified_eval;
use adgcl::objective::LossBreakdown;
use adgcl::sampling::rng_from_seed;
use adgcl::scoring::anomaly_scores;
use adgcl::synthetic::{citation_graph, CitationSpec};
use adgcl::trainer::{train, write_log, EpochRecord, TrainObserver};
use adgcl::{AttributedGraph, DatasetBundle, Error, EvalReport, RunConfig};
use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const WINDOW_FILE: &str = "window.json";
pub const LOG_FILE: &str = "train_log.ndjson";
pub const CONFIG_FILE: &str = "resolved_config.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const REPORT_FILE: &str = "report.json";
pub const DEGREE_FILE: &str = "degree_auc.csv";
pub const SCORES_FILE: &str = "scores.csv";
pub const COMPARISON_FILE: &str = "comparison.csv";

#[derive(Debug, Parser)]
#[command(name = "adgcl", version, about = "Degree-aware contrastive graph anomaly detection")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inject structural and contextual anomalies into a clean graph.
    Inject(InjectArgs),
    /// Train a model and write its checkpoint.
    Train(TrainArgs),
    /// Score every node with a trained model.
    Score(ScoreArgs),
    /// Compute overall and degree-stratified metrics.
    Eval(EvalArgs),
    /// Train, score and evaluate the full model and its four ablations.
    Ablate(AblateArgs),
    /// Write a seeded citation-style graph (2708 nodes, 5429 edges).
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct InjectArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Dataset name used to pick the default clique count.
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long, default_value_t = DEFAULT_CLIQUE_SIZE)]
    pub clique_size: usize,
    #[arg(long)]
    pub clique_count: Option<usize>,
    /// Contextual anomalies; defaults to clique size times clique count.
    #[arg(long)]
    pub feature_count: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_K_CANDIDATES)]
    pub k_candidates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Config to score with; defaults to the one saved beside the checkpoint.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub rounds: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = StratifyArg::WithinStratum)]
    pub stratify_mode: StratifyArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum StratifyArg {
    WithinStratum,
    StratumVsAllNormals,
}

impl From<StratifyArg> for StratifyMode {
    fn from(a: StratifyArg) -> Self {
        match a {
            StratifyArg::WithinStratum => StratifyMode::WithinStratum,
            StratifyArg::StratumVsAllNormals => StratifyMode::StratumVsAllNormals,
        }
    }
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// A failed subcommand and the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parameter(_) | Error::Config(_) | Error::Input(_) | Error::Contract(_) | Error::UndefinedMetric(_) => 2,
            Error::Parse { .. } | Error::Consistency(_) | Error::Checkpoint(_) | Error::Io { .. } => 3,
            Error::NonFinite(_) => 4,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError {
        code: 2,
        message: msg.into(),
    }
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e).into())
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| Error::io(path, e).into())
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult {
    write_text(path, &(serde_json::to_string_pretty(value).expect("serializable") + "\n"))
}

fn manifest(command: &str, seed: u64, config: Option<&RunConfig>, extra: serde_json::Value) -> serde_json::Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "config": config,
        "parameters": extra,
    })
}

fn resolve_config(path: Option<&Path>) -> CliResult<RunConfig> {
    Ok(match path {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    })
}

#[derive(Serialize, Deserialize)]
struct WindowSnapshot {
    filled_epochs: usize,
    rows: Vec<Vec<f64>>,
}

pub fn save_window(window: &ScoreWindow, path: &Path) -> CliResult {
    let snapshot = WindowSnapshot {
        filled_epochs: window.filled_epochs(),
        rows: window.matrix().rows().into_iter().map(|r| r.to_vec()).collect(),
    };
    write_text(path, &serde_json::to_string(&snapshot).expect("serializable"))
}

pub fn load_window(path: &Path) -> CliResult<ScoreWindow> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let bad = |m: String| CliError::from(Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: m,
    });
    let snap: WindowSnapshot = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let cols = snap.rows.first().map_or(0, Vec::len);
    if snap.rows.iter().any(|r| r.len() != cols) {
        return Err(bad("ragged window rows".into()));
    }
    let flat: Vec<f64> = snap.rows.into_iter().flatten().collect();
    let matrix = Array2::from_shape_vec((flat.len() / cols.max(1), cols), flat).map_err(|e| bad(e.to_string()))?;
    ScoreWindow::from_matrix(matrix, snap.filled_epochs).map_err(|e| bad(e.to_string()))
}

struct LogObserver;

impl TrainObserver for LogObserver {
    fn on_epoch(&mut self, record: &EpochRecord, _loss: &LossBreakdown) {
        log::info!(
            "epoch {} stage {} intra {:.6} inter {:.6} total {:.6}",
            record.epoch,
            record.stage,
            record.intra,
            record.inter,
            record.total
        );
    }
}

pub fn run(cli: Cli) -> CliResult {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be positive"));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match cli.command {
        Command::Inject(a) => cmd_inject(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Score(a) => cmd_score(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Ablate(a) => cmd_ablate(&a),
        Command::Synth(a) => cmd_synth(&a),
    }
}

pub fn cmd_inject(a: &InjectArgs) -> CliResult {
    let bundle = load_dataset(&a.graph, &a.features, None)?;
    let dataset = a.dataset.clone().unwrap_or_else(|| bundle.name.clone());
    let clique_count = match a.clique_count {
        Some(q) => q,
        None => default_clique_count(&dataset)
            .ok_or_else(|| usage(format!("no default clique count for dataset {dataset:?}; pass --clique-count")))?,
    };
    let feature_count = a.feature_count.unwrap_or(a.clique_size * clique_count);
    let (graph, labels) = inject_benchmark(
        &bundle.graph,
        a.clique_size,
        clique_count,
        feature_count,
        a.k_candidates,
        &mut rng_from_seed(a.seed),
    )?;
    let kinds = labels.kinds();
    let structural = kinds.iter().filter(|k| k.as_str() == "structural").count();
    let feature = kinds.iter().filter(|k| k.as_str() == "feature").count();
    let record = InjectionManifest {
        clique_size: a.clique_size,
        clique_count,
        feature_count,
        k_candidates: a.k_candidates,
        seed: a.seed,
        nodes: graph.n(),
        structural_anomalies: structural,
        feature_anomalies: feature,
        anomaly_rate: labels.anomaly_count() as f64 / graph.n() as f64,
    };
    DatasetBundle::new(dataset.clone(), graph, Some(labels))?.save_dir(&a.out_dir)?;
    write_json(
        &a.out_dir.join(MANIFEST_FILE),
        &manifest("inject", a.seed, None, json!({ "dataset": dataset, "injection": record })),
    )?;
    log::info!("injected {} anomalies into {} nodes", structural + feature, record.nodes);
    Ok(())
}

fn load_data_dir(dir: &Path) -> CliResult<DatasetBundle> {
    if !dir.is_dir() {
        return Err(Error::io(dir, std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory")).into());
    }
    Ok(DatasetBundle::load_dir(dir)?)
}

/// Trains on `bundle` and writes checkpoint, window, log and config into `out`.
fn train_into(bundle: &DatasetBundle, config: &RunConfig, out: &Path) -> CliResult {
    create_dir(out)?;
    let outcome = train(bundle, config, &mut LogObserver)?;
    save_checkpoint(&outcome.params, &out.join(CHECKPOINT_FILE))?;
    save_window(&outcome.window, &out.join(WINDOW_FILE))?;
    write_log(&outcome.log, &out.join(LOG_FILE))?;
    write_text(&out.join(CONFIG_FILE), &(config.to_json() + "\n"))?;
    Ok(())
}

pub fn cmd_train(a: &TrainArgs) -> CliResult {
    let config = resolve_config(a.config.as_deref())?;
    let bundle = load_data_dir(&a.data)?;
    train_into(&bundle, &config, &a.out)?;
    write_json(
        &a.out.join(MANIFEST_FILE),
        &manifest("train", config.seed, Some(&config), json!({ "data": a.data })),
    )
}

fn score_bundle(
    bundle: &DatasetBundle,
    checkpoint: &Path,
    window: Option<&ScoreWindow>,
    config: &RunConfig,
    rounds: usize,
    seed: u64,
) -> CliResult<Vec<f64>> {
    let params = load_checkpoint(checkpoint)?;
    Ok(anomaly_scores(&bundle.graph, &params, rounds, seed, config, window)?)
}

pub fn cmd_score(a: &ScoreArgs) -> CliResult {
    let beside = a.checkpoint.parent().map(|p| p.join(CONFIG_FILE));
    let config_path = a.config.clone().or_else(|| beside.filter(|p| p.exists()));
    let config = resolve_config(config_path.as_deref())?;
    let rounds = a.rounds.unwrap_or(config.r);
    let seed = a.seed.unwrap_or(config.seed);
    let bundle = load_data_dir(&a.data)?;
    let window_path = a.checkpoint.parent().map(|p| p.join(WINDOW_FILE));
    let window = match window_path.filter(|p| p.exists()) {
        Some(p) => Some(load_window(&p)?),
        None => None,
    };
    let scores = score_bundle(&bundle, &a.checkpoint, window.as_ref(), &config, rounds, seed)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_scores(&scores, &a.out)?;
    let mut manifest_path = a.out.clone().into_os_string();
    manifest_path.push(".manifest.json");
    write_json(
        Path::new(&manifest_path),
        &manifest(
            "score",
            seed,
            Some(&config),
            json!({ "data": a.data, "checkpoint": a.checkpoint, "rounds": rounds }),
        ),
    )
}

fn evaluate(scores: &[f64], graph: &AttributedGraph, labels: &[bool], k: usize, mode: StratifyMode) -> CliResult<EvalReport> {
    let partition = partition_by_degree(graph, k)?;
    let report = stratified_eval(scores, labels, &partition, &graph.degrees(), mode)?;
    if report.auc.is_none() {
        log::warn!("labels hold a single class; metrics are reported as null");
    }
    Ok(report)
}

fn write_report(report: &EvalReport, dir: &Path) -> CliResult {
    create_dir(dir)?;
    report.write_json(&dir.join(REPORT_FILE))?;
    report.write_degree_csv(&dir.join(DEGREE_FILE))?;
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs) -> CliResult {
    let scores = read_scores(&a.scores)?;
    let n = scores.len();
    let labels = read_labels(&a.labels, n)?;
    let edges = read_edges(&a.graph)?;
    if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= n || v >= n) {
        return Err(Error::Consistency(format!("edge ({u}, {v}) but only {n} scores")).into());
    }
    let graph = AttributedGraph::from_edges(&edges, Array2::zeros((n, 0)))?;
    let report = evaluate(&scores, &graph, labels.flags(), a.k, a.stratify_mode.into())?;
    write_report(&report, &a.out)?;
    write_json(
        &a.out.join(MANIFEST_FILE),
        &manifest(
            "eval",
            0,
            None,
            json!({ "scores": a.scores, "labels": a.labels, "graph": a.graph, "k": a.k, "stratify_mode": StratifyMode::from(a.stratify_mode) }),
        ),
    )
}

/// Ablation variants in report order.
pub const VARIANTS: [&str; 5] = ["full", "wo_np", "wo_nc", "wo_intra", "wo_inter"];

pub fn variant_config(base: &RunConfig, name: &str) -> RunConfig {
    let mut c = base.clone();
    match name {
        "wo_np" => c.disable_np = true,
        "wo_nc" => c.disable_nc = true,
        "wo_intra" => c.disable_intra = true,
        "wo_inter" => c.disable_inter = true,
        _ => {}
    }
    c
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.17e}"))
}

/// Trains, scores and evaluates one configuration into `dir`.
pub fn run_variant(bundle: &DatasetBundle, config: &RunConfig, dir: &Path) -> CliResult<EvalReport> {
    let labels = bundle
        .labels
        .as_ref()
        .ok_or_else(|| CliError::from(Error::Consistency(format!("dataset {} has no labels", bundle.name))))?;
    train_into(bundle, config, dir)?;
    let window = load_window(&dir.join(WINDOW_FILE))?;
    let scores = score_bundle(bundle, &dir.join(CHECKPOINT_FILE), Some(&window), config, config.r, config.seed)?;
    write_scores(&scores, &dir.join(SCORES_FILE))?;
    let mut report = evaluate(&scores, &bundle.graph, labels.flags(), config.k_threshold, config.stratify_mode)?;
    report.n_rounds = Some(config.r);
    write_report(&report, dir)?;
    Ok(report)
}

pub fn cmd_ablate(a: &AblateArgs) -> CliResult {
    let base = resolve_config(a.config.as_deref())?;
    let bundle = load_data_dir(&a.data)?;
    create_dir(&a.out)?;
    let mut table = String::from("variant,auc,auprc,ap,tail_auc,head_auc,regression_slope\n");
    for name in VARIANTS {
        log::info!("ablation variant {name}");
        let r = run_variant(&bundle, &variant_config(&base, name), &a.out.join(name))?;
        table.push_str(&format!(
            "{name},{},{},{},{},{},{}\n",
            opt(r.auc),
            opt(r.auprc),
            opt(r.ap),
            opt(r.tail_auc),
            opt(r.head_auc),
            opt(r.regression_slope)
        ));
    }
    write_text(&a.out.join(COMPARISON_FILE), &table)?;
    write_json(
        &a.out.join(MANIFEST_FILE),
        &manifest("ablate", base.seed, Some(&base), json!({ "data": a.data, "variants": VARIANTS })),
    )
}

pub fn cmd_synth(a: &SynthArgs) -> CliResult {
    let graph = citation_graph(&CitationSpec::cora_like(), &mut rng_from_seed(a.seed));
    DatasetBundle::new("synthetic", graph, None)?.save_dir(&a.out_dir)?;
    write_json(&a.out_dir.join(MANIFEST_FILE), &manifest("synth", a.seed, None, json!({ "generator": "cora_like" })))
}
