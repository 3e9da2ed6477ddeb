//! The `bdc` command line: synthetic data generation, prototype building,
//! head training, evaluation, dependence statistics, grid search, and the
//! component ablation.
//!
//! Every run echoes its fully resolved configuration (including the seed)
//! as one `config {...}` line on stdout before doing any work. Failures
//! print a single machine-parsable line on stderr
//! (`error code=<n> kind=<tag> msg="..."`) and exit with code 1 for usage
//! errors, 2 for data/format errors, and 3 for numerical failures.
//!
//! One user-facing `--seed` drives the whole pipeline; independent streams
//! (episode sampling, projection fit, head init, training) are derived from
//! it with fixed role constants, so `gen`/`train`/`eval` runs with equal
//! seeds are reproducible byte for byte.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bdc::{dcorr, dcov_oracle, pearson};
use crate::data::bank::{column_samples, BankItem};
use crate::data::{
    generate_synthetic, load_checkpoint, load_prototypes, read_bank, read_manifest,
    sample_episode, save_checkpoint, save_prototypes, write_bank, write_manifest, write_report,
    Checkpoint, FeatureBank, Manifest, SynthSpec,
};
use crate::error::{Error, Result};
use crate::fewshot::{
    build_prototypes, evaluate, grid_search, make_training_batches, AdapterModel, Episode,
    FusionConfig, PrototypeSet, ScoreMode,
};
use crate::head::{init_from_text, init_random, train, LinearHead, TrainConfig};
use crate::linalg::{split_seed, Matrix};
use crate::reduction::{fit_projection, Projection, ProjectionKind};

/// Role constants for seed derivation.
mod role {
    pub const EPISODE: u64 = 1;
    pub const PROJECTION: u64 = 2;
    pub const TRAIN: u64 = 3;
    pub const INIT: u64 = 4;
}

#[derive(Parser, Debug)]
#[command(
    name = "bdc",
    about = "Distance-covariance representations and few-shot adapter classification over feature banks",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate a synthetic dependence-structured bank and manifest.
    Gen(GenArgs),
    /// Build class prototypes from a bank and save them.
    Prototypes(PrototypesArgs),
    /// Train the reasoning head and save a checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint and write a report.
    Eval(EvalArgs),
    /// Distance covariance / correlation between two column sets of a bank.
    Dcov(DcovArgs),
    /// Grid search over the fusion hyper-parameters.
    Grid(GridArgs),
    /// Three-row component ablation (head init and prototype fusion).
    Ablate(AblateArgs),
}

#[derive(Args, Debug, Serialize)]
struct GenArgs {
    /// Output bank path.
    #[arg(long)]
    out_bank: PathBuf,
    /// Output manifest path.
    #[arg(long)]
    out_manifest: PathBuf,
    #[arg(long, default_value_t = 4)]
    classes: usize,
    /// Train items per class.
    #[arg(long, default_value_t = 8)]
    shots: usize,
    /// Total test queries.
    #[arg(long, default_value_t = 200)]
    queries: usize,
    /// Validation items per class (0 disables the val split).
    #[arg(long, default_value_t = 0)]
    val_per_class: usize,
    #[arg(long, default_value_t = 16)]
    map_rows: usize,
    #[arg(long, default_value_t = 32)]
    map_cols: usize,
    #[arg(long, default_value_t = 0.15)]
    noise: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct ProjectionArgs {
    /// Projection output dimension; defaults to min(64, map rows).
    #[arg(long)]
    proj_dim: Option<usize>,
    #[arg(long, value_enum, default_value_t = ProjKindArg::RandomOrthogonal)]
    proj_kind: ProjKindArg,
    /// Transpose feature maps on load (swaps which axis is treated as
    /// observations).
    #[arg(long, default_value_t = false)]
    transpose_maps: bool,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
enum ProjKindArg {
    RandomOrthogonal,
    Pca,
}

impl From<ProjKindArg> for ProjectionKind {
    fn from(k: ProjKindArg) -> Self {
        match k {
            ProjKindArg::RandomOrthogonal => ProjectionKind::RandomOrthogonal,
            ProjKindArg::Pca => ProjectionKind::Pca,
        }
    }
}

#[derive(Args, Debug, Serialize)]
struct PrototypesArgs {
    #[arg(long)]
    bank: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    /// Output prototype file.
    #[arg(long)]
    out: PathBuf,
    /// Support shots per class.
    #[arg(long, default_value_t = 8)]
    shots: usize,
    #[command(flatten)]
    #[serde(flatten)]
    projection: ProjectionArgs,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct TrainArgs {
    #[arg(long)]
    bank: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    /// Output checkpoint path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 8)]
    shots: usize,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 0.01)]
    wd: f64,
    #[arg(long, default_value_t = 0.9)]
    beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    /// Image samples per step; defaults to the shot count.
    #[arg(long)]
    n1: Option<usize>,
    /// Text samples per step; defaults to the whole text pool.
    #[arg(long)]
    n2: Option<usize>,
    /// Initialize the head randomly instead of from text features.
    #[arg(long, default_value_t = false)]
    no_text_init: bool,
    #[command(flatten)]
    #[serde(flatten)]
    projection: ProjectionArgs,
    /// Residual ratio stored in the checkpoint.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Sharpness stored in the checkpoint.
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Zero-shot softmax temperature stored in the checkpoint.
    #[arg(long, default_value_t = 0.01)]
    tau: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct EvalArgs {
    #[arg(long)]
    bank: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Output report path (JSON lines).
    #[arg(long)]
    out_report: PathBuf,
    /// Override the stored residual ratio; `inf` ranks by prototype scores
    /// alone.
    #[arg(long)]
    alpha: Option<f64>,
    /// Override the stored sharpness.
    #[arg(long)]
    delta: Option<f64>,
    /// Override the stored temperature.
    #[arg(long)]
    tau: Option<f64>,
    /// Load prototypes from a file instead of rebuilding from the bank.
    #[arg(long)]
    prototypes: Option<PathBuf>,
    /// Transpose feature maps on load.
    #[arg(long, default_value_t = false)]
    transpose_maps: bool,
}

#[derive(Args, Debug, Serialize)]
struct DcovArgs {
    #[arg(long)]
    bank: PathBuf,
    /// Restrict to a manifest split.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Split filter: train, val, test or all.
    #[arg(long, default_value = "all")]
    split: String,
    /// Restrict to one class label.
    #[arg(long)]
    class: Option<u32>,
    /// Comma-separated map column indices forming the X sample.
    #[arg(long)]
    x_cols: String,
    /// Comma-separated map column indices forming the Y sample.
    #[arg(long)]
    y_cols: String,
}

#[derive(Args, Debug, Serialize)]
struct GridArgs {
    #[arg(long)]
    bank: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Comma-separated alpha grid.
    #[arg(long, default_value = "0,0.25,0.5,1,2,4,8")]
    alpha_grid: String,
    /// Comma-separated delta grid.
    #[arg(long, default_value = "0.25,0.5,1,2,4")]
    delta_grid: String,
    /// Optional score-table output (JSON lines).
    #[arg(long)]
    out_table: Option<PathBuf>,
    /// Transpose feature maps on load.
    #[arg(long, default_value_t = false)]
    transpose_maps: bool,
}

#[derive(Args, Debug, Serialize)]
struct AblateArgs {
    #[arg(long)]
    bank: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    /// Optional three-row table output (JSON lines).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    shots: usize,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 0.01)]
    wd: f64,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    projection: ProjectionArgs,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    #[arg(long, default_value_t = 0.01)]
    tau: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

/// Run the CLI on explicit arguments (the first one is the program name)
/// and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = err.print();
                return 0;
            }
            let first_line = err.to_string().lines().next().unwrap_or("bad usage").to_string();
            report_failure(&Error::Usage(first_line));
            return 1;
        }
    };
    let outcome = match cli.cmd {
        Cmd::Gen(args) => cmd_gen(args),
        Cmd::Prototypes(args) => cmd_prototypes(args),
        Cmd::Train(args) => cmd_train(args),
        Cmd::Eval(args) => cmd_eval(args),
        Cmd::Dcov(args) => cmd_dcov(args),
        Cmd::Grid(args) => cmd_grid(args),
        Cmd::Ablate(args) => cmd_ablate(args),
    };
    match outcome {
        Ok(()) => 0,
        Err(err) => {
            report_failure(&err);
            err.exit_code()
        }
    }
}

/// Entry point for the binary: reads `std::env::args_os()`.
pub fn run_from_env() -> i32 {
    run(std::env::args_os())
}

fn report_failure(err: &Error) {
    let msg = serde_json::to_string(&err.to_string())
        .unwrap_or_else(|_| format!("{:?}", err.to_string()));
    eprintln!("error code={} kind={} msg={}", err.exit_code(), err.kind(), msg);
}

fn echo_config<T: Serialize>(cmd: &str, args: &T) -> Result<()> {
    let value = serde_json::json!({ "cmd": cmd, "args": args });
    println!("config {}", serde_json::to_string(&value)?);
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    echo_config("gen", &args)?;
    let spec = SynthSpec {
        classes: args.classes,
        shots: args.shots,
        queries: args.queries,
        val_per_class: args.val_per_class,
        map_rows: args.map_rows,
        map_cols: args.map_cols,
        noise: args.noise,
        seed: args.seed,
    };
    let (bank, manifest) = generate_synthetic(&spec)?;
    write_bank(&args.out_bank, &bank)?;
    write_manifest(&args.out_manifest, &manifest)?;
    println!(
        "wrote {}",
        serde_json::json!({
            "bank": args.out_bank,
            "manifest": args.out_manifest,
            "items": bank.len(),
            "classes": manifest.class_names.len(),
            "train": manifest.splits.train.len(),
            "val": manifest.splits.val.len(),
            "test": manifest.splits.test.len(),
        })
    );
    Ok(())
}

fn load_inputs(bank: &PathBuf, manifest: &PathBuf) -> Result<(FeatureBank, Manifest)> {
    let bank = read_bank(bank)?;
    let manifest = read_manifest(manifest)?;
    manifest.validate(&bank)?;
    Ok((bank, manifest))
}

fn transpose_episode(episode: &mut Episode) {
    for item in &mut episode.support {
        item.map = item.map.transposed();
    }
    for item in &mut episode.queries {
        item.map = item.map.transposed();
    }
}

/// Sample the support episode and fit the projection on it.
fn episode_and_projection(
    bank: &FeatureBank,
    manifest: &Manifest,
    shots: usize,
    seed: u64,
    proj: &ProjectionArgs,
) -> Result<(Episode, Projection, usize)> {
    let mut episode = sample_episode(bank, manifest, shots, split_seed(seed, role::EPISODE))?;
    if proj.transpose_maps {
        transpose_episode(&mut episode);
    }
    let in_dim = episode
        .support
        .first()
        .map(|s| s.map.rows())
        .ok_or_else(|| Error::InvalidParameter("empty support set".into()))?;
    let proj_dim = proj.proj_dim.unwrap_or_else(|| in_dim.min(64));
    let kind: ProjectionKind = proj.proj_kind.into();
    let fit_data = if kind == ProjectionKind::Pca {
        // PCA fits on the pooled observation columns of the support maps.
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for item in &episode.support {
            for c in 0..item.map.cols() {
                rows.push(item.map.col(c));
            }
        }
        Some(Matrix::from_rows(&rows)?)
    } else {
        None
    };
    let projection = fit_projection(
        kind,
        in_dim,
        proj_dim,
        fit_data.as_ref(),
        split_seed(seed, role::PROJECTION),
    )?;
    Ok((episode, projection, proj_dim))
}

fn cmd_prototypes(mut args: PrototypesArgs) -> Result<()> {
    let (bank, manifest) = load_inputs(&args.bank, &args.manifest)?;
    let (episode, projection, resolved_dim) =
        episode_and_projection(&bank, &manifest, args.shots, args.seed, &args.projection)?;
    args.projection.proj_dim = Some(resolved_dim);
    echo_config("prototypes", &args)?;
    let protos = build_prototypes(&episode, &projection, true)?;
    save_prototypes(&args.out, &protos)?;
    println!(
        "wrote {}",
        serde_json::json!({
            "prototypes": args.out,
            "classes": protos.num_classes(),
            "matrix_side": protos.matrix_side(),
            "vector_dim": protos.matrix_side() * protos.matrix_side(),
        })
    );
    Ok(())
}

struct TrainedParts {
    episode: Episode,
    projection: Projection,
    head: LinearHead,
    trace: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn train_head_on_episode(
    bank: &FeatureBank,
    manifest: &Manifest,
    shots: usize,
    seed: u64,
    proj: &ProjectionArgs,
    epochs: usize,
    lr: f64,
    wd: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    n1: Option<usize>,
    n2: Option<usize>,
    text_init: bool,
) -> Result<(TrainedParts, TrainConfig)> {
    let n = manifest.class_names.len();
    let (episode, projection, _) = episode_and_projection(bank, manifest, shots, seed, proj)?;
    let (text_pool, text_labels) = bank.text_features(n)?;
    let embed_dim = bank.dim();
    let head0 = if text_init {
        init_from_text(&bank.class_text_matrix(n)?)?
    } else {
        init_random(n, embed_dim, split_seed(seed, role::INIT))
    };
    let cfg = TrainConfig {
        epochs,
        base_lr: lr,
        weight_decay: wd,
        beta1,
        beta2,
        eps,
        images_per_batch: n1.unwrap_or(shots),
        texts_per_batch: n2.unwrap_or(text_pool.rows()),
        seed: split_seed(seed, role::TRAIN),
    };
    let batches = make_training_batches(&episode.support, &text_pool, &text_labels, n, &cfg)?;
    let (head, trace) = train(head0, &batches, &cfg)?;
    Ok((
        TrainedParts {
            episode,
            projection,
            head,
            trace,
        },
        cfg,
    ))
}

fn cmd_train(mut args: TrainArgs) -> Result<()> {
    let (bank, manifest) = load_inputs(&args.bank, &args.manifest)?;
    let fusion = FusionConfig {
        alpha: args.alpha,
        delta: args.delta,
        tau: args.tau,
    };
    fusion.validate()?;
    let (parts, cfg) = train_head_on_episode(
        &bank,
        &manifest,
        args.shots,
        args.seed,
        &args.projection,
        args.epochs,
        args.lr,
        args.wd,
        args.beta1,
        args.beta2,
        args.eps,
        args.n1,
        args.n2,
        !args.no_text_init,
    )?;
    args.n1 = Some(cfg.images_per_batch);
    args.n2 = Some(cfg.texts_per_batch);
    args.projection.proj_dim = Some(parts.projection.out_dim());
    echo_config("train", &args)?;
    let checkpoint = Checkpoint {
        head: parts.head,
        projection: parts.projection,
        fusion,
        shots: args.shots,
        seed: args.seed,
    };
    save_checkpoint(&args.out, &checkpoint)?;
    println!(
        "trained {}",
        serde_json::json!({
            "checkpoint": args.out,
            "epochs": args.epochs,
            "first_epoch_loss": parts.trace.first(),
            "final_epoch_loss": parts.trace.last(),
        })
    );
    Ok(())
}

fn resolve_fusion(stored: FusionConfig, alpha: Option<f64>, delta: Option<f64>, tau: Option<f64>) -> Result<FusionConfig> {
    let fusion = FusionConfig {
        alpha: alpha.unwrap_or(stored.alpha),
        delta: delta.unwrap_or(stored.delta),
        tau: tau.unwrap_or(stored.tau),
    };
    if fusion.alpha.is_nan() || fusion.alpha < 0.0 {
        return Err(Error::InvalidParameter("alpha must be >= 0 (or inf)".into()));
    }
    if fusion.delta.is_nan() || fusion.delta <= 0.0 || fusion.tau.is_nan() || fusion.tau <= 0.0 {
        return Err(Error::InvalidParameter("delta and tau must be > 0".into()));
    }
    Ok(fusion)
}

fn rebuild_model(
    bank: &FeatureBank,
    manifest: &Manifest,
    checkpoint: &Checkpoint,
    transpose: bool,
    prototypes: Option<&PathBuf>,
) -> Result<(Episode, AdapterModel)> {
    let mut episode = sample_episode(
        bank,
        manifest,
        checkpoint.shots,
        split_seed(checkpoint.seed, role::EPISODE),
    )?;
    if transpose {
        transpose_episode(&mut episode);
    }
    let protos: PrototypeSet = match prototypes {
        Some(path) => load_prototypes(path)?,
        None => build_prototypes(&episode, &checkpoint.projection, true)?,
    };
    let model = AdapterModel {
        projection: checkpoint.projection.clone(),
        head: checkpoint.head.clone(),
        prototypes: protos,
        fusion: checkpoint.fusion,
    };
    Ok((episode, model))
}

fn cmd_eval(mut args: EvalArgs) -> Result<()> {
    let (bank, manifest) = load_inputs(&args.bank, &args.manifest)?;
    let checkpoint = load_checkpoint(&args.checkpoint)?;
    let fusion = resolve_fusion(checkpoint.fusion, args.alpha, args.delta, args.tau)?;
    args.alpha = Some(fusion.alpha);
    args.delta = Some(fusion.delta);
    args.tau = Some(fusion.tau);
    echo_config("eval", &args)?;
    let (episode, mut model) = rebuild_model(
        &bank,
        &manifest,
        &checkpoint,
        args.transpose_maps,
        args.prototypes.as_ref(),
    )?;
    model.fusion = fusion;
    let report = evaluate(&episode, &model, ScoreMode::Fused)?;
    write_report(&args.out_report, &report)?;
    println!(
        "evaluated {}",
        serde_json::json!({
            "report": args.out_report,
            "accuracy": report.overall,
            "queries": report.records.len(),
        })
    );
    Ok(())
}

fn parse_index_list(s: &str) -> Result<Vec<usize>> {
    let cols: std::result::Result<Vec<usize>, _> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect();
    let cols = cols.map_err(|e| Error::Usage(format!("bad index list {:?}: {}", s, e)))?;
    if cols.is_empty() {
        return Err(Error::Usage(format!("empty index list {:?}", s)));
    }
    Ok(cols)
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    let values: std::result::Result<Vec<f64>, _> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect();
    let values = values.map_err(|e| Error::Usage(format!("bad number list {:?}: {}", s, e)))?;
    if values.is_empty() {
        return Err(Error::Usage(format!("empty number list {:?}", s)));
    }
    Ok(values)
}

fn cmd_dcov(args: DcovArgs) -> Result<()> {
    echo_config("dcov", &args)?;
    let bank = read_bank(&args.bank)?;
    let manifest = match &args.manifest {
        Some(path) => {
            let m = read_manifest(path)?;
            m.validate(&bank)?;
            Some(m)
        }
        None => None,
    };
    let split_ids: Option<Vec<&String>> = match (args.split.as_str(), &manifest) {
        ("all", _) => None,
        (_, None) => {
            return Err(Error::Usage(
                "--split needs --manifest to resolve split membership".into(),
            ))
        }
        ("train", Some(m)) => Some(m.splits.train.iter().collect()),
        ("val", Some(m)) => Some(m.splits.val.iter().collect()),
        ("test", Some(m)) => Some(m.splits.test.iter().collect()),
        (other, _) => {
            return Err(Error::Usage(format!(
                "unknown split {:?} (expected train, val, test or all)",
                other
            )))
        }
    };
    let items: Vec<&BankItem> = bank
        .items()
        .iter()
        .filter(|item| item.map.is_some())
        .filter(|item| match &split_ids {
            None => true,
            Some(ids) => ids.contains(&&item.id),
        })
        .filter(|item| args.class.is_none_or(|c| item.label == c))
        .collect();
    let x_cols = parse_index_list(&args.x_cols)?;
    let y_cols = parse_index_list(&args.y_cols)?;
    let x = column_samples(&items, &x_cols)?;
    let y = column_samples(&items, &y_cols)?;
    let dcov = dcov_oracle(&x, &y)?;
    let dcorr_value = dcorr(&x, &y)?;
    let pearson_value = if x_cols.len() == 1 && y_cols.len() == 1 {
        Some(pearson(&x.col(0), &y.col(0))?)
    } else {
        None
    };
    println!(
        "dcov {}",
        serde_json::json!({
            "n": x.rows(),
            "dcov": dcov,
            "dcorr": dcorr_value,
            "pearson": pearson_value,
        })
    );
    Ok(())
}

fn cmd_grid(args: GridArgs) -> Result<()> {
    echo_config("grid", &args)?;
    let (bank, manifest) = load_inputs(&args.bank, &args.manifest)?;
    let checkpoint = load_checkpoint(&args.checkpoint)?;
    let alphas = parse_f64_list(&args.alpha_grid)?;
    let deltas = parse_f64_list(&args.delta_grid)?;

    // Validate on the val split when present, otherwise fall back to test.
    let validation = if manifest.splits.val.is_empty() {
        eprintln!("warning: no val split in manifest; grid search scores on the test split");
        manifest.clone()
    } else {
        let mut m = manifest.clone();
        m.splits.test = m.splits.val.clone();
        m.splits.val = Vec::new();
        m
    };
    let (episode, model) = rebuild_model(
        &bank,
        &validation,
        &checkpoint,
        args.transpose_maps,
        None,
    )?;
    let (best, rows) = grid_search(&alphas, &deltas, &episode, &model)?;
    if let Some(path) = &args.out_table {
        crate::data::report::write_json_lines(path, &rows)?;
    }
    println!(
        "grid {}",
        serde_json::json!({
            "best_alpha": best.alpha,
            "best_delta": best.delta,
            "rows": rows.len(),
            "table": args.out_table,
        })
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct AblationRow {
    row: usize,
    name: &'static str,
    accuracy: f64,
}

fn cmd_ablate(mut args: AblateArgs) -> Result<()> {
    let (bank, manifest) = load_inputs(&args.bank, &args.manifest)?;
    let fusion = FusionConfig {
        alpha: args.alpha,
        delta: args.delta,
        tau: args.tau,
    };
    fusion.validate()?;

    let mut rows: Vec<AblationRow> = Vec::with_capacity(3);
    let mut with_init: Option<TrainedParts> = None;
    for text_init in [false, true] {
        let (parts, cfg) = train_head_on_episode(
            &bank,
            &manifest,
            args.shots,
            args.seed,
            &args.projection,
            args.epochs,
            args.lr,
            args.wd,
            0.9,
            0.999,
            1e-8,
            args.n1,
            args.n2,
            text_init,
        )?;
        if rows.is_empty() {
            args.n1 = Some(cfg.images_per_batch);
            args.n2 = Some(cfg.texts_per_batch);
            args.projection.proj_dim = Some(parts.projection.out_dim());
            echo_config("ablate", &args)?;
        }
        let protos = build_prototypes(&parts.episode, &parts.projection, true)?;
        let model = AdapterModel {
            projection: parts.projection.clone(),
            head: parts.head.clone(),
            prototypes: protos,
            fusion: FusionConfig {
                alpha: 0.0,
                ..fusion
            },
        };
        let report = evaluate(&parts.episode, &model, ScoreMode::Fused)?;
        rows.push(AblationRow {
            row: rows.len() + 1,
            name: if text_init {
                "MRN w/ init"
            } else {
                "MRN w/o init"
            },
            accuracy: report.overall,
        });
        if text_init {
            with_init = Some(parts);
        }
    }
    let parts = with_init.expect("text-init pass ran");
    let protos = build_prototypes(&parts.episode, &parts.projection, true)?;
    let model = AdapterModel {
        projection: parts.projection,
        head: parts.head,
        prototypes: protos,
        fusion,
    };
    let report = evaluate(&parts.episode, &model, ScoreMode::Fused)?;
    rows.push(AblationRow {
        row: 3,
        name: "MRN+BDC",
        accuracy: report.overall,
    });

    for row in &rows {
        println!(
            "ablate row={} name={:?} accuracy={}",
            row.row, row.name, row.accuracy
        );
    }
    if let Some(path) = &args.out {
        crate::data::report::write_json_lines(path, &rows)?;
    }
    Ok(())
}
