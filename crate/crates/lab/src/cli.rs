//! The `vqlip` command-line interface.
//!
//! Six subcommands drive the pipeline: `generate-data`, `train`,
//! `robustness`, `sweep`, `predict-export` and `bifurcation`. Every
//! config-driven command reads one TOML study file (desk-scale defaults
//! when `--config` is omitted), applies flag overrides, writes its outputs
//! into `--out` and prints a one-line summary.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use vqlip_core::dataset::bifurcation_table;
use vqlip_core::gradients::GradientMethod;
use vqlip_core::training::train;

use crate::config::StudyConfig;
use crate::harness::{
    export_predictions, run_generalization_sweep, run_robustness_study, StudyContext,
};
use crate::io;

#[derive(Debug, Parser)]
#[command(name = "vqlip", version, about = "Lipschitz-regularized variational quantum models on logistic-map time series")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the logistic-map dataset and write it plus its train/test split as CSV
    GenerateData(GenerateDataArgs),
    /// Train one model and write its run record, trace and checkpoint
    Train(TrainArgs),
    /// Worst-case-MSE robustness study across noise levels, seeds and variants
    Robustness(RobustnessArgs),
    /// Generalization sweep over regularization strengths
    Sweep(SweepArgs),
    /// Export predicted-versus-true values for a trained checkpoint
    PredictExport(PredictExportArgs),
    /// Export a bifurcation diagram table of the logistic map
    Bifurcation(BifurcationArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Study configuration (TOML); desk-scale defaults when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GradientMethodArg {
    Adjoint,
    ParameterShift,
}

impl From<GradientMethodArg> for GradientMethod {
    fn from(value: GradientMethodArg) -> Self {
        match value {
            GradientMethodArg::Adjoint => GradientMethod::Adjoint,
            GradientMethodArg::ParameterShift => GradientMethod::ParameterShift,
        }
    }
}

#[derive(Debug, Args)]
struct GenerateDataArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Total sample count override
    #[arg(long)]
    count: Option<usize>,
    /// Training sample count override
    #[arg(long)]
    train_count: Option<usize>,
    /// Split seed override
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Regularization strength override
    #[arg(long)]
    lambda: Option<f64>,
    /// Initialization seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Epoch count override
    #[arg(long)]
    epochs: Option<usize>,
    /// Freeze the encoding weights at their initial values
    #[arg(long)]
    fixed_encoding: bool,
    /// Gradient implementation
    #[arg(long, value_enum)]
    gradient_method: Option<GradientMethodArg>,
}

#[derive(Debug, Args)]
struct RobustnessArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated training seeds override
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Comma-separated noise levels override
    #[arg(long, value_delimiter = ',')]
    epsilon_grid: Option<Vec<f64>>,
    /// Epoch count override
    #[arg(long)]
    epochs: Option<usize>,
    /// Gradient implementation
    #[arg(long, value_enum)]
    gradient_method: Option<GradientMethodArg>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated training seeds override
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Epoch count override
    #[arg(long)]
    epochs: Option<usize>,
    /// Gradient implementation
    #[arg(long, value_enum)]
    gradient_method: Option<GradientMethodArg>,
}

#[derive(Debug, Args)]
struct PredictExportArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Model checkpoint (model.json from a training run)
    #[arg(long)]
    model: PathBuf,
}

#[derive(Debug, Args)]
struct BifurcationArgs {
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    r_min: f64,
    #[arg(long, default_value_t = 4.0)]
    r_max: f64,
    /// Number of equidistant r values
    #[arg(long, default_value_t = 801)]
    r_count: usize,
    /// Iterates to record per r value
    #[arg(long, default_value_t = 50)]
    iterations: usize,
    #[arg(long, default_value_t = 0.5)]
    x1: f64,
}

fn load_config(common: &CommonArgs) -> Result<StudyConfig> {
    match &common.config {
        Some(path) => StudyConfig::load(path),
        None => Ok(StudyConfig::desk_scale()),
    }
}

fn generate_data(args: &GenerateDataArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    if let Some(count) = args.count {
        cfg.data.count = count;
    }
    if let Some(train_count) = args.train_count {
        cfg.data.train_count = train_count;
    }
    if let Some(seed) = args.seed {
        cfg.data.split_seed = seed;
    }
    cfg.validate()?;
    let ctx = StudyContext::from_config(&cfg)?;
    let full = vqlip_core::dataset::generate_dataset(
        cfg.data.count,
        cfg.data.r_min,
        cfg.data.r_max,
        cfg.data.x1,
        cfg.data.sequence_length,
    )?;
    let out = &args.common.out;
    io::write_dataset_csv(&out.join("dataset.csv"), &full)?;
    io::write_dataset_csv(&out.join("train.csv"), &ctx.train_set)?;
    io::write_dataset_csv(&out.join("test.csv"), &ctx.test_set)?;
    io::write_manifest(
        &out.join("manifest.json"),
        &io::Manifest::new("generate-data", vec![cfg.data.split_seed], &cfg),
    )?;
    println!(
        "generate-data: {} samples over r in [{}, {}], split {}/{} -> {}",
        cfg.data.count,
        cfg.data.r_min,
        cfg.data.r_max,
        ctx.train_set.samples.len(),
        ctx.test_set.samples.len(),
        out.display()
    );
    Ok(())
}

fn train_command(args: &TrainArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    if let Some(lambda) = args.lambda {
        cfg.training.lambda = lambda;
    }
    if let Some(seed) = args.seed {
        cfg.training.seed = seed;
    }
    if let Some(epochs) = args.epochs {
        cfg.training.epochs = epochs;
    }
    if args.fixed_encoding {
        cfg.training.encoding_trainable = false;
    }
    if let Some(method) = args.gradient_method {
        cfg.training.gradient_method = method.into();
    }
    cfg.validate()?;
    let ctx = StudyContext::from_config(&cfg)?;
    let record = train(&ctx.layout, &ctx.train_set, &ctx.test_set, &ctx.scaling, &ctx.training)?;
    let out = &args.common.out;
    io::write_run_record(&out.join("run.json"), &record)?;
    io::write_trace_csv(&out.join("trace.csv"), &record.trace)?;
    io::write_model_document(&out.join("model.json"), &ctx.layout, &record.final_params)?;
    io::write_manifest(
        &out.join("manifest.json"),
        &io::Manifest::new("train", vec![cfg.training.seed], &cfg),
    )?;
    let m = &record.final_metrics;
    println!(
        "train: lambda={} seed={} epochs={} encoding={} -> train_mse={:.6} test_mse={:.6} gap={:.6} L={:.3} ({})",
        cfg.training.lambda,
        cfg.training.seed,
        cfg.training.epochs,
        if cfg.training.encoding_trainable { "trainable" } else { "fixed" },
        m.gap.train_mse,
        m.gap.test_mse,
        m.gap.gap,
        m.lipschitz.bound_raw,
        out.display()
    );
    Ok(())
}

fn robustness(args: &RobustnessArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    if let Some(seeds) = &args.seeds {
        cfg.robustness.seeds = seeds.clone();
    }
    if let Some(grid) = &args.epsilon_grid {
        cfg.robustness.epsilon_grid = grid.clone();
    }
    if let Some(epochs) = args.epochs {
        cfg.training.epochs = epochs;
    }
    if let Some(method) = args.gradient_method {
        cfg.training.gradient_method = method.into();
    }
    cfg.validate()?;
    let ctx = StudyContext::from_config(&cfg)?;
    let study = run_robustness_study(&cfg.robustness, &ctx)?;
    let out = &args.common.out;
    io::write_robustness_csv(&out.join("robustness.csv"), &study.aggregate)?;
    io::write_robustness_detail_csv(&out.join("robustness_per_seed.csv"), &study.detail)?;
    io::write_manifest(
        &out.join("manifest.json"),
        &io::Manifest::new("robustness", cfg.robustness.seeds.clone(), &cfg),
    )?;
    let variants = cfg.robustness.lambda_values.len()
        + usize::from(cfg.robustness.include_fixed_encoding);
    println!(
        "robustness: {} variants x {} seeds x {} epsilons ({} rounds) -> {}",
        variants,
        cfg.robustness.seeds.len(),
        cfg.robustness.epsilon_grid.len(),
        cfg.robustness.perturbation_rounds,
        out.display()
    );
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let mut cfg = load_config(&args.common)?;
    if let Some(seeds) = &args.seeds {
        cfg.sweep.seeds = seeds.clone();
    }
    if let Some(epochs) = args.epochs {
        cfg.training.epochs = epochs;
    }
    if let Some(method) = args.gradient_method {
        cfg.training.gradient_method = method.into();
    }
    cfg.validate()?;
    let ctx = StudyContext::from_config(&cfg)?;
    let study = run_generalization_sweep(&cfg.sweep, &ctx)?;
    let out = &args.common.out;
    io::write_sweep_csv(&out.join("sweep.csv"), &study.aggregate)?;
    io::write_sweep_detail_csv(&out.join("sweep_per_seed.csv"), &study.detail)?;
    io::write_manifest(
        &out.join("manifest.json"),
        &io::Manifest::new("sweep", cfg.sweep.seeds.clone(), &cfg),
    )?;
    println!(
        "sweep: {} lambdas x {} seeds -> {}",
        cfg.sweep.lambda_grid.len(),
        cfg.sweep.seeds.len(),
        out.display()
    );
    Ok(())
}

fn predict_export(args: &PredictExportArgs) -> Result<()> {
    let cfg = load_config(&args.common)?;
    cfg.validate()?;
    let (layout, params) = io::read_model_document(&args.model)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    if layout.sequence_length() != cfg.data.sequence_length {
        bail!(
            "model expects sequences of length {}, config generates length {}",
            layout.sequence_length(),
            cfg.data.sequence_length
        );
    }
    let ctx = StudyContext::from_config(&cfg)?;
    let rows = export_predictions(&layout, &params, &ctx.scaling, &ctx.train_set, &ctx.test_set)?;
    let out = &args.common.out;
    io::write_predictions_csv(&out.join("predictions.csv"), &rows)?;
    io::write_manifest(
        &out.join("manifest.json"),
        &io::Manifest::new("predict-export", vec![cfg.data.split_seed], &cfg),
    )?;
    println!(
        "predict-export: {} rows ({} train + {} test) -> {}",
        rows.len(),
        ctx.train_set.samples.len(),
        ctx.test_set.samples.len(),
        out.display()
    );
    Ok(())
}

fn bifurcation(args: &BifurcationArgs) -> Result<()> {
    if args.r_count < 2 {
        bail!("bifurcation needs at least 2 r values (got --r-count {})", args.r_count);
    }
    let span = args.r_max - args.r_min;
    let r_values: Vec<f64> = (0..args.r_count)
        .map(|k| args.r_min + span * k as f64 / (args.r_count - 1) as f64)
        .collect();
    let rows = bifurcation_table(&r_values, args.iterations, args.x1)?;
    let path = args.out.join("bifurcation.csv");
    io::write_bifurcation_csv(&path, &rows)?;
    println!(
        "bifurcation: {} r values x {} iterations -> {}",
        args.r_count,
        args.iterations,
        path.display()
    );
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::GenerateData(args) => generate_data(args),
        Command::Train(args) => train_command(args),
        Command::Robustness(args) => robustness(args),
        Command::Sweep(args) => sweep(args),
        Command::PredictExport(args) => predict_export(args),
        Command::Bifurcation(args) => bifurcation(args),
    }
}

/// Parses and runs; used by integration tests to exercise the CLI without
/// spawning a process.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run(Cli::try_parse_from(args)?)
}

/// True when `path` exists and is a regular file; test helper for output
/// contracts.
pub fn output_exists(path: &Path) -> bool {
    path.is_file()
}
