//! Orchestration of the noise-robustness study, the generalization sweep
//! and prediction export.
//!
//! Independent (variant, seed) jobs run on the rayon pool; every result
//! vector is assembled in deterministic job order and aggregated with
//! fixed-order summation, so the emitted tables do not depend on thread
//! count or scheduling.

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use vqlip_core::dataset::{generate_dataset, perturb, split, Dataset};
use vqlip_core::lipschitz::lipschitz_bound;
use vqlip_core::model::{
    build_logistic_circuit, predict, CircuitLayout, ModelParams, OutputScaling,
};
use vqlip_core::seeds::derive_seed;
use vqlip_core::training::{evaluate_mse, train, RunRecord, TrainingConfig};

use crate::config::{RobustnessConfig, StudyConfig, SweepConfig};

/// Seed stream salt separating perturbation noise from all other streams.
const NOISE_SALT: u64 = 0x6e6f_6973_655f_7631; // "noise_v1"

/// Everything a study needs besides its own grid: the circuit, the output
/// scaling, the train/test split and the training template.
pub struct StudyContext {
    pub layout: CircuitLayout,
    pub scaling: OutputScaling,
    pub train_set: Dataset,
    pub test_set: Dataset,
    pub training: TrainingConfig,
}

impl StudyContext {
    pub fn from_config(cfg: &StudyConfig) -> Result<Self> {
        cfg.validate()?;
        let layout = build_logistic_circuit(cfg.model.num_qubits, cfg.data.sequence_length)?;
        let scaling = OutputScaling::from_target_range(cfg.data.r_min, cfg.data.r_max)?;
        let full = generate_dataset(
            cfg.data.count,
            cfg.data.r_min,
            cfg.data.r_max,
            cfg.data.x1,
            cfg.data.sequence_length,
        )?;
        let (train_set, test_set) = split(&full, cfg.data.train_count, cfg.data.split_seed)?;
        Ok(Self { layout, scaling, train_set, test_set, training: cfg.training.clone() })
    }

    fn train_variant(&self, variant: &Variant, seed: u64) -> Result<RunRecord> {
        let config = TrainingConfig {
            seed,
            lambda: variant.lambda(),
            encoding_trainable: variant.encoding_trainable(),
            ..self.training.clone()
        };
        Ok(train(&self.layout, &self.train_set, &self.test_set, &self.scaling, &config)?)
    }
}

/// One training scenario of the robustness study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// Trainable encoding with the given regularization strength.
    Lambda(f64),
    /// Encoding weights frozen at their initial values (trained with λ = 0;
    /// the penalty could not influence frozen weights anyway).
    FixedEncoding,
}

impl Variant {
    pub fn label(&self) -> String {
        match self {
            Variant::Lambda(l) => format!("lambda={l}"),
            Variant::FixedEncoding => "fixed".to_string(),
        }
    }

    fn lambda(&self) -> f64 {
        match self {
            Variant::Lambda(l) => *l,
            Variant::FixedEncoding => 0.0,
        }
    }

    fn encoding_trainable(&self) -> bool {
        matches!(self, Variant::Lambda(_))
    }
}

/// Maximum test MSE over `rounds` independently perturbed copies of the
/// test set.
///
/// Round `r` perturbs with seed `derive_seed(master_seed, r)`, so the draws
/// for a smaller round count are a prefix of those for a larger one and the
/// result is monotone in `rounds`.
pub fn worst_case_mse(
    layout: &CircuitLayout,
    params: &ModelParams,
    scaling: &OutputScaling,
    test_set: &Dataset,
    epsilon: f64,
    rounds: usize,
    master_seed: u64,
) -> Result<f64> {
    if rounds < 1 {
        return Err(anyhow!("worst-case MSE needs at least 1 perturbation round"));
    }
    let mut worst = f64::NEG_INFINITY;
    for round in 0..rounds {
        let noisy = Dataset {
            samples: perturb(&test_set.samples, epsilon, derive_seed(master_seed, round as u64))?,
            metadata: test_set.metadata.clone(),
        };
        let mse = evaluate_mse(layout, params, scaling, &noisy)?;
        if mse > worst {
            worst = mse;
        }
    }
    Ok(worst)
}

/// Per-(variant, seed, ε) measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessDetailRow {
    pub variant: String,
    pub seed: u64,
    pub epsilon: f64,
    pub worst_case_mse: f64,
    pub lipschitz_bound: f64,
}

/// Per-(variant, ε) aggregate over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessAggregateRow {
    pub variant: String,
    pub epsilon: f64,
    pub mean_worst_case_mse: f64,
    pub std_worst_case_mse: f64,
    pub mean_lipschitz_bound: f64,
    pub std_lipschitz_bound: f64,
}

pub struct RobustnessStudy {
    pub detail: Vec<RobustnessDetailRow>,
    pub aggregate: Vec<RobustnessAggregateRow>,
}

/// Arithmetic mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn study_variants(cfg: &RobustnessConfig) -> Vec<Variant> {
    let mut variants: Vec<Variant> = cfg.lambda_values.iter().map(|&l| Variant::Lambda(l)).collect();
    if cfg.include_fixed_encoding {
        variants.push(Variant::FixedEncoding);
    }
    variants
}

/// Trains one model per (variant, seed) and measures worst-case MSE on
/// every noise level.
///
/// Noise draws depend only on (seed, ε index), not on the variant, so
/// variants are compared on identical perturbed test sets.
pub fn run_robustness_study(cfg: &RobustnessConfig, ctx: &StudyContext) -> Result<RobustnessStudy> {
    cfg.validate()?;
    let variants = study_variants(cfg);
    let jobs: Vec<(Variant, u64)> = variants
        .iter()
        .flat_map(|&v| cfg.seeds.iter().map(move |&s| (v, s)))
        .collect();

    let per_model: Vec<(Variant, u64, f64, Vec<f64>)> = jobs
        .par_iter()
        .map(|&(variant, seed)| {
            let record = ctx.train_variant(&variant, seed)?;
            let bound = record.final_metrics.lipschitz.bound_raw;
            let wc: Vec<f64> = cfg
                .epsilon_grid
                .iter()
                .enumerate()
                .map(|(k, &epsilon)| {
                    worst_case_mse(
                        &ctx.layout,
                        &record.final_params,
                        &ctx.scaling,
                        &ctx.test_set,
                        epsilon,
                        cfg.perturbation_rounds,
                        derive_seed(derive_seed(NOISE_SALT, seed), k as u64),
                    )
                })
                .collect::<Result<_>>()?;
            Ok((variant, seed, bound, wc))
        })
        .collect::<Result<_>>()?;

    let mut detail = Vec::new();
    for (variant, seed, bound, wc) in &per_model {
        for (eps, mse) in cfg.epsilon_grid.iter().zip(wc) {
            detail.push(RobustnessDetailRow {
                variant: variant.label(),
                seed: *seed,
                epsilon: *eps,
                worst_case_mse: *mse,
                lipschitz_bound: *bound,
            });
        }
    }

    let mut aggregate = Vec::new();
    for variant in &variants {
        let rows: Vec<&(Variant, u64, f64, Vec<f64>)> =
            per_model.iter().filter(|(v, ..)| v == variant).collect();
        let bounds: Vec<f64> = rows.iter().map(|(_, _, b, _)| *b).collect();
        let (mean_bound, std_bound) = mean_std(&bounds);
        for (k, &epsilon) in cfg.epsilon_grid.iter().enumerate() {
            let values: Vec<f64> = rows.iter().map(|(_, _, _, wc)| wc[k]).collect();
            let (mean, std) = mean_std(&values);
            aggregate.push(RobustnessAggregateRow {
                variant: variant.label(),
                epsilon,
                mean_worst_case_mse: mean,
                std_worst_case_mse: std,
                mean_lipschitz_bound: mean_bound,
                std_lipschitz_bound: std_bound,
            });
        }
    }
    Ok(RobustnessStudy { detail, aggregate })
}

/// Per-(λ, seed) record of the generalization sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepDetailRow {
    pub lambda: f64,
    pub seed: u64,
    pub train_mse: f64,
    pub test_mse: f64,
    pub gap: f64,
    pub lipschitz_bound: f64,
}

/// Per-λ aggregate over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAggregateRow {
    pub lambda: f64,
    pub mean_train_mse: f64,
    pub std_train_mse: f64,
    pub mean_test_mse: f64,
    pub std_test_mse: f64,
    pub mean_gap: f64,
    pub std_gap: f64,
    pub mean_lipschitz_bound: f64,
    pub std_lipschitz_bound: f64,
}

pub struct SweepStudy {
    pub detail: Vec<SweepDetailRow>,
    pub aggregate: Vec<SweepAggregateRow>,
}

/// Trains one model per (λ, seed) and tabulates train/test MSE, the gap and
/// the Lipschitz bound.
pub fn run_generalization_sweep(cfg: &SweepConfig, ctx: &StudyContext) -> Result<SweepStudy> {
    cfg.validate()?;
    let jobs: Vec<(f64, u64)> = cfg
        .lambda_grid
        .iter()
        .flat_map(|&l| cfg.seeds.iter().map(move |&s| (l, s)))
        .collect();

    let detail: Vec<SweepDetailRow> = jobs
        .par_iter()
        .map(|&(lambda, seed)| {
            let record = ctx.train_variant(&Variant::Lambda(lambda), seed)?;
            Ok(SweepDetailRow {
                lambda,
                seed,
                train_mse: record.final_metrics.gap.train_mse,
                test_mse: record.final_metrics.gap.test_mse,
                gap: record.final_metrics.gap.gap,
                lipschitz_bound: record.final_metrics.lipschitz.bound_raw,
            })
        })
        .collect::<Result<_>>()?;

    let mut aggregate = Vec::new();
    for &lambda in &cfg.lambda_grid {
        let rows: Vec<&SweepDetailRow> = detail.iter().filter(|r| r.lambda == lambda).collect();
        let stat = |f: fn(&SweepDetailRow) -> f64| {
            let values: Vec<f64> = rows.iter().map(|r| f(r)).collect();
            mean_std(&values)
        };
        let (mean_train_mse, std_train_mse) = stat(|r| r.train_mse);
        let (mean_test_mse, std_test_mse) = stat(|r| r.test_mse);
        let (mean_gap, std_gap) = stat(|r| r.gap);
        let (mean_lipschitz_bound, std_lipschitz_bound) = stat(|r| r.lipschitz_bound);
        aggregate.push(SweepAggregateRow {
            lambda,
            mean_train_mse,
            std_train_mse,
            mean_test_mse,
            std_test_mse,
            mean_gap,
            std_gap,
            mean_lipschitz_bound,
            std_lipschitz_bound,
        });
    }
    Ok(SweepStudy { detail, aggregate })
}

/// One scatter point of predicted versus true `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub split: String,
    pub r_true: f64,
    pub r_predicted: f64,
}

/// Predicted-versus-true rows for both splits, train first.
pub fn export_predictions(
    layout: &CircuitLayout,
    params: &ModelParams,
    scaling: &OutputScaling,
    train_set: &Dataset,
    test_set: &Dataset,
) -> Result<Vec<PredictionRow>> {
    let mut rows = Vec::with_capacity(train_set.samples.len() + test_set.samples.len());
    for (name, set) in [("train", train_set), ("test", test_set)] {
        for sample in &set.samples {
            rows.push(PredictionRow {
                split: name.to_string(),
                r_true: sample.target,
                r_predicted: predict(layout, params, scaling, &sample.sequence)
                    .context("prediction failed")?,
            });
        }
    }
    Ok(rows)
}

/// Lipschitz bound of a trained model (re-exported convenience for tests
/// and the CLI summary line).
pub fn model_bound(layout: &CircuitLayout, params: &ModelParams) -> f64 {
    lipschitz_bound(layout, params)
}
