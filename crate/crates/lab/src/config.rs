//! Study configuration: one TOML document covering data generation, the
//! model, training hyperparameters and both studies.
//!
//! Every key has a desk-scale default (5 seeds, 500 epochs, 100/400 split),
//! so an empty file is a valid configuration; [`StudyConfig::paper_scale`]
//! switches to the full-size study (50 seeds, 2000 epochs, 200/800 split).
//! Unknown keys are rejected with an error naming the offending field.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use vqlip_core::training::TrainingConfig;

/// Dataset generation and split parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    /// Total number of generated samples (train + test).
    pub count: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// Initial condition of every trajectory.
    pub x1: f64,
    pub sequence_length: usize,
    pub train_count: usize,
    pub split_seed: u64,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            count: 500,
            r_min: 3.5,
            r_max: 4.0,
            x1: 0.5,
            sequence_length: 12,
            train_count: 100,
            split_seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub num_qubits: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self { num_qubits: 4 }
    }
}

/// Noise-robustness study (worst-case MSE over perturbation rounds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobustnessConfig {
    pub epsilon_grid: Vec<f64>,
    pub perturbation_rounds: usize,
    pub seeds: Vec<u64>,
    pub lambda_values: Vec<f64>,
    pub include_fixed_encoding: bool,
}

/// Ten log-spaced noise levels covering `[0.001, 0.5]`.
pub fn default_epsilon_grid() -> Vec<f64> {
    (0..10)
        .map(|k| 0.001 * f64::powf(500.0, k as f64 / 9.0))
        .collect()
}

impl Default for RobustnessConfig {
    fn default() -> Self {
        Self {
            epsilon_grid: default_epsilon_grid(),
            perturbation_rounds: 100,
            seeds: vec![1, 2, 3, 4, 5],
            lambda_values: vec![0.0, 0.004, 0.03],
            include_fixed_encoding: true,
        }
    }
}

impl RobustnessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilon_grid.is_empty() {
            bail!("robustness.epsilon_grid must not be empty");
        }
        if self.epsilon_grid.iter().any(|e| !(*e >= 0.0)) {
            bail!("robustness.epsilon_grid entries must be nonnegative");
        }
        if self.perturbation_rounds < 1 {
            bail!("robustness.perturbation_rounds must be at least 1");
        }
        if self.seeds.is_empty() {
            bail!("robustness.seeds must not be empty");
        }
        if self.lambda_values.iter().any(|l| !(*l >= 0.0)) {
            bail!("robustness.lambda_values entries must be nonnegative");
        }
        if self.lambda_values.is_empty() && !self.include_fixed_encoding {
            bail!("robustness needs at least one lambda value or the fixed-encoding variant");
        }
        Ok(())
    }
}

/// Generalization sweep over regularization strengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub lambda_grid: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambda_grid: vec![0.0, 0.001, 0.002, 0.004, 0.008, 0.015, 0.03],
            seeds: vec![1, 2, 3, 4, 5],
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lambda_grid.len() < 2 {
            bail!("sweep.lambda_grid needs at least 2 values");
        }
        if self.lambda_grid.iter().any(|l| !(*l >= 0.0)) {
            bail!("sweep.lambda_grid entries must be nonnegative");
        }
        if self.seeds.is_empty() {
            bail!("sweep.seeds must not be empty");
        }
        Ok(())
    }
}

/// The whole study document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub data: DataSection,
    pub model: ModelSection,
    pub training: TrainingConfig,
    pub robustness: RobustnessConfig,
    pub sweep: SweepConfig,
}

impl StudyConfig {
    /// Desk-scale defaults, with the training section set to 500 epochs.
    ///
    /// `TrainingConfig::default()` carries the full-scale 2000 epochs; the
    /// desk default here keeps studies in the minutes range.
    pub fn desk_scale() -> Self {
        let mut cfg = Self::default();
        cfg.training.epochs = 500;
        cfg
    }

    /// Full-size study: 1000 samples split 200/800, 2000 epochs, 50 seeds.
    pub fn paper_scale() -> Self {
        let mut cfg = Self::default();
        cfg.data.count = 1000;
        cfg.data.train_count = 200;
        cfg.training.epochs = 2000;
        cfg.robustness.seeds = (1..=50).collect();
        cfg.sweep.seeds = (1..=50).collect();
        cfg
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let cfg: StudyConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config file {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.count < 2 {
            bail!("data.count must be at least 2");
        }
        if self.data.train_count == 0 || self.data.train_count >= self.data.count {
            bail!("data.train_count must satisfy 0 < train_count < count");
        }
        if self.data.sequence_length < 1 {
            bail!("data.sequence_length must be at least 1");
        }
        if !(self.data.r_min < self.data.r_max) {
            bail!("data.r_min must be below data.r_max");
        }
        if self.model.num_qubits < 2 {
            bail!("model.num_qubits must be at least 2");
        }
        self.training
            .validate()
            .map_err(|e| anyhow::anyhow!("training section: {e}"))?;
        self.robustness.validate()?;
        self.sweep.validate()?;
        Ok(())
    }
}
