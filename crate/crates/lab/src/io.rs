//! File formats: dataset/trace/result CSVs, the RunRecord JSON, the model
//! checkpoint document and the run manifest.
//!
//! CSV cells are written with `Display` formatting of `f64` (shortest
//! round-trip decimal), and JSON documents are serialized from structs with
//! fixed field order, so identical data always produces identical bytes.
//! No file contains a timestamp.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use vqlip_core::dataset::{BifurcationRow, Dataset, DatasetMetadata, Sample};
use vqlip_core::model::{CircuitLayout, CircuitOp, ModelParams};
use vqlip_core::statevector::PauliStringObservable;
use vqlip_core::training::{EpochTrace, RunRecord};

use crate::config::StudyConfig;
use crate::harness::{
    PredictionRow, RobustnessAggregateRow, RobustnessDetailRow, SweepAggregateRow, SweepDetailRow,
};

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish(path: &Path, writer: csv::Writer<Vec<u8>>) -> Result<()> {
    write_file(path, &writer.into_inner()?)
}

/// Dataset CSV: header `x_1,...,x_l,r`, one row per sample.
pub fn write_dataset_csv(path: &Path, dataset: &Dataset) -> Result<()> {
    let mut w = csv_writer();
    let l = dataset.metadata.sequence_length;
    let mut header: Vec<String> = (1..=l).map(|i| format!("x_{i}")).collect();
    header.push("r".to_string());
    w.write_record(&header)?;
    for sample in &dataset.samples {
        let mut row: Vec<String> = sample.sequence.iter().map(|x| x.to_string()).collect();
        row.push(sample.target.to_string());
        w.write_record(&row)?;
    }
    finish(path, w)
}

/// Reads a dataset CSV back. Generation metadata is reconstructed from the
/// rows themselves (target range from the targets, `x1` from the first
/// column), since the CSV carries none.
pub fn read_dataset_csv(path: &Path) -> Result<Dataset> {
    let mut reader = csv::Reader::from_path(path)
        .with_context(|| format!("opening dataset {}", path.display()))?;
    let header = reader.headers()?.clone();
    if header.len() < 2 || &header[header.len() - 1] != "r" {
        bail!("dataset CSV must end with an `r` column, got header {header:?}");
    }
    let l = header.len() - 1;
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record?;
        let mut values = Vec::with_capacity(record.len());
        for field in record.iter() {
            values.push(field.parse::<f64>().with_context(|| format!("parsing field {field}"))?);
        }
        let target = values.pop().context("empty dataset row")?;
        samples.push(Sample { sequence: values, target });
    }
    if samples.is_empty() {
        bail!("dataset CSV {} has no rows", path.display());
    }
    let r_min = samples.iter().map(|s| s.target).fold(f64::INFINITY, f64::min);
    let r_max = samples.iter().map(|s| s.target).fold(f64::NEG_INFINITY, f64::max);
    let metadata = DatasetMetadata {
        r_min,
        r_max,
        count: samples.len(),
        x1: samples[0].sequence[0],
        sequence_length: l,
    };
    Ok(Dataset { samples, metadata })
}

/// Per-epoch trace CSV: `epoch,loss,regularizer,lipschitz_bound`.
pub fn write_trace_csv(path: &Path, trace: &[EpochTrace]) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(["epoch", "loss", "regularizer", "lipschitz_bound"])?;
    for (epoch, row) in trace.iter().enumerate() {
        w.write_record([
            epoch.to_string(),
            row.loss.to_string(),
            row.regularizer.to_string(),
            row.lipschitz_bound.to_string(),
        ])?;
    }
    finish(path, w)
}

pub fn write_robustness_csv(path: &Path, rows: &[RobustnessAggregateRow]) -> Result<()> {
    let mut w = csv_writer();
    w.write_record([
        "variant",
        "epsilon",
        "mean_worst_case_mse",
        "std_worst_case_mse",
        "mean_lipschitz_bound",
        "std_lipschitz_bound",
    ])?;
    for r in rows {
        w.write_record([
            r.variant.clone(),
            r.epsilon.to_string(),
            r.mean_worst_case_mse.to_string(),
            r.std_worst_case_mse.to_string(),
            r.mean_lipschitz_bound.to_string(),
            r.std_lipschitz_bound.to_string(),
        ])?;
    }
    finish(path, w)
}

pub fn write_robustness_detail_csv(path: &Path, rows: &[RobustnessDetailRow]) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(["variant", "seed", "epsilon", "worst_case_mse", "lipschitz_bound"])?;
    for r in rows {
        w.write_record([
            r.variant.clone(),
            r.seed.to_string(),
            r.epsilon.to_string(),
            r.worst_case_mse.to_string(),
            r.lipschitz_bound.to_string(),
        ])?;
    }
    finish(path, w)
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepAggregateRow]) -> Result<()> {
    let mut w = csv_writer();
    w.write_record([
        "lambda",
        "mean_train_mse",
        "std_train_mse",
        "mean_test_mse",
        "std_test_mse",
        "mean_gap",
        "std_gap",
        "mean_lipschitz_bound",
        "std_lipschitz_bound",
    ])?;
    for r in rows {
        w.write_record([
            r.lambda.to_string(),
            r.mean_train_mse.to_string(),
            r.std_train_mse.to_string(),
            r.mean_test_mse.to_string(),
            r.std_test_mse.to_string(),
            r.mean_gap.to_string(),
            r.std_gap.to_string(),
            r.mean_lipschitz_bound.to_string(),
            r.std_lipschitz_bound.to_string(),
        ])?;
    }
    finish(path, w)
}

pub fn write_sweep_detail_csv(path: &Path, rows: &[SweepDetailRow]) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(["lambda", "seed", "train_mse", "test_mse", "gap", "lipschitz_bound"])?;
    for r in rows {
        w.write_record([
            r.lambda.to_string(),
            r.seed.to_string(),
            r.train_mse.to_string(),
            r.test_mse.to_string(),
            r.gap.to_string(),
            r.lipschitz_bound.to_string(),
        ])?;
    }
    finish(path, w)
}

pub fn write_predictions_csv(path: &Path, rows: &[PredictionRow]) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(["split", "r_true", "r_predicted"])?;
    for r in rows {
        w.write_record([r.split.clone(), r.r_true.to_string(), r.r_predicted.to_string()])?;
    }
    finish(path, w)
}

pub fn write_bifurcation_csv(path: &Path, rows: &[BifurcationRow]) -> Result<()> {
    let mut w = csv_writer();
    w.write_record(["r", "t", "x_t"])?;
    for row in rows {
        w.write_record([row.r.to_string(), row.t.to_string(), row.x.to_string()])?;
    }
    finish(path, w)
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// RunRecord JSON (config snapshot, trace, final parameters, metrics).
pub fn write_run_record(path: &Path, record: &RunRecord) -> Result<()> {
    write_file(path, &to_pretty_json(record)?)
}

pub fn read_run_record(path: &Path) -> Result<RunRecord> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading run record {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

/// Version tag of the checkpoint schema.
pub const MODEL_DOCUMENT_VERSION: u32 = 1;

/// Standalone model checkpoint: layout plus parameters, loadable without
/// the original configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub version: u32,
    pub num_qubits: usize,
    pub sequence_length: usize,
    pub ops: Vec<CircuitOp>,
    pub observable: PauliStringObservable,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub encoding_trainable: bool,
}

impl ModelDocument {
    pub fn new(layout: &CircuitLayout, params: &ModelParams) -> Self {
        Self {
            version: MODEL_DOCUMENT_VERSION,
            num_qubits: layout.num_qubits(),
            sequence_length: layout.sequence_length(),
            ops: layout.ops().to_vec(),
            observable: layout.observable().clone(),
            weights: params.weights.clone(),
            biases: params.biases.clone(),
            encoding_trainable: params.encoding_trainable,
        }
    }

    /// Re-validates the layout invariants on load.
    pub fn into_parts(self) -> Result<(CircuitLayout, ModelParams)> {
        if self.version != MODEL_DOCUMENT_VERSION {
            bail!("unsupported model document version {}", self.version);
        }
        let layout = CircuitLayout::new(
            self.num_qubits,
            self.sequence_length,
            self.ops,
            self.observable,
        )?;
        if self.weights.len() != layout.num_param_slots()
            || self.biases.len() != layout.num_param_slots()
        {
            bail!(
                "model document carries {} weights / {} biases for {} slots",
                self.weights.len(),
                self.biases.len(),
                layout.num_param_slots()
            );
        }
        let params = ModelParams {
            weights: self.weights,
            biases: self.biases,
            encoding_trainable: self.encoding_trainable,
        };
        Ok((layout, params))
    }
}

pub fn write_model_document(path: &Path, layout: &CircuitLayout, params: &ModelParams) -> Result<()> {
    write_file(path, &to_pretty_json(&ModelDocument::new(layout, params))?)
}

pub fn read_model_document(path: &Path) -> Result<(CircuitLayout, ModelParams)> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading model document {}", path.display()))?;
    let doc: ModelDocument = serde_json::from_str(&text)?;
    doc.into_parts()
}

/// Run manifest: the resolved configuration, the command that produced the
/// outputs, the code version and the seeds in play. Deliberately free of
/// timestamps so reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub code_version: String,
    pub seeds: Vec<u64>,
    pub config: StudyConfig,
}

impl Manifest {
    pub fn new(command: &str, seeds: Vec<u64>, config: &StudyConfig) -> Self {
        Self {
            command: command.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seeds,
            config: config.clone(),
        }
    }
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    write_file(path, &to_pretty_json(manifest)?)
}
