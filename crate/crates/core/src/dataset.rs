//! Logistic-map regression data: generation, splitting, noise perturbation
//! and bifurcation tables.
//!
//! A sample is a length-`l` trajectory of `x_t = r·x_{t-1}(1 - x_{t-1})`
//! paired with the parameter `r` that generated it. The first entry of every
//! sequence is the initial condition itself, so it is constant across a
//! dataset generated with a fixed `x1`.

use alloc::vec::Vec;
use rand::distributions::{Distribution, Uniform};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// One (trajectory, parameter) regression pair.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Sample {
    pub sequence: Vec<f64>,
    pub target: f64,
}

/// Generation parameters recorded alongside the samples.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DatasetMetadata {
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
    pub x1: f64,
    pub sequence_length: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub metadata: DatasetMetadata,
}

/// Iterates the logistic map from `x1`.
///
/// The returned sequence starts with `x1` itself and has `length` entries.
/// For `r ∈ [0, 4]` and `x1 ∈ [0, 1]` all entries stay in `[0, 1]`;
/// out-of-range `r` is permitted for exploration.
pub fn logistic_sequence(r: f64, x1: f64, length: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(length);
    let mut x = x1;
    for t in 0..length {
        if t > 0 {
            x = r * x * (1.0 - x);
        }
        out.push(x);
    }
    out
}

/// Generates `count` samples with targets equidistant over
/// `[r_min, r_max]`, both endpoints included.
pub fn generate_dataset(
    count: usize,
    r_min: f64,
    r_max: f64,
    x1: f64,
    length: usize,
) -> Result<Dataset> {
    if count < 2 {
        return Err(Error::Domain("dataset needs at least 2 samples"));
    }
    if length < 1 {
        return Err(Error::Domain("sequence length must be at least 1"));
    }
    let span = r_max - r_min;
    let samples = (0..count)
        .map(|k| {
            let r = r_min + span * (k as f64) / ((count - 1) as f64);
            Sample { sequence: logistic_sequence(r, x1, length), target: r }
        })
        .collect();
    Ok(Dataset {
        samples,
        metadata: DatasetMetadata { r_min, r_max, count, x1, sequence_length: length },
    })
}

/// Uniformly random partition into `train_count` training samples and the
/// rest, deterministic in `seed`. Both halves keep the original sample
/// order; the split metadata inherits the generation parameters with the
/// count adjusted.
pub fn split(dataset: &Dataset, train_count: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let total = dataset.samples.len();
    if train_count == 0 || train_count >= total {
        return Err(Error::Domain("train count must satisfy 0 < train < total"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut rng);
    let mut train_idx: Vec<usize> = order[..train_count].to_vec();
    let mut test_idx: Vec<usize> = order[train_count..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let subset = |idx: &[usize]| Dataset {
        samples: idx.iter().map(|&i| dataset.samples[i].clone()).collect(),
        metadata: DatasetMetadata { count: idx.len(), ..dataset.metadata.clone() },
    };
    Ok((subset(&train_idx), subset(&test_idx)))
}

/// Adds i.i.d. uniform noise from `[-epsilon, epsilon]` to every entry of
/// every sequence. Targets are unchanged and perturbed values are not
/// clipped to `[0, 1]`. Entries are drawn sample by sample in order.
pub fn perturb(samples: &[Sample], epsilon: f64, seed: u64) -> Result<Vec<Sample>> {
    if !(epsilon >= 0.0) {
        return Err(Error::Domain("perturbation epsilon must be nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-epsilon, epsilon);
    Ok(samples
        .iter()
        .map(|s| Sample {
            sequence: s.sequence.iter().map(|x| x + dist.sample(&mut rng)).collect(),
            target: s.target,
        })
        .collect())
}

/// One plot-ready point of a bifurcation diagram: iterate `x` at (1-based)
/// step `t` for parameter `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BifurcationRow {
    pub r: f64,
    pub t: usize,
    pub x: f64,
}

/// Emits the first `iterations` iterates (starting from `x1`) for each `r`.
pub fn bifurcation_table(
    r_values: &[f64],
    iterations: usize,
    x1: f64,
) -> Result<Vec<BifurcationRow>> {
    if iterations < 1 {
        return Err(Error::Domain("bifurcation table needs at least 1 iteration"));
    }
    let mut rows = Vec::with_capacity(r_values.len() * iterations);
    for &r in r_values {
        for (t, x) in logistic_sequence(r, x1, iterations).into_iter().enumerate() {
            rows.push(BifurcationRow { r, t: t + 1, x });
        }
    }
    Ok(rows)
}
