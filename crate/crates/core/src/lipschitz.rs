//! Closed-form Lipschitz bound, empirical Lipschitz probing and
//! generalization-gap bookkeeping.
//!
//! For a circuit of gates `exp(-i(wᵀx + θ)H)` measured with observable `M`,
//! `L_Θ = 2‖M‖ Σ_j ‖w_j‖‖H_j‖` bounds `|f(x+δ) - f(x)| / ‖δ‖` globally.
//! Here `‖M‖ = 1` (Pauli string), `‖H_j‖ = 1/2` (rotation generator `P/2`)
//! and each encoding gate reads a single feature, so `‖w_j‖ = |w_j|` and
//! the bound reduces to `Σ_j |w_j|`. Constant gates have `w = 0` and
//! contribute nothing. The bound depends only on the weights, never on the
//! biases, which is why a frozen encoding pins it for an entire training
//! run.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gradients::ROTATION_GENERATOR_NORM;
use crate::model::{evaluate_raw, CircuitLayout, ModelParams, OutputScaling};

/// Lipschitz diagnostics of one model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LipschitzReport {
    /// `L_Θ` for the unscaled expectation value.
    pub bound_raw: f64,
    /// `slope · L_Θ`: the bound for predictions in target units.
    pub bound_scaled: f64,
    /// Largest sampled difference quotient of the unscaled model.
    pub empirical_estimate: f64,
    pub num_probe_pairs: usize,
}

/// Train/test error pair and their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GapReport {
    pub train_mse: f64,
    pub test_mse: f64,
    /// `test_mse - train_mse`; negative when the test set is easier.
    pub gap: f64,
}

/// The closed-form bound `2‖M‖ Σ_j ‖w_j‖‖H_j‖`.
///
/// `params` must belong to `layout` (panics on slot mismatch, like any
/// index error).
pub fn lipschitz_bound(layout: &CircuitLayout, params: &ModelParams) -> f64 {
    let weight_norm_sum: f64 = layout
        .encoding_gates()
        .map(|g| params.weights[g.weight_slot].abs() * ROTATION_GENERATOR_NORM)
        .sum();
    2.0 * layout.observable().spectral_norm() * weight_norm_sum
}

/// Samples difference quotients `|f(x+δ) - f(x)| / ‖δ‖` and returns the
/// largest one.
///
/// Base points are uniform on `[0,1]^input_dim` (the data domain);
/// perturbations are uniform on the sphere of radius `perturbation_scale`
/// (a normalized Gaussian direction). Per probe, the base point is drawn
/// first, then the direction.
pub fn empirical_lipschitz(
    layout: &CircuitLayout,
    params: &ModelParams,
    probe_count: usize,
    input_dim: usize,
    perturbation_scale: f64,
    seed: u64,
) -> Result<f64> {
    if probe_count < 1 {
        return Err(Error::Domain("empirical Lipschitz estimation needs at least 1 probe"));
    }
    if !(perturbation_scale > 0.0) {
        return Err(Error::Domain("perturbation scale must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Uniform::new(0.0f64, 1.0);
    let mut best = 0.0f64;
    let mut x = Vec::with_capacity(input_dim);
    let mut shifted = Vec::with_capacity(input_dim);
    for _ in 0..probe_count {
        x.clear();
        x.extend((0..input_dim).map(|_| unit.sample(&mut rng)));
        // Gaussian direction, normalized onto the sphere
        let mut delta: Vec<f64>;
        let mut norm;
        loop {
            delta = (0..input_dim)
                .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect();
            norm = libm::sqrt(delta.iter().map(|d| d * d).sum());
            if norm > 1e-12 {
                break;
            }
        }
        let scale = perturbation_scale / norm;
        shifted.clear();
        shifted.extend(x.iter().zip(&delta).map(|(xi, di)| xi + di * scale));
        let delta_norm = libm::sqrt(
            shifted
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
        );
        if delta_norm == 0.0 {
            continue;
        }
        let f0 = evaluate_raw(layout, params, &x)?;
        let f1 = evaluate_raw(layout, params, &shifted)?;
        let quotient = (f1 - f0).abs() / delta_norm;
        if quotient > best {
            best = quotient;
        }
    }
    Ok(best)
}

/// Builds the full [`LipschitzReport`] for a model.
pub fn lipschitz_report(
    layout: &CircuitLayout,
    params: &ModelParams,
    scaling: &OutputScaling,
    probe_count: usize,
    perturbation_scale: f64,
    seed: u64,
) -> Result<LipschitzReport> {
    let bound_raw = lipschitz_bound(layout, params);
    let empirical = empirical_lipschitz(
        layout,
        params,
        probe_count,
        layout.sequence_length(),
        perturbation_scale,
        seed,
    )?;
    Ok(LipschitzReport {
        bound_raw,
        bound_scaled: scaling.slope() * bound_raw,
        empirical_estimate: empirical,
        num_probe_pairs: probe_count,
    })
}

/// Packs train/test MSE into a [`GapReport`].
pub fn generalization_gap(train_mse: f64, test_mse: f64) -> Result<GapReport> {
    if !(train_mse >= 0.0) || !(test_mse >= 0.0) {
        return Err(Error::Domain("mean squared errors must be nonnegative"));
    }
    Ok(GapReport { train_mse, test_mse, gap: test_mse - train_mse })
}
