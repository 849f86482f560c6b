//! Exact gradients of the model output and of the regularized training loss.
//!
//! Two independent routes compute `∂f/∂Θ` for the raw expectation value:
//!
//! * the parameter-shift rule, `∂f/∂α = [f(α+π/2) - f(α-π/2)] / 2`, exact
//!   for rotation gates generated by `P/2` (two circuit evaluations per
//!   parameter) — kept as the oracle and as a selectable fallback;
//! * adjoint backpropagation, one forward pass plus one backward sweep over
//!   three live statevectors — the production path.
//!
//! Both apply the training mask: with a frozen encoding every weight-slot
//! entry is zero.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::model::{run_circuit, CircuitLayout, CircuitOp, ModelParams, OutputScaling};
use crate::statevector::{PauliAxis, StateVector};

/// Spectral norm of the rotation generator `H = P/2`.
pub const ROTATION_GENERATOR_NORM: f64 = 0.5;

/// Which gradient implementation a caller wants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GradientMethod {
    #[default]
    Adjoint,
    #[cfg_attr(feature = "serde", serde(alias = "parameter-shift"))]
    ParameterShift,
}

/// Gradient of a scalar with respect to every parameter slot.
///
/// Entries for masked slots (weights of a frozen encoding) are always zero.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GradientVector {
    pub d_weights: Vec<f64>,
    pub d_biases: Vec<f64>,
}

impl GradientVector {
    pub fn zeros(num_slots: usize) -> Self {
        Self { d_weights: vec![0.0; num_slots], d_biases: vec![0.0; num_slots] }
    }
}

fn check_shapes(layout: &CircuitLayout, params: &ModelParams, x: &[f64]) -> Result<()> {
    if x.len() != layout.sequence_length() {
        return Err(Error::Shape {
            what: "input sequence",
            expected: layout.sequence_length(),
            actual: x.len(),
        });
    }
    if params.weights.len() != layout.num_param_slots() {
        return Err(Error::Shape {
            what: "weights",
            expected: layout.num_param_slots(),
            actual: params.weights.len(),
        });
    }
    if params.biases.len() != layout.num_param_slots() {
        return Err(Error::Shape {
            what: "biases",
            expected: layout.num_param_slots(),
            actual: params.biases.len(),
        });
    }
    Ok(())
}

/// Evaluates the circuit with `shift` added to the angle of the encoding
/// gate at op position `shifted_op`.
fn evaluate_shifted(
    layout: &CircuitLayout,
    params: &ModelParams,
    x: &[f64],
    shifted_op: usize,
    shift: f64,
) -> Result<f64> {
    let mut state = StateVector::zero(layout.num_qubits())?;
    for (k, op) in layout.ops().iter().enumerate() {
        match op {
            CircuitOp::Encoding(g) => {
                let mut angle =
                    params.weights[g.weight_slot] * x[g.feature_index] + params.biases[g.bias_slot];
                if k == shifted_op {
                    angle += shift;
                }
                state.apply_rotation(g.qubit, g.axis, angle)?;
            }
            CircuitOp::Cnot { control, target } => state.apply_cnot(*control, *target)?,
        }
    }
    state.expectation(layout.observable())
}

/// Parameter-shift gradient of the raw output: exact, `2N` evaluations.
pub fn grad_raw_parameter_shift(
    layout: &CircuitLayout,
    params: &ModelParams,
    x: &[f64],
) -> Result<GradientVector> {
    check_shapes(layout, params, x)?;
    let mut grad = GradientVector::zeros(layout.num_param_slots());
    let half_pi = core::f64::consts::FRAC_PI_2;
    for (k, op) in layout.ops().iter().enumerate() {
        if let CircuitOp::Encoding(g) = op {
            let plus = evaluate_shifted(layout, params, x, k, half_pi)?;
            let minus = evaluate_shifted(layout, params, x, k, -half_pi)?;
            let d_angle = 0.5 * (plus - minus);
            grad.d_weights[g.weight_slot] += x[g.feature_index] * d_angle;
            grad.d_biases[g.bias_slot] += d_angle;
        }
    }
    if !params.encoding_trainable {
        grad.d_weights.iter_mut().for_each(|g| *g = 0.0);
    }
    Ok(grad)
}

/// `Im(⟨bra| P_axis on qubit |ket⟩)` without materializing `P|ket⟩`.
fn im_bra_pauli_ket(bra: &StateVector, ket: &StateVector, qubit: usize, axis: PauliAxis) -> f64 {
    let amps_b = bra.amplitudes();
    let amps_k = ket.amplitudes();
    let n = amps_k.len();
    let stride = n >> (qubit + 1); // qubit 0 is the most significant index bit
    let mut acc = Complex64::new(0.0, 0.0);
    let mut base = 0;
    while base < n {
        for i0 in base..base + stride {
            let i1 = i0 + stride;
            match axis {
                PauliAxis::X => {
                    acc += amps_b[i0].conj() * amps_k[i1] + amps_b[i1].conj() * amps_k[i0];
                }
                PauliAxis::Y => {
                    // (P ket)_{i0} = -i·ket_{i1}, (P ket)_{i1} = +i·ket_{i0}
                    acc += Complex64::new(0.0, -1.0) * amps_b[i0].conj() * amps_k[i1]
                        + Complex64::new(0.0, 1.0) * amps_b[i1].conj() * amps_k[i0];
                }
                PauliAxis::Z => {
                    acc += amps_b[i0].conj() * amps_k[i0] - amps_b[i1].conj() * amps_k[i1];
                }
                PauliAxis::I => unreachable!("identity is rejected at layout construction"),
            }
        }
        base += 2 * stride;
    }
    acc.im
}

/// Adjoint-mode value and gradient: one forward pass, one backward sweep.
///
/// With `E = ⟨ψ|M|ψ⟩` and a gate `U_k = exp(-i·α_k·P_k/2)`, the backward
/// sweep maintains `|ψ_k⟩` and `|λ_k⟩ = U_{k+1}†…U_N† M|ψ_N⟩` and uses
/// `∂E/∂α_k = Im(⟨λ_k|P_k|ψ_k⟩)`.
fn value_and_grad_adjoint(
    layout: &CircuitLayout,
    params: &ModelParams,
    x: &[f64],
) -> Result<(f64, GradientVector)> {
    let mut psi = run_circuit(layout, params, x)?;
    let value = psi.expectation(layout.observable())?;

    let mut lam = psi.clone();
    lam.apply_pauli_string(layout.observable())?;

    let mut grad = GradientVector::zeros(layout.num_param_slots());
    for op in layout.ops().iter().rev() {
        match op {
            CircuitOp::Encoding(g) => {
                let d_angle = im_bra_pauli_ket(&lam, &psi, g.qubit, g.axis);
                grad.d_weights[g.weight_slot] += x[g.feature_index] * d_angle;
                grad.d_biases[g.bias_slot] += d_angle;
                let angle =
                    params.weights[g.weight_slot] * x[g.feature_index] + params.biases[g.bias_slot];
                psi.apply_rotation(g.qubit, g.axis, -angle)?;
                lam.apply_rotation(g.qubit, g.axis, -angle)?;
            }
            CircuitOp::Cnot { control, target } => {
                psi.apply_cnot(*control, *target)?;
                lam.apply_cnot(*control, *target)?;
            }
        }
    }
    if !params.encoding_trainable {
        grad.d_weights.iter_mut().for_each(|g| *g = 0.0);
    }
    Ok((value, grad))
}

/// Adjoint gradient of the raw output; agrees with
/// [`grad_raw_parameter_shift`] to rounding error.
pub fn grad_raw_adjoint(
    layout: &CircuitLayout,
    params: &ModelParams,
    x: &[f64],
) -> Result<GradientVector> {
    check_shapes(layout, params, x)?;
    value_and_grad_adjoint(layout, params, x).map(|(_, g)| g)
}

fn value_and_grad(
    layout: &CircuitLayout,
    params: &ModelParams,
    x: &[f64],
    method: GradientMethod,
) -> Result<(f64, GradientVector)> {
    match method {
        GradientMethod::Adjoint => value_and_grad_adjoint(layout, params, x),
        GradientMethod::ParameterShift => {
            let value = crate::model::evaluate_raw(layout, params, x)?;
            let grad = grad_raw_parameter_shift(layout, params, x)?;
            Ok((value, grad))
        }
    }
}

/// The weight-norm penalty `λ Σ_j ‖w_j‖²‖H_j‖²` over all encoding gates.
///
/// With the `P/2` generator convention this is `λ/4 · Σ w²`. Bias
/// parameters do not enter; constant gates contribute nothing.
pub fn regularizer(params: &ModelParams, layout: &CircuitLayout, lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain("regularization strength must be nonnegative"));
    }
    let h_sq = ROTATION_GENERATOR_NORM * ROTATION_GENERATOR_NORM;
    let sum: f64 = layout
        .encoding_gates()
        .map(|g| {
            let w = params.weights[g.weight_slot];
            w * w * h_sq
        })
        .sum();
    Ok(lambda * sum)
}

/// Regularized batch loss and its exact gradient.
///
/// `loss = (1/n) Σ (predict(x_k) - y_k)² + λ Σ ‖w_j‖²‖H_j‖²`. Per-sample
/// contributions are accumulated in batch order, so the result does not
/// depend on any parallel execution of the caller.
pub fn grad_loss(
    layout: &CircuitLayout,
    params: &ModelParams,
    scaling: &OutputScaling,
    batch: &[Sample],
    lambda: f64,
    method: GradientMethod,
) -> Result<(f64, GradientVector)> {
    if batch.is_empty() {
        return Err(Error::Domain("loss gradient needs a non-empty batch"));
    }
    let n = batch.len() as f64;
    let mut grad = GradientVector::zeros(layout.num_param_slots());
    let mut data_loss = 0.0;
    for sample in batch {
        let (raw, sample_grad) = value_and_grad(layout, params, &sample.sequence, method)?;
        let residual = scaling.apply(raw) - sample.target;
        data_loss += residual * residual / n;
        // d/dΘ of (1/n)(offset + slope·f - y)² = (2/n)·slope·residual · df/dΘ
        let coeff = 2.0 / n * scaling.slope() * residual;
        for (acc, g) in grad.d_weights.iter_mut().zip(&sample_grad.d_weights) {
            *acc += coeff * g;
        }
        for (acc, g) in grad.d_biases.iter_mut().zip(&sample_grad.d_biases) {
            *acc += coeff * g;
        }
    }
    let penalty = regularizer(params, layout, lambda)?;
    if params.encoding_trainable {
        // d/dw of λ·w²·‖H‖² = λ·w/2 for ‖H‖ = 1/2
        let h_sq = ROTATION_GENERATOR_NORM * ROTATION_GENERATOR_NORM;
        for g in layout.encoding_gates() {
            grad.d_weights[g.weight_slot] += 2.0 * lambda * h_sq * params.weights[g.weight_slot];
        }
    }
    Ok((data_loss + penalty, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_logistic_circuit, init_params, predict};
    use crate::statevector::PauliStringObservable;
    use crate::model::EncodingGate;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn finite_difference_raw(
        layout: &CircuitLayout,
        params: &ModelParams,
        x: &[f64],
        step: f64,
    ) -> GradientVector {
        let mut grad = GradientVector::zeros(layout.num_param_slots());
        for slot in 0..layout.num_param_slots() {
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus.weights[slot] += step;
            minus.weights[slot] -= step;
            grad.d_weights[slot] = (crate::model::evaluate_raw(layout, &plus, x).unwrap()
                - crate::model::evaluate_raw(layout, &minus, x).unwrap())
                / (2.0 * step);
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus.biases[slot] += step;
            minus.biases[slot] -= step;
            grad.d_biases[slot] = (crate::model::evaluate_raw(layout, &plus, x).unwrap()
                - crate::model::evaluate_raw(layout, &minus, x).unwrap())
                / (2.0 * step);
        }
        grad
    }

    fn random_input(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
        (0..len).map(|_| rng.gen_range(0.0..1.0)).collect()
    }

    #[test]
    fn shift_matches_finite_differences_at_origin() {
        let layout = build_logistic_circuit(4, 12).unwrap();
        let params = ModelParams {
            weights: vec![0.0; layout.num_param_slots()],
            biases: vec![0.0; layout.num_param_slots()],
            encoding_trainable: true,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = random_input(&mut rng, 12);
        let shift = grad_raw_parameter_shift(&layout, &params, &x).unwrap();
        let fd = finite_difference_raw(&layout, &params, &x, 1e-5);
        for (a, b) in shift.d_weights.iter().zip(&fd.d_weights) {
            assert!((a - b).abs() < 1e-6);
        }
        for (a, b) in shift.d_biases.iter().zip(&fd.d_biases) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn adjoint_agrees_with_shift_on_random_draws() {
        let layout = build_logistic_circuit(4, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for seed in 0..5 {
            let params = init_params(&layout, seed, true);
            let x = random_input(&mut rng, 6);
            let a = grad_raw_adjoint(&layout, &params, &x).unwrap();
            let s = grad_raw_parameter_shift(&layout, &params, &x).unwrap();
            for (u, v) in a.d_weights.iter().zip(&s.d_weights) {
                assert!((u - v).abs() < 1e-10);
            }
            for (u, v) in a.d_biases.iter().zip(&s.d_biases) {
                assert!((u - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn adjoint_matches_shift_on_tiny_circuit() {
        let layout = build_logistic_circuit(2, 1).unwrap();
        let params = init_params(&layout, 3, true);
        let x = [0.4];
        let a = grad_raw_adjoint(&layout, &params, &x).unwrap();
        let s = grad_raw_parameter_shift(&layout, &params, &x).unwrap();
        for (u, v) in a.d_weights.iter().zip(&s.d_weights) {
            assert!((u - v).abs() < 1e-12);
        }
        for (u, v) in a.d_biases.iter().zip(&s.d_biases) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn pinned_extremum_has_zero_gradient() {
        // single Z-rotation on |0⟩ with a Z observable never moves ⟨Z⟩
        let layout = CircuitLayout::new(
            1,
            1,
            vec![CircuitOp::Encoding(EncodingGate {
                qubit: 0,
                axis: PauliAxis::Z,
                feature_index: 0,
                weight_slot: 0,
                bias_slot: 0,
            })],
            PauliStringObservable::all_z(1),
        )
        .unwrap();
        let params =
            ModelParams { weights: vec![0.7], biases: vec![-0.3], encoding_trainable: true };
        for method in [GradientMethod::Adjoint, GradientMethod::ParameterShift] {
            let (_, g) = value_and_grad(&layout, &params, &[0.9], method).unwrap();
            assert_eq!(g.d_weights[0], 0.0);
            assert_eq!(g.d_biases[0], 0.0);
        }
    }

    #[test]
    fn bias_gradient_is_weight_gradient_over_feature() {
        let layout = build_logistic_circuit(3, 4).unwrap();
        let params = init_params(&layout, 9, true);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.1..1.0)).collect();
        let g = grad_raw_adjoint(&layout, &params, &x).unwrap();
        for gate in layout.encoding_gates() {
            let xv = x[gate.feature_index];
            assert!((g.d_weights[gate.weight_slot] / xv - g.d_biases[gate.bias_slot]).abs() < 1e-9);
        }
    }

    #[test]
    fn mask_zeroes_weight_gradients() {
        let layout = build_logistic_circuit(4, 3).unwrap();
        let params = init_params(&layout, 8, false);
        let x = [0.2, 0.8, 0.5];
        for grad in [
            grad_raw_adjoint(&layout, &params, &x).unwrap(),
            grad_raw_parameter_shift(&layout, &params, &x).unwrap(),
        ] {
            assert!(grad.d_weights.iter().all(|&g| g == 0.0));
            assert!(grad.d_biases.iter().any(|&g| g != 0.0));
        }
    }

    #[test]
    fn regularizer_examples() {
        let layout = build_logistic_circuit(2, 1).unwrap(); // 4 encoding gates
        let zero = ModelParams {
            weights: vec![0.0; 4],
            biases: vec![0.3; 4],
            encoding_trainable: true,
        };
        assert_eq!(regularizer(&zero, &layout, 1.0).unwrap(), 0.0);

        // one gate with weight 2, λ = 1 → 1 · (4 · 0.25) = 1
        let single = CircuitLayout::new(
            1,
            1,
            vec![CircuitOp::Encoding(EncodingGate {
                qubit: 0,
                axis: PauliAxis::Y,
                feature_index: 0,
                weight_slot: 0,
                bias_slot: 0,
            })],
            PauliStringObservable::all_z(1),
        )
        .unwrap();
        let params = ModelParams { weights: vec![2.0], biases: vec![0.0], encoding_trainable: true };
        assert_eq!(regularizer(&params, &single, 1.0).unwrap(), 1.0);
        assert_eq!(regularizer(&params, &single, 0.0).unwrap(), 0.0);
        assert!(regularizer(&params, &single, -0.1).is_err());
    }

    #[test]
    fn penalty_gradient_matches_closed_form() {
        let layout = build_logistic_circuit(2, 2).unwrap();
        let params = init_params(&layout, 4, true);
        let lambda = 0.13;
        let h = 1e-6;
        for slot in 0..layout.num_param_slots() {
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus.weights[slot] += h;
            minus.weights[slot] -= h;
            let fd = (regularizer(&plus, &layout, lambda).unwrap()
                - regularizer(&minus, &layout, lambda).unwrap())
                / (2.0 * h);
            let closed = lambda * params.weights[slot] / 2.0;
            assert!((fd - closed).abs() < 1e-8);
        }
    }

    #[test]
    fn loss_decomposes_into_data_term_and_penalty() {
        // an identity circuit predicts offset + slope exactly, so targets at
        // that value give zero data loss
        let layout = build_logistic_circuit(2, 2).unwrap();
        let params = ModelParams {
            weights: vec![0.0; layout.num_param_slots()],
            biases: vec![0.0; layout.num_param_slots()],
            encoding_trainable: true,
        };
        let scaling = OutputScaling::from_target_range(3.5, 4.0).unwrap();
        let batch = vec![
            Sample { sequence: vec![0.1, 0.7], target: 4.0 },
            Sample { sequence: vec![0.9, 0.2], target: 4.0 },
        ];
        let (loss, grad) = grad_loss(&layout, &params, &scaling, &batch, 0.0, GradientMethod::Adjoint).unwrap();
        assert!(loss.abs() < 1e-24);
        assert!(grad.d_weights.iter().all(|&g| g.abs() < 1e-12));

        // with λ > 0 and zero weights the penalty is still zero; shift one
        // weight to see the exact decomposition
        let mut bent = params.clone();
        bent.weights[0] = 2.0;
        let (loss_reg, _) =
            grad_loss(&layout, &bent, &scaling, &batch, 0.5, GradientMethod::Adjoint).unwrap();
        let (loss_plain, _) =
            grad_loss(&layout, &bent, &scaling, &batch, 0.0, GradientMethod::Adjoint).unwrap();
        let penalty = regularizer(&bent, &layout, 0.5).unwrap();
        assert!((loss_reg - loss_plain - penalty).abs() < 1e-12);
    }

    #[test]
    fn perfect_predictions_leave_only_the_penalty() {
        // build targets from the model's own outputs so the data term is
        // exactly zero while the weights are generic
        let layout = build_logistic_circuit(2, 3).unwrap();
        let params = init_params(&layout, 14, true);
        let scaling = OutputScaling::from_target_range(3.5, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let batch: Vec<Sample> = (0..3)
            .map(|_| {
                let sequence = random_input(&mut rng, 3);
                let target = predict(&layout, &params, &scaling, &sequence).unwrap();
                Sample { sequence, target }
            })
            .collect();
        let lambda = 0.2;
        let (loss, _) =
            grad_loss(&layout, &params, &scaling, &batch, lambda, GradientMethod::Adjoint).unwrap();
        let penalty = regularizer(&params, &layout, lambda).unwrap();
        assert!(penalty > 0.0);
        assert_eq!(loss, penalty);
    }

    #[test]
    fn loss_gradient_matches_finite_differences() {
        let layout = build_logistic_circuit(2, 2).unwrap();
        let params = init_params(&layout, 21, true);
        let scaling = OutputScaling::from_target_range(3.5, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let batch: Vec<Sample> = (0..4)
            .map(|_| Sample {
                sequence: random_input(&mut rng, 2),
                target: rng.gen_range(3.5..4.0),
            })
            .collect();
        let lambda = 0.01;
        let (_, grad) =
            grad_loss(&layout, &params, &scaling, &batch, lambda, GradientMethod::Adjoint).unwrap();

        let loss_of = |p: &ModelParams| {
            let mut acc = 0.0;
            for s in &batch {
                let d = predict(&layout, p, &scaling, &s.sequence).unwrap() - s.target;
                acc += d * d / batch.len() as f64;
            }
            acc + regularizer(p, &layout, lambda).unwrap()
        };
        let h = 1e-5;
        for slot in 0..layout.num_param_slots() {
            let mut plus = params.clone();
            let mut minus = params.clone();
            plus.weights[slot] += h;
            minus.weights[slot] -= h;
            let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
            let rel = (fd - grad.d_weights[slot]).abs() / fd.abs().max(1e-3);
            assert!(rel < 1e-6, "weight slot {slot}: fd {fd} vs grad {}", grad.d_weights[slot]);

            let mut plus = params.clone();
            let mut minus = params.clone();
            plus.biases[slot] += h;
            minus.biases[slot] -= h;
            let fd = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
            let rel = (fd - grad.d_biases[slot]).abs() / fd.abs().max(1e-3);
            assert!(rel < 1e-6, "bias slot {slot}: fd {fd} vs grad {}", grad.d_biases[slot]);
        }
    }

    #[test]
    fn grad_loss_rejects_empty_batch() {
        let layout = build_logistic_circuit(2, 1).unwrap();
        let params = init_params(&layout, 0, true);
        let scaling = OutputScaling::from_target_range(3.5, 4.0).unwrap();
        assert!(grad_loss(&layout, &params, &scaling, &[], 0.0, GradientMethod::Adjoint).is_err());
    }
}
