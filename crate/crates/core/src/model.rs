//! The variational quantum model `f_Θ(x)` with trainable data encoding.
//!
//! Every encoding gate is a single-qubit rotation `exp(-i(w·x[k] + θ)P/2)`
//! whose angle mixes one input feature `x[k]` with a trainable weight `w`
//! and bias `θ`. Constant CNOT gates provide entanglement and carry no
//! parameters. Freezing the weights (`encoding_trainable = false`) realizes
//! a fixed-encoding circuit as a special case of the same layout; there is
//! no separate code path, so outputs are bit-identical for equal parameters.

use alloc::vec;
use alloc::vec::Vec;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::statevector::{PauliAxis, PauliStringObservable, StateVector};

/// One data-encoding rotation gate.
///
/// `weight_slot`/`bias_slot` index the [`ModelParams`] arrays; each slot is
/// owned by exactly one gate. The gate reads the single feature
/// `x[feature_index]`, so the gate's weight vector has one nonzero entry and
/// its 2-norm is `|weight|`.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EncodingGate {
    pub qubit: usize,
    pub axis: PauliAxis,
    pub feature_index: usize,
    pub weight_slot: usize,
    pub bias_slot: usize,
}

/// One executable circuit element.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CircuitOp {
    Encoding(EncodingGate),
    Cnot { control: usize, target: usize },
}

/// Static gate sequence plus the measured observable.
///
/// Ops execute left to right on `|0...0⟩`. Construction validates all
/// structural invariants, so a `CircuitLayout` in hand is always executable.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CircuitLayout {
    num_qubits: usize,
    sequence_length: usize,
    ops: Vec<CircuitOp>,
    observable: PauliStringObservable,
    num_param_slots: usize,
}

impl CircuitLayout {
    /// Validates and assembles a layout.
    ///
    /// Weight and bias slots must each form a permutation of
    /// `0..num_encoding_gates`, so parameter arrays are dense.
    pub fn new(
        num_qubits: usize,
        sequence_length: usize,
        ops: Vec<CircuitOp>,
        observable: PauliStringObservable,
    ) -> Result<Self> {
        if num_qubits < 1 {
            return Err(Error::Domain("layout needs at least one qubit"));
        }
        if sequence_length < 1 {
            return Err(Error::Domain("sequence length must be at least 1"));
        }
        if observable.len() != num_qubits {
            return Err(Error::Shape {
                what: "observable factors",
                expected: num_qubits,
                actual: observable.len(),
            });
        }
        let num_gates = ops
            .iter()
            .filter(|op| matches!(op, CircuitOp::Encoding(_)))
            .count();
        let mut weight_seen = vec![false; num_gates];
        let mut bias_seen = vec![false; num_gates];
        for op in &ops {
            match op {
                CircuitOp::Encoding(g) => {
                    if g.qubit >= num_qubits {
                        return Err(Error::QubitIndex { qubit: g.qubit, num_qubits });
                    }
                    if g.axis == PauliAxis::I {
                        return Err(Error::InvalidGate("identity is not a rotation axis"));
                    }
                    if g.feature_index >= sequence_length {
                        return Err(Error::Domain("encoding gate reads a feature beyond the sequence length"));
                    }
                    if g.weight_slot >= num_gates || weight_seen[g.weight_slot] {
                        return Err(Error::Domain("weight slots must be unique and dense"));
                    }
                    if g.bias_slot >= num_gates || bias_seen[g.bias_slot] {
                        return Err(Error::Domain("bias slots must be unique and dense"));
                    }
                    weight_seen[g.weight_slot] = true;
                    bias_seen[g.bias_slot] = true;
                }
                CircuitOp::Cnot { control, target } => {
                    if *control >= num_qubits {
                        return Err(Error::QubitIndex { qubit: *control, num_qubits });
                    }
                    if *target >= num_qubits {
                        return Err(Error::QubitIndex { qubit: *target, num_qubits });
                    }
                    if control == target {
                        return Err(Error::InvalidGate("CNOT control equals target"));
                    }
                }
            }
        }
        Ok(Self { num_qubits, sequence_length, ops, observable, num_param_slots: num_gates })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of timesteps `l`; inputs must have exactly this length.
    pub fn sequence_length(&self) -> usize {
        self.sequence_length
    }

    pub fn ops(&self) -> &[CircuitOp] {
        &self.ops
    }

    pub fn observable(&self) -> &PauliStringObservable {
        &self.observable
    }

    /// Number of weight slots (equal to the number of bias slots and of
    /// encoding gates).
    pub fn num_param_slots(&self) -> usize {
        self.num_param_slots
    }

    pub fn encoding_gates(&self) -> impl Iterator<Item = &EncodingGate> {
        self.ops.iter().filter_map(|op| match op {
            CircuitOp::Encoding(g) => Some(g),
            CircuitOp::Cnot { .. } => None,
        })
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.sequence_length {
            return Err(Error::Shape {
                what: "input sequence",
                expected: self.sequence_length,
                actual: x.len(),
            });
        }
        Ok(())
    }
}

/// The trainable parameter set Θ: one weight and one bias per encoding gate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    /// When false the weights are frozen at their initial values: gradients
    /// mask the weight slots and the optimizer never touches them.
    pub encoding_trainable: bool,
}

impl ModelParams {
    fn check_shape(&self, layout: &CircuitLayout) -> Result<()> {
        if self.weights.len() != layout.num_param_slots() {
            return Err(Error::Shape {
                what: "weights",
                expected: layout.num_param_slots(),
                actual: self.weights.len(),
            });
        }
        if self.biases.len() != layout.num_param_slots() {
            return Err(Error::Shape {
                what: "biases",
                expected: layout.num_param_slots(),
                actual: self.biases.len(),
            });
        }
        Ok(())
    }
}

/// Affine map from the raw expectation value in `[-1, 1]` to the target
/// domain `[offset - slope, offset + slope]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OutputScaling {
    offset: f64,
    slope: f64,
}

impl OutputScaling {
    pub fn new(offset: f64, slope: f64) -> Result<Self> {
        if !(slope > 0.0) {
            return Err(Error::Domain("output scaling slope must be positive"));
        }
        Ok(Self { offset, slope })
    }

    /// Scaling whose output range is exactly `[lo, hi]`.
    pub fn from_target_range(lo: f64, hi: f64) -> Result<Self> {
        Self::new(0.5 * (lo + hi), 0.5 * (hi - lo))
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn apply(&self, raw: f64) -> f64 {
        self.offset + self.slope * raw
    }
}

/// Builds the sequential four-qubit-style circuit for logistic-map
/// regression, generalized to any register size and sequence length.
///
/// Per timestep `i` and qubit `j` (ascending `j`): a Z-axis encoding gate
/// then a Y-axis encoding gate, both reading feature `x[i]`; the timestep
/// ends with the open CNOT chain `0→1, 1→2, ..., q-2→q-1`. The observable
/// is the all-Z string.
pub fn build_logistic_circuit(num_qubits: usize, sequence_length: usize) -> Result<CircuitLayout> {
    if num_qubits < 2 {
        return Err(Error::Domain("logistic circuit needs at least 2 qubits"));
    }
    if sequence_length < 1 {
        return Err(Error::Domain("sequence length must be at least 1"));
    }
    let mut ops = Vec::with_capacity(sequence_length * (2 * num_qubits + num_qubits - 1));
    let mut slot = 0;
    for timestep in 0..sequence_length {
        for qubit in 0..num_qubits {
            for axis in [PauliAxis::Z, PauliAxis::Y] {
                ops.push(CircuitOp::Encoding(EncodingGate {
                    qubit,
                    axis,
                    feature_index: timestep,
                    weight_slot: slot,
                    bias_slot: slot,
                }));
                slot += 1;
            }
        }
        for control in 0..num_qubits - 1 {
            ops.push(CircuitOp::Cnot { control, target: control + 1 });
        }
    }
    CircuitLayout::new(
        num_qubits,
        sequence_length,
        ops,
        PauliStringObservable::all_z(num_qubits),
    )
}

/// Draws all weights, then all biases, i.i.d. uniform from `[-π/2, π/2]`
/// using a ChaCha8 generator seeded with `seed`.
pub fn init_params(layout: &CircuitLayout, seed: u64, encoding_trainable: bool) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half_pi = core::f64::consts::FRAC_PI_2;
    let dist = Uniform::new_inclusive(-half_pi, half_pi);
    let n = layout.num_param_slots();
    let weights = (0..n).map(|_| dist.sample(&mut rng)).collect();
    let biases = (0..n).map(|_| dist.sample(&mut rng)).collect();
    ModelParams { weights, biases, encoding_trainable }
}

/// Executes the layout on a fresh zero state and returns the final state.
pub(crate) fn run_circuit(
    layout: &CircuitLayout,
    params: &ModelParams,
    x: &[f64],
) -> Result<StateVector> {
    let mut state = StateVector::zero(layout.num_qubits())?;
    for op in layout.ops() {
        match op {
            CircuitOp::Encoding(g) => {
                let angle = params.weights[g.weight_slot] * x[g.feature_index]
                    + params.biases[g.bias_slot];
                state.apply_rotation(g.qubit, g.axis, angle)?;
            }
            CircuitOp::Cnot { control, target } => state.apply_cnot(*control, *target)?,
        }
    }
    Ok(state)
}

/// The raw model output `⟨0|U_Θ(x)† M U_Θ(x)|0⟩ ∈ [-1, 1]`.
pub fn evaluate_raw(layout: &CircuitLayout, params: &ModelParams, x: &[f64]) -> Result<f64> {
    layout.check_input(x)?;
    params.check_shape(layout)?;
    let state = run_circuit(layout, params, x)?;
    state.expectation(layout.observable())
}

/// The scaled prediction `offset + slope · evaluate_raw(x)`.
pub fn predict(
    layout: &CircuitLayout,
    params: &ModelParams,
    scaling: &OutputScaling,
    x: &[f64],
) -> Result<f64> {
    Ok(scaling.apply(evaluate_raw(layout, params, x)?))
}
