//! Dense statevector simulation and Lipschitz-aware training of variational
//! quantum models with trainable data encoding.
//!
//! The crate implements the full numerical pipeline for regressing the
//! logistic-map parameter `r` from short chaotic time series with a
//! data-reuploading quantum circuit:
//!
//! * [`statevector`] — exact few-qubit state simulation (rotations, CNOT,
//!   Pauli-string expectation values);
//! * [`model`] — the parameterized circuit `f_Θ(x)`, its four-qubit
//!   instantiation and output scaling;
//! * [`gradients`] — exact gradients via adjoint backpropagation, with the
//!   parameter-shift rule as an independent oracle;
//! * [`lipschitz`] — the closed-form Lipschitz bound `2‖M‖ Σ ‖w_j‖‖H_j‖`,
//!   empirical Lipschitz probing, and generalization-gap bookkeeping;
//! * [`dataset`] — logistic-map data generation, splits, noise perturbation
//!   and bifurcation tables;
//! * [`training`] — a deterministic Adam loop minimizing the MSE plus the
//!   weight-norm penalty `λ Σ ‖w_j‖²‖H_j‖²`.
//!
//! Everything here is `no_std`-compatible (requires `alloc`); file formats,
//! CSV/JSON output and the CLI live in the companion `vqlip-lab` crate.
//!
//! All randomness flows through explicitly seeded ChaCha8 generators
//! ([`rand_chacha::ChaCha8Rng`]), so every result is a pure function of its
//! seeds. Transcendental functions are always taken from `libm`, keeping
//! outputs identical between `std` and `no_std` builds.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
// `!(x >= 0.0)` and friends deliberately treat NaN as out of domain
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod gradients;
pub mod lipschitz;
pub mod model;
pub mod seeds;
pub mod statevector;
pub mod training;

pub use error::{Error, Result};
pub use statevector::{PauliAxis, PauliStringObservable, StateVector};
