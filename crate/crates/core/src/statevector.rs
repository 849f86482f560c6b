//! Exact dense simulation of few-qubit quantum registers.
//!
//! A [`StateVector`] holds all `2^q` complex amplitudes of a `q`-qubit
//! register. Qubit 0 is the most significant bit of the amplitude index:
//! for `q = 2`, index 1 is `|01⟩` (qubit 0 in `|0⟩`, qubit 1 in `|1⟩`).
//! Gates mutate the state in place and preserve the 2-norm.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register size accepted by [`StateVector::zero`].
///
/// 24 qubits is 16M amplitudes (256 MiB); beyond that dense simulation is
/// not a sensible tool.
pub const MAX_QUBITS: usize = 24;

/// Single-qubit Pauli alphabet.
///
/// `I` is only valid inside observable strings; rotation gates take one of
/// `X`, `Y`, `Z` as their generator axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

/// A tensor product of single-qubit Pauli operators, one factor per qubit.
///
/// Pauli strings square to the identity, so their spectral norm is exactly 1
/// (including the all-identity string).
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PauliStringObservable {
    factors: Vec<PauliAxis>,
}

impl PauliStringObservable {
    pub fn new(factors: Vec<PauliAxis>) -> Self {
        Self { factors }
    }

    /// The all-`Z` string `Z ⊗ ... ⊗ Z` on `num_qubits` qubits.
    pub fn all_z(num_qubits: usize) -> Self {
        Self { factors: vec![PauliAxis::Z; num_qubits] }
    }

    pub fn factors(&self) -> &[PauliAxis] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Spectral norm of the represented operator. Pauli strings have
    /// eigenvalues in `{+1, -1}`, so this is always 1.
    pub fn spectral_norm(&self) -> f64 {
        1.0
    }

    /// True when every factor is `I` or `Z`, i.e. the operator is diagonal
    /// in the computational basis.
    fn is_diagonal(&self) -> bool {
        self.factors
            .iter()
            .all(|&p| matches!(p, PauliAxis::I | PauliAxis::Z))
    }
}

/// Dense amplitude vector of a `q`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Creates `|0...0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&num_qubits) {
            return Err(Error::Capacity { requested: num_qubits, min: 1, max: MAX_QUBITS });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// `Σ |amplitude|²`; equals 1 up to rounding for any reachable state.
    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Index stride separating the `|0⟩`/`|1⟩` halves of `qubit`.
    ///
    /// Qubit 0 is the most significant index bit.
    fn stride(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitIndex { qubit, num_qubits: self.num_qubits });
        }
        Ok(())
    }

    /// Visits every amplitude pair `(i0, i1)` with `i1 = i0 + stride`, where
    /// `i0` has the qubit's bit clear.
    #[inline]
    fn for_each_pair(&mut self, qubit: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
        let stride = self.stride(qubit);
        let n = self.amps.len();
        let mut base = 0;
        while base < n {
            for i0 in base..base + stride {
                let (lo, hi) = self.amps.split_at_mut(i0 + stride);
                f(&mut lo[i0], &mut hi[0]);
            }
            base += 2 * stride;
        }
    }

    /// Applies the rotation `exp(-i·angle·P/2)` about `axis` to `qubit`.
    ///
    /// The generator is `H = P/2`, spectral norm 1/2; Lipschitz-bound
    /// arithmetic elsewhere in the crate relies on this convention.
    pub fn apply_rotation(&mut self, qubit: usize, axis: PauliAxis, angle: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        let (s, c) = libm::sincos(0.5 * angle);
        match axis {
            PauliAxis::I => return Err(Error::InvalidGate("identity is not a rotation axis")),
            PauliAxis::X => self.for_each_pair(qubit, |a0, a1| {
                // [[c, -is], [-is, c]]
                let t0 = *a0;
                let t1 = *a1;
                *a0 = c * t0 - Complex64::new(0.0, s) * t1;
                *a1 = c * t1 - Complex64::new(0.0, s) * t0;
            }),
            PauliAxis::Y => self.for_each_pair(qubit, |a0, a1| {
                // [[c, -s], [s, c]]
                let t0 = *a0;
                let t1 = *a1;
                *a0 = c * t0 - s * t1;
                *a1 = s * t0 + c * t1;
            }),
            PauliAxis::Z => {
                // diag(c - is, c + is)
                let e0 = Complex64::new(c, -s);
                let e1 = Complex64::new(c, s);
                self.for_each_pair(qubit, |a0, a1| {
                    *a0 *= e0;
                    *a1 *= e1;
                });
            }
        }
        Ok(())
    }

    /// Flips `target` on every basis state whose `control` bit is set.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::InvalidGate("CNOT control equals target"));
        }
        let c_stride = self.stride(control);
        let t_stride = self.stride(target);
        for i in 0..self.amps.len() {
            // visit each swapped pair once: control set, target clear
            if i & c_stride != 0 && i & t_stride == 0 {
                self.amps.swap(i, i | t_stride);
            }
        }
        Ok(())
    }

    /// Applies a single Pauli operator to `qubit` (used for observables and
    /// adjoint differentiation; not a unitary *gate* of the circuit model).
    pub fn apply_pauli(&mut self, qubit: usize, axis: PauliAxis) -> Result<()> {
        self.check_qubit(qubit)?;
        match axis {
            PauliAxis::I => {}
            PauliAxis::X => self.for_each_pair(qubit, |a0, a1| {
                core::mem::swap(a0, a1);
            }),
            PauliAxis::Y => self.for_each_pair(qubit, |a0, a1| {
                // Y = [[0, -i], [i, 0]]
                let t0 = *a0;
                *a0 = Complex64::new(0.0, -1.0) * *a1;
                *a1 = Complex64::new(0.0, 1.0) * t0;
            }),
            PauliAxis::Z => self.for_each_pair(qubit, |_, a1| {
                *a1 = -*a1;
            }),
        }
        Ok(())
    }

    /// Applies a whole Pauli string, factor by factor.
    pub fn apply_pauli_string(&mut self, obs: &PauliStringObservable) -> Result<()> {
        if obs.len() != self.num_qubits {
            return Err(Error::Shape {
                what: "observable factors",
                expected: self.num_qubits,
                actual: obs.len(),
            });
        }
        for (qubit, &axis) in obs.factors().iter().enumerate() {
            self.apply_pauli(qubit, axis)?;
        }
        Ok(())
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Expectation value `⟨ψ|M|ψ⟩` of a Pauli-string observable.
    ///
    /// The value is mathematically real; the imaginary residue is asserted
    /// below 1e-12 and discarded.
    pub fn expectation(&self, obs: &PauliStringObservable) -> Result<f64> {
        if obs.len() != self.num_qubits {
            return Err(Error::Shape {
                what: "observable factors",
                expected: self.num_qubits,
                actual: obs.len(),
            });
        }
        if obs.is_diagonal() {
            // diagonal fast path: signed probability sum, no copy
            let mut z_mask = 0usize;
            for (qubit, &axis) in obs.factors().iter().enumerate() {
                if axis == PauliAxis::Z {
                    z_mask |= self.stride(qubit);
                }
            }
            let mut acc = 0.0;
            for (i, a) in self.amps.iter().enumerate() {
                let p = a.norm_sqr();
                if (i & z_mask).count_ones() & 1 == 0 {
                    acc += p;
                } else {
                    acc -= p;
                }
            }
            return Ok(acc);
        }
        let mut transformed = self.clone();
        transformed.apply_pauli_string(obs)?;
        let value = self.inner(&transformed);
        assert!(
            value.im.abs() < 1e-12,
            "expectation of a Hermitian observable must be real"
        );
        Ok(value.re)
    }
}
