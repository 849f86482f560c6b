//! Test-only dense linear algebra, independent of the statevector kernels.
#![allow(dead_code)] // each test binary uses a different subset

//!
//! Everything here works on explicit `2^q × 2^q` matrices so it can serve
//! as an oracle for the simulator: gates are built with Kronecker products
//! and a Taylor-series matrix exponential, never with the closed-form
//! rotation matrices the implementation uses.

use num_complex::Complex64;
use vqlip_core::PauliAxis;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense square complex matrix.
#[derive(Clone, Debug)]
pub struct Mat {
    pub dim: usize,
    pub data: Vec<Complex64>, // row major
}

impl Mat {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Mat::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.at(r, k);
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.at(k, c);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len());
        (0..self.dim)
            .map(|r| (0..self.dim).map(|c| self.at(r, c) * v[c]).sum())
            .collect()
    }

    pub fn scale(&self, s: Complex64) -> Mat {
        Mat { dim: self.dim, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!(self.dim, other.dim);
        Mat {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn kron(&self, other: &Mat) -> Mat {
        let n = self.dim * other.dim;
        let mut out = Mat::zeros(n);
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        out.set(
                            r1 * other.dim + r2,
                            c1 * other.dim + c2,
                            self.at(r1, c1) * other.at(r2, c2),
                        );
                    }
                }
            }
        }
        out
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Matrix exponential via scaling-and-squaring plus a Taylor series.
    pub fn expm(&self) -> Mat {
        let mut scale_pow = 0u32;
        let mut norm = self.max_abs() * self.dim as f64;
        while norm > 0.5 {
            norm /= 2.0;
            scale_pow += 1;
        }
        let scaled = self.scale(Complex64::new(1.0 / f64::powi(2.0, scale_pow as i32), 0.0));
        let mut result = Mat::identity(self.dim);
        let mut term = Mat::identity(self.dim);
        for k in 1..=30 {
            term = term.matmul(&scaled).scale(Complex64::new(1.0 / k as f64, 0.0));
            result = result.add(&term);
        }
        for _ in 0..scale_pow {
            result = result.matmul(&result);
        }
        result
    }
}

pub fn pauli_matrix(axis: PauliAxis) -> Mat {
    let mut m = Mat::zeros(2);
    match axis {
        PauliAxis::I => {
            m.set(0, 0, ONE);
            m.set(1, 1, ONE);
        }
        PauliAxis::X => {
            m.set(0, 1, ONE);
            m.set(1, 0, ONE);
        }
        PauliAxis::Y => {
            m.set(0, 1, Complex64::new(0.0, -1.0));
            m.set(1, 0, Complex64::new(0.0, 1.0));
        }
        PauliAxis::Z => {
            m.set(0, 0, ONE);
            m.set(1, 1, -ONE);
        }
    }
    m
}

/// Embeds a single-qubit operator at `qubit` of a `num_qubits` register.
/// Qubit 0 is the most significant index bit, so it is the leftmost
/// Kronecker factor.
pub fn embed_single(num_qubits: usize, qubit: usize, op: &Mat) -> Mat {
    let mut full = Mat::identity(1);
    for q in 0..num_qubits {
        let factor = if q == qubit { op.clone() } else { Mat::identity(2) };
        full = full.kron(&factor);
    }
    full
}

/// Dense rotation gate `exp(-i·angle·P/2)` on one qubit of the register,
/// built through the matrix exponential.
pub fn rotation_matrix(num_qubits: usize, qubit: usize, axis: PauliAxis, angle: f64) -> Mat {
    let generator = pauli_matrix(axis).scale(Complex64::new(0.0, -0.5 * angle));
    embed_single(num_qubits, qubit, &generator.expm())
}

/// Dense CNOT as an explicit basis permutation.
pub fn cnot_matrix(num_qubits: usize, control: usize, target: usize) -> Mat {
    let dim = 1 << num_qubits;
    let c_bit = num_qubits - 1 - control;
    let t_bit = num_qubits - 1 - target;
    let mut m = Mat::zeros(dim);
    for col in 0..dim {
        let row = if col >> c_bit & 1 == 1 { col ^ (1 << t_bit) } else { col };
        m.set(row, col, ONE);
    }
    m
}

/// Dense Pauli-string observable.
pub fn pauli_string_matrix(factors: &[PauliAxis]) -> Mat {
    let mut full = Mat::identity(1);
    for &axis in factors {
        full = full.kron(&pauli_matrix(axis));
    }
    full
}

/// `⟨ψ|M|ψ⟩` evaluated densely.
pub fn dense_expectation(m: &Mat, psi: &[Complex64]) -> f64 {
    let mpsi = m.matvec(psi);
    let val: Complex64 = psi.iter().zip(&mpsi).map(|(a, b)| a.conj() * b).sum();
    assert!(val.im.abs() < 1e-12);
    val.re
}

pub fn max_elementwise_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
