//! Error type shared by all modules of the crate.

use core::fmt;

/// Errors reported by circuit construction, simulation and training.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Requested register size is outside the dense-simulation budget.
    Capacity { requested: usize, min: usize, max: usize },
    /// Qubit index does not address a qubit of the register.
    QubitIndex { qubit: usize, num_qubits: usize },
    /// Gate construction violates a structural rule (identity rotation axis,
    /// CNOT with control == target, ...).
    InvalidGate(&'static str),
    /// An array length does not match what the layout requires.
    Shape { what: &'static str, expected: usize, actual: usize },
    /// A scalar argument lies outside its valid domain.
    Domain(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Capacity { requested, min, max } => write!(
                f,
                "register size {requested} outside supported range {min}..={max}"
            ),
            Error::QubitIndex { qubit, num_qubits } => {
                write!(f, "qubit index {qubit} out of range for {num_qubits} qubits")
            }
            Error::InvalidGate(msg) => write!(f, "invalid gate: {msg}"),
            Error::Shape { what, expected, actual } => {
                write!(f, "shape mismatch for {what}: expected {expected}, got {actual}")
            }
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
