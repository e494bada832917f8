//! Dense complex linear algebra and symbolic Pauli algebra.

mod matrix;
mod pauli;

pub use matrix::*;
pub use pauli::{pauli_decompose, pauli_mul, Pauli, PauliString, PauliSum, Phase, DROP_TOL};
