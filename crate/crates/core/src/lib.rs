//! Engineered dissipation for open n-qubit systems.
//!
//! The crate builds Lindblad operators whose dark space is a chosen pure state
//! or subspace (graph and cluster states in particular), checks the resulting
//! dynamics three ways (time integration, Liouvillian null space, and linear
//! quantum-state-diffusion trajectories), and compiles many-body
//! system–bath couplings `exp(iθ W⊗B)` into one- and two-qubit conjugations.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod compiler;
pub mod error;
pub mod dissipators;
pub mod lindblad;
pub mod qsd;
pub mod states;

pub use error::{Error, Result};
