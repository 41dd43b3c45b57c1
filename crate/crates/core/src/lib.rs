//! Optimal initial states of a quantized bosonic control mode.
//!
//! A target system of one or more multilevel atoms is coupled linearly to a
//! single field mode through the field amplitude `X = (a + a†)/2`, with no
//! rotating-wave approximation. For a control time `T`, initial atomic state
//! `|i⟩` and desired atomic state `|f⟩`, the field-space operator
//!
//! ```text
//! M = T_fi† Π T_fi,    T_fi = ⟨f| U(T) |i⟩
//! ```
//!
//! is Hermitian positive semidefinite. Its largest eigenvalue is the best
//! achievable target population (the fidelity) and the eigenvector is the
//! field state that achieves it. `Π` projects on Fock states `n ≤ N_max`.
//!
//! The crate is `no_std` and only needs `alloc`. Dense linear algebra is done
//! with [`faer`] running sequentially, so every result is deterministic.
//!
//! Modules, bottom-up:
//!
//! - [`fock`]: truncated Fock space, atomic level structure, operator embedding.
//! - [`model`]: the joint Hamiltonian and the named scenario presets.
//! - [`propagator`]: spectral decomposition and exact time evolution.
//! - [`control`]: transition operator, control operator, eigenproblem,
//!   coherent-state baseline, parity superposition.
//! - [`analysis`]: number statistics, Wigner functions, target constructors.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod control;
mod error;
pub mod fock;
pub mod linalg;
pub mod model;
pub mod propagator;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, StateVector, C64};
