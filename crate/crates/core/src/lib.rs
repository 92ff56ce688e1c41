//! # coherence
//!
//! Quantifying and manipulating quantum coherence in a fixed reference basis.
//!
//! The crate is organized around two ideas:
//!
//! - **Measures from simplex functions.** Any nonnegative function `f` on the
//!   probability simplex that vanishes on the vertices, is symmetric under
//!   permutations, and is concave, yields a coherence measure: on pure states
//!   `C_f(ψ) = f(|ψ_1|², …, |ψ_d|²)`, extended to mixed states by the convex
//!   roof. See [`measures`].
//! - **Optimal single-copy conversion.** The greatest probability of turning a
//!   pure state `ψ` into `φ` with incoherent operations is
//!   `min_l Σ_{i≥l} |ψ_i|² / Σ_{i≥l} |φ_i|²` (coefficients sorted by modulus).
//!   [`conversion`] computes this value and synthesizes an explicit Kraus
//!   protocol attaining it, which [`channels`] can simulate and check.
//!
//! Supporting modules: [`simplex`] (probability vectors, majorization,
//! T-transform chains), [`states`] (pure states, density matrices,
//! canonical forms) and [`random`] (seeded samplers used by tests and demos).
//!
//! A narrative guide with runnable listings lives in the `book/` directory of
//! the repository.

#![forbid(unsafe_code)]

pub mod channels;
pub mod conversion;
mod error;
pub mod measures;
pub mod random;
pub mod simplex;
pub mod states;
pub mod tolerance;

pub use error::{Error, Result};

/// Complex scalar used for amplitudes and matrix entries.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix in the fixed incoherent basis.
pub type CMatrix = nalgebra::DMatrix<C64>;

pub use channels::{Branch, KrausSet};
pub use conversion::{ConversionLadder, Protocol};
pub use measures::{Builtin, CoherenceFunctional};
pub use simplex::{ProbVector, TTransform};
pub use states::{Canonicalization, DensityMatrix, PureState};
