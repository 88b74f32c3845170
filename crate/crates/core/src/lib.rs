//! Numerical spectral theory for one-dimensional quasiperiodic Schrödinger
//! operators
//!
//! ```text
//! (H(x) psi)(n) = psi(n+1) + psi(n-1) + f(x + n alpha) psi(n)
//! ```
//!
//! with `f` an unbounded, 1-periodic, Lipschitz-monotone potential.

pub mod arithmetic;
pub mod boxes;
pub mod cocycle;
pub mod error;
pub mod greens;
pub mod ids;
pub mod phases;
pub mod potential;
pub mod spectrum;
pub mod tridiag;

pub use arithmetic::Frequency;
pub use boxes::BoxOperator;
pub use error::{Result, SpectraError};
pub use potential::PotentialSpec;
