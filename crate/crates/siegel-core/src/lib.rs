//! Numerical library for abelian actions on Heisenberg nilmanifolds:
//! Siegel symplectic geometry and modular heights, Diophantine classification
//! along Cartan renormalization flows, spectral solvers for the cohomological
//! equation (Fourier model on tori, Hermite model of the Schrödinger
//! representation), Birkhoff sums over cubes, and g-dimensional finite theta
//! sums with growth-rate fitting.

pub mod cohomology;
pub mod error;
pub mod heisenberg;
pub mod kahan;
pub mod reduction;
pub mod serialize;
pub mod symplectic;
pub mod theta;
pub mod threads;

pub use error::SiegelError;

/// Crate result alias.
pub type Result<T> = std::result::Result<T, SiegelError>;
