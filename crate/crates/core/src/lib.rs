//! Parametrized axisymmetric thermo-mechanical model of a furnace hearth wall,
//! with full-order finite elements and two reduced-order tracks: POD-Galerkin
//! projection and POD coefficients regressed by a small neural network.

pub mod config;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod manufactured;
pub mod persist;
pub mod pipeline;
pub mod pod;
pub mod problem;
pub mod rom_ann;
pub mod rom_galerkin;
pub mod sampling;

pub use error::{Error, Result};
