//! Full-order axisymmetric finite elements: thermal and mechanical assembly,
//! solves, inner products and stress recovery.

mod data;
mod element;
pub mod export;
pub mod lagrange;
mod mechanical;
mod norms;
pub mod quadrature;
mod solve;
mod space;
mod stress;
mod system;
mod thermal;

pub use data::{elasticity_matrix, MechanicalData, ScalarData, Site, ThermalData, VectorData};
pub use element::{physical_gradients, ElementGeometry, ReferenceElement};
pub use mechanical::{assemble_mechanical, external_load, stiffness, thermal_load};
pub use norms::{energy_inner, inner_product_matrix, scalar_error, vector_error, InnerProduct, InnerProductKind};
pub use solve::{solve, solve_split, solve_thermal, Model, SplitDisplacement};
pub use space::{Field, FunctionSpace, Rank};
pub use stress::{constitutive, nodal_stress, quadrature_stress, stress_at, Stress, StressState};
pub use system::LinearSystem;
pub use thermal::assemble_thermal;
