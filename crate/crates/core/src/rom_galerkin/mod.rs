//! POD-Galerkin reduced models: affine expansion of the pulled-back forms,
//! reduction onto POD bases and online solves.

mod affine;
mod model;
mod reduce;

pub use affine::{
    affine_decompose, coefficients, edge_infos, mechanical_matrix, mechanical_rhs, thermal_coupling, thermal_matrix,
    thermal_rhs, AffineForm, AffineTerm, EdgeInfo, GeomFactor, GeometryContext, Metric, ModelForms, Monomial, OpSpec,
    PhysFactor, Weight,
};
pub use model::{
    project_matrix, project_vector, reduce_operators, GalerkinBases, GalerkinRom, GalerkinSolution, OnlineMode,
    ReducedModel,
};
pub use reduce::{HoopTable, ReducedForm, Reducer};
