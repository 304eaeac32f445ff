//! Sparse matrices and symmetric positive definite solvers.

mod solver;
mod sparse;

pub use solver::{
    conjugate_gradient, reverse_cuthill_mckee, EnvelopeCholesky, SolverKind, SpdSolver, MAX_DIRECT_ENVELOPE,
};
pub use sparse::{CsrMatrix, TripletBuilder};
