use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BoundaryTag, Mesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Scalar,
    Vector,
}

impl Rank {
    pub fn components(self) -> usize {
        match self {
            Rank::Scalar => 1,
            Rank::Vector => 2,
        }
    }
}

/// Degree-`p` Lagrange space on a mesh; vector dofs are interleaved as `2 node + component`.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionSpace {
    pub rank: Rank,
    pub degree: usize,
    pub n_nodes: usize,
    constrained: Vec<bool>,
    free: Vec<usize>,
}

impl FunctionSpace {
    /// Unconstrained scalar space (temperature).
    pub fn scalar(mesh: &Mesh) -> Self {
        let n = mesh.n_nodes();
        FunctionSpace { rank: Rank::Scalar, degree: mesh.degree, n_nodes: n, constrained: vec![false; n], free: (0..n).collect() }
    }

    /// Displacement space with `u_y = 0` on the bottom and `u_r = 0` on the axis.
    pub fn displacement(mesh: &Mesh) -> Self {
        let n = mesh.n_nodes();
        let mut constrained = vec![false; 2 * n];
        for edge in &mesh.boundary {
            let comp = match edge.tag {
                BoundaryTag::Bottom => 1,
                BoundaryTag::Axis => 0,
                _ => continue,
            };
            for node in mesh.boundary_edge_nodes(edge) {
                constrained[2 * node + comp] = true;
            }
        }
        let free = (0..2 * n).filter(|&d| !constrained[d]).collect();
        FunctionSpace { rank: Rank::Vector, degree: mesh.degree, n_nodes: n, constrained, free }
    }

    pub fn for_rank(mesh: &Mesh, rank: Rank) -> Self {
        match rank {
            Rank::Scalar => Self::scalar(mesh),
            Rank::Vector => Self::displacement(mesh),
        }
    }

    pub fn dim(&self) -> usize {
        self.n_nodes * self.rank.components()
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    pub fn n_constrained(&self) -> usize {
        self.dim() - self.free.len()
    }

    /// Full vector from free-dof values (constrained entries zero).
    pub fn expand(&self, free_values: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        for (&d, &x) in self.free.iter().zip(free_values) {
            v[d] = x;
        }
        v
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&d| full[d]).collect()
    }

    pub fn zero(&self) -> Field {
        Field { rank: self.rank, values: vec![0.0; self.dim()] }
    }

    pub fn check(&self, field: &Field) -> Result<()> {
        if field.rank != self.rank || field.values.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: field.values.len() });
        }
        Ok(())
    }
}

/// Coefficient vector of a temperature or displacement field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub rank: Rank,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(rank: Rank, values: Vec<f64>) -> Self {
        Field { rank, values }
    }

    pub fn scalar(values: Vec<f64>) -> Self {
        Field { rank: Rank::Scalar, values }
    }

    pub fn vector(values: Vec<f64>) -> Self {
        Field { rank: Rank::Vector, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_nodes(&self) -> usize {
        self.values.len() / self.rank.components()
    }

    /// Value of component `comp` at node `n`.
    pub fn at(&self, n: usize, comp: usize) -> f64 {
        self.values[n * self.rank.components() + comp]
    }

    pub fn add(&self, other: &Field) -> Field {
        assert_eq!(self.values.len(), other.values.len());
        Field { rank: self.rank, values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Field) -> Field {
        assert_eq!(self.values.len(), other.values.len());
        Field { rank: self.rank, values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect() }
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field { rank: self.rank, values: self.values.iter().map(|v| s * v).collect() }
    }

    /// Nodal interpolant of a scalar function.
    pub fn interpolate_scalar(mesh: &Mesh, f: impl Fn(crate::geometry::Point) -> f64) -> Field {
        Field::scalar(mesh.nodes.iter().map(|&p| f(p)).collect())
    }

    /// Nodal interpolant of a vector function.
    pub fn interpolate_vector(mesh: &Mesh, f: impl Fn(crate::geometry::Point) -> [f64; 2]) -> Field {
        Field::vector(mesh.nodes.iter().flat_map(|&p| f(p)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MacroDecomposition;

    #[test]
    fn dimensions_and_constraints() {
        let mesh = Mesh::refine(&MacroDecomposition::reference(), 1, 2).unwrap();
        let s = FunctionSpace::scalar(&mesh);
        let v = FunctionSpace::displacement(&mesh);
        assert_eq!(s.dim(), mesh.n_nodes());
        assert_eq!(v.dim(), 2 * mesh.n_nodes());
        for n in 0..mesh.n_nodes() {
            let p = mesh.nodes[n];
            assert_eq!(v.is_constrained(2 * n + 1), p.y.abs() < 1e-12, "node {n} at {p:?}");
            assert_eq!(v.is_constrained(2 * n), p.r.abs() < 1e-12);
        }
        let full = v.expand(&vec![1.0; v.free_dofs().len()]);
        assert_eq!(v.restrict(&full).len(), v.free_dofs().len());
    }
}
