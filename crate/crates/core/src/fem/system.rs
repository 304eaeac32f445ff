use rayon::prelude::*;

use super::element::ReferenceElement;
use super::space::{Field, FunctionSpace};
use crate::error::Result;
use crate::geometry::Mesh;
use crate::linalg::{CsrMatrix, SolverKind, SpdSolver, TripletBuilder};

/// Assembled matrix and right-hand side over the full dof set, with the space's constraints.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub space: FunctionSpace,
}

impl LinearSystem {
    /// Matrix and rhs restricted to free dofs (homogeneous constraints).
    pub fn eliminated(&self) -> (CsrMatrix, Vec<f64>) {
        (self.matrix.restrict(self.space.free_dofs()), self.space.restrict(&self.rhs))
    }

    pub fn solve(&self, kind: SolverKind) -> Result<Field> {
        let (a, b) = self.eliminated();
        let x = SpdSolver::new(&a, kind)?.solve(&b)?;
        Ok(Field::new(self.space.rank, self.space.expand(&x)))
    }

    /// `‖A x - b‖ / ‖b‖` over the free dofs.
    pub fn relative_residual(&self, x: &Field) -> f64 {
        let ax = self.matrix.mul_vec(&x.values);
        let free = self.space.free_dofs();
        let num: f64 = free.iter().map(|&d| (ax[d] - self.rhs[d]).powi(2)).sum();
        let den: f64 = free.iter().map(|&d| self.rhs[d].powi(2)).sum();
        (num / den.max(f64::MIN_POSITIVE)).sqrt()
    }
}

/// Element-loop driver with a deterministic reduction order.
pub(crate) struct Assembler<'a> {
    pub mesh: &'a Mesh,
    pub refe: ReferenceElement,
    pub components: usize,
}

impl<'a> Assembler<'a> {
    pub fn new(mesh: &'a Mesh, components: usize) -> Self {
        Assembler { mesh, refe: ReferenceElement::for_assembly(mesh.degree), components }
    }

    pub fn dim(&self) -> usize {
        self.mesh.n_nodes() * self.components
    }

    /// Global dof of local dof `i` (`component-fastest` within a node) of element `e`.
    pub fn dof(&self, e: usize, i: usize) -> usize {
        let c = self.components;
        self.mesh.element_nodes(e)[i / c] * c + i % c
    }

    /// Sums element matrices computed in parallel; `kernel` fills a row-major `k x k` block.
    pub fn matrix<F>(&self, kernel: F) -> Result<CsrMatrix>
    where
        F: Fn(usize, &mut [f64]) -> Result<()> + Sync,
    {
        let k = self.refe.n_local() * self.components;
        let blocks: Vec<Vec<f64>> = (0..self.mesh.elements.len())
            .into_par_iter()
            .map(|e| {
                let mut m = vec![0.0; k * k];
                kernel(e, &mut m).map(|_| m)
            })
            .collect::<Result<_>>()?;
        let mut b = TripletBuilder::with_capacity(self.dim(), self.dim(), blocks.len() * k * k);
        for (e, m) in blocks.iter().enumerate() {
            for i in 0..k {
                let gi = self.dof(e, i);
                for j in 0..k {
                    if m[i * k + j] != 0.0 {
                        b.push(gi, self.dof(e, j), m[i * k + j]);
                    }
                }
            }
        }
        Ok(b.build())
    }

    /// Sums element vectors computed in parallel.
    pub fn vector<F>(&self, kernel: F) -> Result<Vec<f64>>
    where
        F: Fn(usize, &mut [f64]) -> Result<()> + Sync,
    {
        let k = self.refe.n_local() * self.components;
        let blocks: Vec<Vec<f64>> = (0..self.mesh.elements.len())
            .into_par_iter()
            .map(|e| {
                let mut v = vec![0.0; k];
                kernel(e, &mut v).map(|_| v)
            })
            .collect::<Result<_>>()?;
        let mut out = vec![0.0; self.dim()];
        for (e, v) in blocks.iter().enumerate() {
            for (i, x) in v.iter().enumerate() {
                out[self.dof(e, i)] += x;
            }
        }
        Ok(out)
    }
}
