//! Radially weighted inner products, as assembled matrices and as exact-error integrals.

use serde::{Deserialize, Serialize};

use super::element::{physical_gradients, ElementGeometry, ReferenceElement};
use super::space::{Field, Rank};
use super::system::Assembler;
use super::thermal::mirror;
use crate::error::{Error, Result};
use crate::geometry::{Mesh, Point};
use crate::linalg::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InnerProductKind {
    /// `∫ (u v + ∇u·∇v) r`, componentwise for vectors.
    H1r,
    /// `∫ u v r`, componentwise for vectors.
    L2r,
    /// Displacement product with the hoop and shear cross terms.
    Unorm,
}

impl InnerProductKind {
    pub fn default_for(rank: Rank) -> Self {
        match rank {
            Rank::Scalar => InnerProductKind::H1r,
            Rank::Vector => InnerProductKind::Unorm,
        }
    }
}

/// Pointwise integrand (without `r`) of the product of two jets.
/// Scalar jets are `(value, [∂r, ∂y])`; vector jets are `([u_r, u_y], [∂r u_r, ∂y u_r, ∂r u_y, ∂y u_y])`.
fn vector_density(kind: InnerProductKind, r: f64, u: [f64; 2], gu: [f64; 4], v: [f64; 2], gv: [f64; 4]) -> f64 {
    let l2 = u[0] * v[0] + u[1] * v[1];
    let grad = gu[0] * gv[0] + gu[1] * gv[1] + gu[2] * gv[2] + gu[3] * gv[3];
    match kind {
        InnerProductKind::L2r => l2,
        InnerProductKind::H1r => l2 + grad,
        InnerProductKind::Unorm => l2 + grad + u[0] * v[0] / (r * r) + gu[1] * gv[2] + gu[2] * gv[1],
    }
}

fn scalar_density(kind: InnerProductKind, u: f64, gu: [f64; 2], v: f64, gv: [f64; 2]) -> Result<f64> {
    match kind {
        InnerProductKind::L2r => Ok(u * v),
        InnerProductKind::H1r => Ok(u * v + gu[0] * gv[0] + gu[1] * gv[1]),
        InnerProductKind::Unorm => Err(Error::InvalidData("the displacement product needs a vector field".into())),
    }
}

/// Gram matrix of the nodal basis in the given product.
pub fn inner_product_matrix(mesh: &Mesh, rank: Rank, kind: InnerProductKind) -> Result<CsrMatrix> {
    if rank == Rank::Scalar {
        scalar_density(kind, 0.0, [0.0; 2], 0.0, [0.0; 2])?;
    }
    let c = rank.components();
    let asm = Assembler::new(mesh, c);
    let refe = &asm.refe;
    let nl = refe.n_local();
    let k = nl * c;
    asm.matrix(|e, m| {
        let geo = ElementGeometry::of(mesh, e);
        let mut grads = Vec::with_capacity(nl);
        for (q, eval) in refe.basis.iter().enumerate() {
            let x = geo.point(refe.rule.points[q]);
            let w = refe.rule.weights[q] * geo.det * x.r;
            physical_gradients(&geo, eval, &mut grads);
            for i in 0..k {
                for j in i..k {
                    let v = if c == 1 {
                        scalar_density(kind, eval.values[i], grads[i], eval.values[j], grads[j])?
                    } else {
                        let (a, ca) = (i / 2, i % 2);
                        let (b, cb) = (j / 2, j % 2);
                        let (u, gu) = unit_jet(eval.values[a], grads[a], ca);
                        let (v, gv) = unit_jet(eval.values[b], grads[b], cb);
                        vector_density(kind, x.r, u, gu, v, gv)
                    };
                    m[i * k + j] += w * v;
                }
            }
        }
        mirror(m, k);
        Ok(())
    })
}

fn unit_jet(value: f64, grad: [f64; 2], comp: usize) -> ([f64; 2], [f64; 4]) {
    let mut u = [0.0; 2];
    let mut g = [0.0; 4];
    u[comp] = value;
    g[2 * comp] = grad[0];
    g[2 * comp + 1] = grad[1];
    (u, g)
}

/// An assembled inner product.
#[derive(Clone, Debug)]
pub struct InnerProduct {
    pub kind: InnerProductKind,
    pub rank: Rank,
    pub matrix: CsrMatrix,
}

impl InnerProduct {
    pub fn new(mesh: &Mesh, rank: Rank, kind: InnerProductKind) -> Result<Self> {
        Ok(InnerProduct { kind, rank, matrix: inner_product_matrix(mesh, rank, kind)? })
    }

    fn check(&self, f: &Field) -> Result<()> {
        if f.rank != self.rank || f.len() != self.matrix.nrows() {
            return Err(Error::DimensionMismatch { expected: self.matrix.nrows(), found: f.len() });
        }
        Ok(())
    }

    pub fn inner(&self, f: &Field, g: &Field) -> Result<f64> {
        self.check(f)?;
        self.check(g)?;
        Ok(self.matrix.bilinear(&f.values, &g.values))
    }

    pub fn norm(&self, f: &Field) -> Result<f64> {
        Ok(self.inner(f, f)?.max(0.0).sqrt())
    }

    pub fn inner_raw(&self, f: &[f64], g: &[f64]) -> f64 {
        self.matrix.bilinear(f, g)
    }
}

/// `xᵀ A y` for an assembled operator (energy products).
pub fn energy_inner(operator: &CsrMatrix, f: &Field, g: &Field) -> Result<f64> {
    if f.len() != operator.nrows() || g.len() != operator.nrows() {
        return Err(Error::DimensionMismatch { expected: operator.nrows(), found: f.len().min(g.len()) });
    }
    Ok(operator.bilinear(&f.values, &g.values))
}

/// Norms of `u_h - u_exact` and of `u_exact`, by quadrature against an analytic scalar field.
pub fn scalar_error(
    mesh: &Mesh,
    field: &Field,
    kind: InnerProductKind,
    exact: impl Fn(Point) -> (f64, [f64; 2]),
) -> Result<(f64, f64)> {
    if field.rank != Rank::Scalar || field.len() != mesh.n_nodes() {
        return Err(Error::DimensionMismatch { expected: mesh.n_nodes(), found: field.len() });
    }
    let refe = ReferenceElement::new(mesh.degree, 2 * mesh.degree + 6);
    let (mut err, mut sol) = (0.0, 0.0);
    let mut grads = Vec::new();
    for e in 0..mesh.elements.len() {
        let geo = ElementGeometry::of(mesh, e);
        let nodes = mesh.element_nodes(e);
        for (q, eval) in refe.basis.iter().enumerate() {
            let x = geo.point(refe.rule.points[q]);
            let w = refe.rule.weights[q] * geo.det * x.r;
            physical_gradients(&geo, eval, &mut grads);
            let (mut v, mut g) = (0.0, [0.0; 2]);
            for (a, &n) in nodes.iter().enumerate() {
                v += field.values[n] * eval.values[a];
                g[0] += field.values[n] * grads[a][0];
                g[1] += field.values[n] * grads[a][1];
            }
            let (ve, ge) = exact(x);
            let (dv, dg) = (v - ve, [g[0] - ge[0], g[1] - ge[1]]);
            err += w * scalar_density(kind, dv, dg, dv, dg)?;
            sol += w * scalar_density(kind, ve, ge, ve, ge)?;
        }
    }
    Ok((err.max(0.0).sqrt(), sol.max(0.0).sqrt()))
}

/// Vector counterpart of [`scalar_error`]; `exact` returns the value and `[∂r u_r, ∂y u_r, ∂r u_y, ∂y u_y]`.
pub fn vector_error(
    mesh: &Mesh,
    field: &Field,
    kind: InnerProductKind,
    exact: impl Fn(Point) -> ([f64; 2], [f64; 4]),
) -> Result<(f64, f64)> {
    if field.rank != Rank::Vector || field.len() != 2 * mesh.n_nodes() {
        return Err(Error::DimensionMismatch { expected: 2 * mesh.n_nodes(), found: field.len() });
    }
    let refe = ReferenceElement::new(mesh.degree, 2 * mesh.degree + 6);
    let (mut err, mut sol) = (0.0, 0.0);
    let mut grads = Vec::new();
    for e in 0..mesh.elements.len() {
        let geo = ElementGeometry::of(mesh, e);
        let nodes = mesh.element_nodes(e);
        for (q, eval) in refe.basis.iter().enumerate() {
            let x = geo.point(refe.rule.points[q]);
            let w = refe.rule.weights[q] * geo.det * x.r;
            physical_gradients(&geo, eval, &mut grads);
            let (mut v, mut g) = ([0.0; 2], [0.0; 4]);
            for (a, &n) in nodes.iter().enumerate() {
                for c in 0..2 {
                    let x = field.values[2 * n + c];
                    v[c] += x * eval.values[a];
                    g[2 * c] += x * grads[a][0];
                    g[2 * c + 1] += x * grads[a][1];
                }
            }
            let (ve, ge) = exact(x);
            let dv = [v[0] - ve[0], v[1] - ve[1]];
            let dg: [f64; 4] = std::array::from_fn(|i| g[i] - ge[i]);
            err += w * vector_density(kind, x.r, dv, dg, dv, dg);
            sol += w * vector_density(kind, x.r, ve, ge, ve, ge);
        }
    }
    Ok((err.max(0.0).sqrt(), sol.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MacroDecomposition;

    #[test]
    fn weighted_area_matches_closed_form() {
        let macro_mesh = MacroDecomposition::reference();
        let mesh = Mesh::refine(&macro_mesh, 1, 2).unwrap();
        let ip = InnerProduct::new(&mesh, Rank::Scalar, InnerProductKind::L2r).unwrap();
        let one = Field::scalar(vec![1.0; mesh.n_nodes()]);
        // ∫ r over a triangle = area · mean of vertex radii
        let pts = macro_mesh.reference_positions();
        let exact: f64 = (0..macro_mesh.triangles.len())
            .map(|t| {
                let [a, b, c] = macro_mesh.triangle_points(&pts, t);
                crate::geometry::signed_area(a, b, c) * (a.r + b.r + c.r) / 3.0
            })
            .sum();
        let q = ip.inner(&one, &one).unwrap();
        assert!((q - exact).abs() < 1e-12 * exact, "{q} vs {exact}");
    }

    #[test]
    fn unorm_is_symmetric_and_semidefinite() {
        let mesh = Mesh::refine(&MacroDecomposition::reference(), 0, 2).unwrap();
        let ip = InnerProduct::new(&mesh, Rank::Vector, InnerProductKind::Unorm).unwrap();
        assert_eq!(ip.matrix.max_asymmetry(), 0.0);
        let eig = ip.matrix.to_dense().symmetric_eigenvalues();
        assert!(eig.min() > 0.0);
    }

    #[test]
    fn interpolated_error_of_exact_polynomial_vanishes() {
        let mesh = Mesh::refine(&MacroDecomposition::reference(), 0, 3).unwrap();
        let f = Field::interpolate_scalar(&mesh, |p| p.r * p.r * p.y);
        let (err, norm) =
            scalar_error(&mesh, &f, InnerProductKind::H1r, |p| (p.r * p.r * p.y, [2.0 * p.r * p.y, p.r * p.r])).unwrap();
        assert!(err < 1e-10 * norm);
    }
}
