//! Tabulated reference basis and per-element affine geometry.

use super::lagrange::{self, BasisEval};
use super::quadrature::{line_rule, triangle_rule, TriangleRule};
use crate::geometry::{Mesh, Point};

/// Basis values tabulated at the volume and edge quadrature points of one rule.
#[derive(Clone, Debug)]
pub struct ReferenceElement {
    pub degree: usize,
    pub rule: TriangleRule,
    pub basis: Vec<BasisEval>,
    /// Edge rule on `[0, 1]`, running from local vertex `e` to `e + 1`.
    pub edge_points: Vec<f64>,
    pub edge_weights: Vec<f64>,
    /// Per local edge, per edge point, all element basis values.
    pub edge_basis: [Vec<Vec<f64>>; 3],
}

impl ReferenceElement {
    /// Volume and edge rules exact to `quad_degree`.
    pub fn new(degree: usize, quad_degree: usize) -> Self {
        let rule = triangle_rule(quad_degree);
        let basis = rule.points.iter().map(|&l| lagrange::evaluate(degree, l)).collect();
        let (edge_points, edge_weights) = line_rule(quad_degree);
        let edge_basis = std::array::from_fn(|e| {
            edge_points
                .iter()
                .map(|&s| {
                    let mut l = [0.0; 3];
                    l[e] = 1.0 - s;
                    l[(e + 1) % 3] = s;
                    lagrange::evaluate(degree, l).values
                })
                .collect()
        });
        ReferenceElement { degree, rule, basis, edge_points, edge_weights, edge_basis }
    }

    /// Rule used for assembly: integrands of degree `2p + 1` carry one extra power for `r`.
    pub fn for_assembly(degree: usize) -> Self {
        Self::new(degree, 2 * degree + 2)
    }

    pub fn n_local(&self) -> usize {
        lagrange::n_local(self.degree)
    }
}

/// Affine element map `x = a + J (ξ, η)`.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry {
    pub vertices: [Point; 3],
    pub det: f64,
    inv: [[f64; 2]; 2],
}

impl ElementGeometry {
    pub fn new(vertices: [Point; 3]) -> Self {
        let [a, b, c] = vertices;
        let j = [[b.r - a.r, c.r - a.r], [b.y - a.y, c.y - a.y]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inv = [[j[1][1] / det, -j[0][1] / det], [-j[1][0] / det, j[0][0] / det]];
        ElementGeometry { vertices, det, inv }
    }

    pub fn of(mesh: &Mesh, e: usize) -> Self {
        Self::new(mesh.element_points(e))
    }

    pub fn point(&self, l: [f64; 3]) -> Point {
        let [a, b, c] = self.vertices;
        Point::new(l[0] * a.r + l[1] * b.r + l[2] * c.r, l[0] * a.y + l[1] * b.y + l[2] * c.y)
    }

    /// Physical gradient `(∂r, ∂y)` from a reference gradient `(∂ξ, ∂η)`.
    pub fn gradient(&self, g: [f64; 2]) -> [f64; 2] {
        [self.inv[0][0] * g[0] + self.inv[1][0] * g[1], self.inv[0][1] * g[0] + self.inv[1][1] * g[1]]
    }

    /// Length and outward unit normal of local edge `e` (counter-clockwise element).
    pub fn edge(&self, e: usize) -> (f64, [f64; 2]) {
        let a = self.vertices[e];
        let b = self.vertices[(e + 1) % 3];
        let (dr, dy) = (b.r - a.r, b.y - a.y);
        let len = dr.hypot(dy);
        (len, [dy / len, -dr / len])
    }

    pub fn edge_point(&self, e: usize, s: f64) -> Point {
        let a = self.vertices[e];
        let b = self.vertices[(e + 1) % 3];
        Point::new(a.r + s * (b.r - a.r), a.y + s * (b.y - a.y))
    }
}

/// Physical gradients of every local basis function at one quadrature point.
pub fn physical_gradients(geo: &ElementGeometry, eval: &BasisEval, out: &mut Vec<[f64; 2]>) {
    out.clear();
    out.extend(eval.grads.iter().map(|&g| geo.gradient(g)));
}
