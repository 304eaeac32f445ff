//! Reference operators integrated directly against a reduced basis.
//!
//! Operators are never formed at full size: every leaf integrand is evaluated
//! at the assembly quadrature points of the reference mesh on the basis
//! functions' features, which gives exactly `Vᵀ A_op V` (or `Vᵀ b_op`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::affine::{coefficients, edge_infos, AffineForm, AffineTerm, GeometryContext, OpSpec, PhysFactor};
use crate::error::{Error, Result};
use crate::fem::{physical_gradients, ElementGeometry, ReferenceElement};
use crate::geometry::{MacroDecomposition, Mesh, PhysicalParams, Point};

/// Reduced operators of one form: `N×N` row-major matrices or `N`-vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedForm {
    pub terms: Vec<AffineTerm>,
    pub ops: Vec<Vec<f64>>,
}

impl ReducedForm {
    /// `Σ θ_q(Ξ) op_q` as a flat vector.
    pub fn evaluate(&self, coefficients: &[f64]) -> Vec<f64> {
        let len = self.ops.first().map_or(0, Vec::len);
        let mut out = vec![0.0; len];
        for (op, &c) in self.ops.iter().zip(coefficients) {
            if c != 0.0 {
                for (o, v) in out.iter_mut().zip(op) {
                    *o += c * v;
                }
            }
        }
        out
    }

    pub fn coefficients(&self, phys: &PhysicalParams, ctx: Option<&GeometryContext>) -> Vec<f64> {
        coefficients(&self.terms, self.ops.len(), phys, ctx)
    }
}

/// Reference quadrature of the hoop term against the basis' radial values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HoopTable {
    pub phys: PhysFactor,
    pub n: usize,
    /// Quadrature points of subdomain `s` are `offsets[s]..offsets[s + 1]`.
    pub offsets: Vec<usize>,
    pub r: Vec<f64>,
    pub y: Vec<f64>,
    pub weights: Vec<f64>,
    /// `u_r` of every mode at every point, point-major.
    pub values: Vec<f64>,
}

impl HoopTable {
    pub fn n_points(&self) -> usize {
        self.weights.len()
    }

    /// `∫ ψ_m,r ψ_n,r det G / r` for the current maps, row-major.
    pub fn matrix(&self, ctx: &GeometryContext) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for sub in 0..self.offsets.len() - 1 {
            let det = ctx.det(sub);
            for q in self.offsets[sub]..self.offsets[sub + 1] {
                let w = self.weights[q] * det / ctx.radius(sub, self.r[q], self.y[q]);
                let v = &self.values[q * n..(q + 1) * n];
                for i in 0..n {
                    let wi = w * v[i];
                    let row = &mut m[i * n..(i + 1) * n];
                    for j in i..n {
                        row[j] += wi * v[j];
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                m[i * n + j] = m[j * n + i];
            }
        }
        m
    }
}

/// Where a leaf integrand lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Location {
    Sub(usize),
    Edge(usize),
    Everywhere,
}

fn location(op: &OpSpec) -> Location {
    match *op {
        OpSpec::Stiffness { sub, .. }
        | OpSpec::Mix { sub, .. }
        | OpSpec::VolumeLoad { sub, .. }
        | OpSpec::CoupleGrad { sub, .. }
        | OpSpec::CoupleHoop { sub } => Location::Sub(sub),
        OpSpec::EdgeMass { edge, .. } | OpSpec::EdgeLoad { edge, .. } | OpSpec::EdgeMonomial { edge, .. } => {
            Location::Edge(edge)
        }
        OpSpec::Hoop => Location::Everywhere,
        OpSpec::Combination(_) => unreachable!("combinations are flattened"),
    }
}

fn is_matrix(op: &OpSpec) -> bool {
    match op {
        OpSpec::Stiffness { .. } | OpSpec::Mix { .. } | OpSpec::EdgeMass { .. } | OpSpec::Hoop => true,
        OpSpec::Combination(parts) => parts.iter().all(|(_, p)| is_matrix(p)),
        _ => false,
    }
}

fn flatten(op: &OpSpec, parent: usize, coef: f64, out: &mut Vec<(usize, f64, OpSpec)>) {
    match op {
        OpSpec::Combination(parts) => {
            for (c, p) in parts {
                flatten(p, parent, coef * c, out);
            }
        }
        leaf => out.push((parent, coef, leaf.clone())),
    }
}

/// Basis functions on the reference mesh, with the element and edge lists per location.
pub struct Reducer<'a> {
    mesh: &'a Mesh,
    refe: ReferenceElement,
    comps: usize,
    modes: &'a [Vec<f64>],
    by_sub: Vec<Vec<usize>>,
    by_edge: Vec<Vec<usize>>,
}

impl<'a> Reducer<'a> {
    pub fn new(decomposition: &MacroDecomposition, mesh: &'a Mesh, comps: usize, modes: &'a [Vec<f64>]) -> Result<Self> {
        let dim = mesh.n_nodes() * comps;
        if modes.is_empty() {
            return Err(Error::InvalidData("cannot reduce onto an empty basis".into()));
        }
        if let Some(bad) = modes.iter().find(|m| m.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
        }
        let mut by_sub = vec![Vec::new(); decomposition.triangles.len()];
        for (e, el) in mesh.elements.iter().enumerate() {
            by_sub[el.subdomain].push(e);
        }
        let infos = edge_infos(decomposition);
        let pos = decomposition.reference_positions();
        let mut by_edge = vec![Vec::new(); infos.len()];
        for (b, edge) in mesh.boundary.iter().enumerate() {
            let sub = mesh.elements[edge.element].subdomain;
            let [p, q] = edge.vertices.map(|v| mesh.vertices[v]);
            let found = decomposition.boundary.iter().enumerate().find(|(i, me)| {
                let (a, c) = (pos[me.vertices[0]], pos[me.vertices[1]]);
                let (dr, dy) = (c.r - a.r, c.y - a.y);
                let tol = 1e-9 * (dr * dr + dy * dy);
                let off = |x: Point| (dr * (x.y - a.y) - dy * (x.r - a.r)).abs();
                infos[*i].sub == sub && infos[*i].tag == edge.tag && off(p) <= tol && off(q) <= tol
            });
            match found {
                Some((i, _)) => by_edge[i].push(b),
                None => {
                    return Err(Error::InvalidData(format!("boundary edge {b} lies on no macro edge of its subdomain")))
                }
            }
        }
        Ok(Reducer { mesh, refe: ReferenceElement::for_assembly(mesh.degree), comps, modes, by_sub, by_edge })
    }

    pub fn n(&self) -> usize {
        self.modes.len()
    }

    fn n_features(&self) -> usize {
        3 * self.comps
    }

    /// Mode coefficients of the local dofs of `e`: `[local dof][mode]`.
    fn gather(&self, e: usize, out: &mut Vec<f64>) {
        let n = self.n();
        out.clear();
        for &node in self.mesh.element_nodes(e) {
            for c in 0..self.comps {
                let dof = node * self.comps + c;
                out.extend(self.modes.iter().map(|m| m[dof]));
            }
        }
        debug_assert_eq!(out.len(), self.mesh.nodes_per_element() * self.comps * n);
    }

    /// Value and reference-gradient features of every mode at one volume point.
    fn features(&self, coef: &[f64], values: &[f64], grads: &[[f64; 2]], out: &mut [f64]) {
        let n = self.n();
        let nf = self.n_features();
        let comps = self.comps;
        out.iter_mut().for_each(|x| *x = 0.0);
        for (a, (&phi, g)) in values.iter().zip(grads).enumerate() {
            for c in 0..comps {
                let row = &coef[(a * comps + c) * n..(a * comps + c + 1) * n];
                for (m, &cf) in row.iter().enumerate() {
                    if cf != 0.0 {
                        let f = &mut out[m * nf..(m + 1) * nf];
                        f[c] += cf * phi;
                        f[comps + 2 * c] += cf * g[0];
                        f[comps + 2 * c + 1] += cf * g[1];
                    }
                }
            }
        }
    }

    /// Visits every volume quadrature point of the elements at `loc`.
    fn for_volume_points(&self, loc: Location, mut visit: impl FnMut(Point, f64, &[f64], &[f64], &[usize])) {
        let all: Vec<usize>;
        let elements: &[usize] = match loc {
            Location::Sub(s) => &self.by_sub[s],
            Location::Everywhere => {
                all = (0..self.mesh.elements.len()).collect();
                &all
            }
            Location::Edge(_) => unreachable!(),
        };
        let n = self.n();
        let mut coef = Vec::new();
        let mut grads = Vec::new();
        let mut feat = vec![0.0; n * self.n_features()];
        for &e in elements {
            self.gather(e, &mut coef);
            let geo = ElementGeometry::of(self.mesh, e);
            let nodes = self.mesh.element_nodes(e);
            for (q, eval) in self.refe.basis.iter().enumerate() {
                let x = geo.point(self.refe.rule.points[q]);
                let w = self.refe.rule.weights[q] * geo.det;
                physical_gradients(&geo, eval, &mut grads);
                self.features(&coef, &eval.values, &grads, &mut feat);
                visit(x, w, &feat, &eval.values, nodes);
            }
        }
    }

    /// Visits every edge quadrature point of a macro edge with the modes' values there.
    fn for_edge_points(&self, edge: usize, mut visit: impl FnMut(Point, f64, &[f64])) {
        let n = self.n();
        let comps = self.comps;
        let mut coef = Vec::new();
        let mut vals = vec![0.0; n * comps];
        for &b in &self.by_edge[edge] {
            let be = &self.mesh.boundary[b];
            self.gather(be.element, &mut coef);
            let geo = ElementGeometry::of(self.mesh, be.element);
            let (len, _) = geo.edge(be.local_edge);
            for (q, &s) in self.refe.edge_points.iter().enumerate() {
                let x = geo.edge_point(be.local_edge, s);
                let w = self.refe.edge_weights[q] * len;
                vals.iter_mut().for_each(|v| *v = 0.0);
                for (a, &phi) in self.refe.edge_basis[be.local_edge][q].iter().enumerate() {
                    for c in 0..comps {
                        let row = &coef[(a * comps + c) * n..(a * comps + c + 1) * n];
                        for (m, &cf) in row.iter().enumerate() {
                            vals[m * comps + c] += cf * phi;
                        }
                    }
                }
                visit(x, w, &vals);
            }
        }
    }

    fn leaf_matrices(&self, loc: Location, leaves: &[&OpSpec]) -> Vec<Vec<f64>> {
        let n = self.n();
        let nf = self.n_features();
        let comps = self.comps;
        let mut out = vec![vec![0.0; n * n]; leaves.len()];
        let sym = |out: &mut Vec<f64>, s: f64, f: &dyn Fn(usize, usize) -> f64| {
            for i in 0..n {
                for j in i..n {
                    out[i * n + j] += s * f(i, j);
                }
            }
        };
        match loc {
            Location::Edge(edge) => self.for_edge_points(edge, |x, w, v| {
                for (leaf, o) in leaves.iter().zip(out.iter_mut()) {
                    let OpSpec::EdgeMass { weight, scale, .. } = **leaf else { unreachable!() };
                    let s = w * scale * weight.at(x.r, x.y);
                    sym(o, s, &|i, j| (0..comps).map(|c| v[i * comps + c] * v[j * comps + c]).sum());
                }
            }),
            _ => self.for_volume_points(loc, |x, w, f, _, _| {
                let g = |m: usize, k: usize| f[m * nf + comps + k];
                let v = |m: usize| f[m * nf];
                for (leaf, o) in leaves.iter().zip(out.iter_mut()) {
                    match **leaf {
                        OpSpec::Stiffness { weight, k, l, .. } => {
                            let s = w * weight.at(x.r, x.y);
                            if k == l {
                                sym(o, s, &|i, j| g(i, k) * g(j, k));
                            } else {
                                sym(o, s, &|i, j| g(i, k) * g(j, l) + g(i, l) * g(j, k));
                            }
                        }
                        OpSpec::Mix { k, .. } => sym(o, w, &|i, j| g(i, k) * v(j) + v(i) * g(j, k)),
                        OpSpec::Hoop => sym(o, w / x.r, &|i, j| v(i) * v(j)),
                        _ => unreachable!(),
                    }
                }
            }),
        }
        for o in &mut out {
            for i in 0..n {
                for j in 0..i {
                    o[i * n + j] = o[j * n + i];
                }
            }
        }
        out
    }

    fn leaf_vectors(&self, loc: Location, leaves: &[&OpSpec], source: Option<&[f64]>) -> Vec<Vec<f64>> {
        let n = self.n();
        let nf = self.n_features();
        let comps = self.comps;
        let mut out = vec![vec![0.0; n]; leaves.len()];
        match loc {
            Location::Edge(edge) => self.for_edge_points(edge, |x, w, v| {
                for (leaf, o) in leaves.iter().zip(out.iter_mut()) {
                    match **leaf {
                        OpSpec::EdgeLoad { weight, value, .. } => {
                            let s = w * weight.at(x.r, x.y);
                            for (m, om) in o.iter_mut().enumerate() {
                                *om += s * (0..comps).map(|c| value[c] * v[m * comps + c]).sum::<f64>();
                            }
                        }
                        OpSpec::EdgeMonomial { comp, monomial, scale, .. } => {
                            let s = w * scale * monomial.at(x.r, x.y);
                            for (m, om) in o.iter_mut().enumerate() {
                                *om += s * v[m * comps + comp];
                            }
                        }
                        _ => unreachable!(),
                    }
                }
            }),
            _ => self.for_volume_points(loc, |x, w, f, phi, nodes| {
                let t = source.map(|src| phi.iter().zip(nodes).map(|(p, &nd)| p * src[nd]).sum::<f64>());
                for (leaf, o) in leaves.iter().zip(out.iter_mut()) {
                    match **leaf {
                        OpSpec::VolumeLoad { weight, value, .. } => {
                            let s = w * weight.at(x.r, x.y);
                            for (m, om) in o.iter_mut().enumerate() {
                                *om += s * (0..comps).map(|c| value[c] * f[m * nf + c]).sum::<f64>();
                            }
                        }
                        OpSpec::CoupleGrad { weight, k, .. } => {
                            let s = w * weight.at(x.r, x.y) * t.expect("coupling needs a source field");
                            for (m, om) in o.iter_mut().enumerate() {
                                *om += s * f[m * nf + comps + k];
                            }
                        }
                        OpSpec::CoupleHoop { .. } => {
                            let s = w * t.expect("coupling needs a source field");
                            for (m, om) in o.iter_mut().enumerate() {
                                *om += s * f[m * nf];
                            }
                        }
                        _ => unreachable!(),
                    }
                }
            }),
        }
        out
    }

    /// Reduced operators of `form`, in the order of `form.ops`.
    ///
    /// `source` is the scalar field (nodal values on the same mesh) that coupling operators integrate against.
    pub fn reduce(&self, form: &AffineForm, source: Option<&[f64]>) -> Result<ReducedForm> {
        if let Some(src) = source {
            if src.len() != self.mesh.n_nodes() {
                return Err(Error::DimensionMismatch { expected: self.mesh.n_nodes(), found: src.len() });
            }
        }
        let mut leaves = Vec::new();
        for (i, op) in form.ops.iter().enumerate() {
            flatten(op, i, 1.0, &mut leaves);
        }
        let matrix = form.ops.first().is_some_and(is_matrix);
        if leaves.iter().any(|(_, _, l)| is_matrix(l) != matrix) {
            return Err(Error::InvalidData("form mixes matrix and vector operators".into()));
        }
        let mut groups: Vec<(Location, Vec<usize>)> = Vec::new();
        for (i, (_, _, leaf)) in leaves.iter().enumerate() {
            let loc = location(leaf);
            match groups.iter_mut().find(|g| g.0 == loc) {
                Some(g) => g.1.push(i),
                None => groups.push((loc, vec![i])),
            }
        }
        groups.sort_by_key(|g| g.0);
        let results: Vec<Vec<Vec<f64>>> = groups
            .par_iter()
            .map(|(loc, idx)| {
                let ops: Vec<&OpSpec> = idx.iter().map(|&i| &leaves[i].2).collect();
                if matrix {
                    self.leaf_matrices(*loc, &ops)
                } else {
                    self.leaf_vectors(*loc, &ops, source)
                }
            })
            .collect();
        let len = if matrix { self.n() * self.n() } else { self.n() };
        let mut ops = vec![vec![0.0; len]; form.ops.len()];
        for ((_, idx), res) in groups.iter().zip(results) {
            for (&i, r) in idx.iter().zip(res) {
                let (parent, coef, _) = &leaves[i];
                for (o, v) in ops[*parent].iter_mut().zip(r) {
                    *o += coef * v;
                }
            }
        }
        Ok(ReducedForm { terms: form.terms.clone(), ops })
    }

    /// Hoop quadrature table of the basis (displacement bases only).
    pub fn hoop_table(&self, phys: PhysFactor) -> Result<HoopTable> {
        if self.comps != 2 {
            return Err(Error::InvalidData("the hoop term needs a displacement basis".into()));
        }
        let n = self.n();
        let nf = self.n_features();
        let mut t = HoopTable {
            phys,
            n,
            offsets: vec![0],
            r: Vec::new(),
            y: Vec::new(),
            weights: Vec::new(),
            values: Vec::new(),
        };
        for sub in 0..self.by_sub.len() {
            self.for_volume_points(Location::Sub(sub), |x, w, f, _, _| {
                t.r.push(x.r);
                t.y.push(x.y);
                t.weights.push(w);
                t.values.extend((0..n).map(|m| f[m * nf]));
            });
            t.offsets.push(t.weights.len());
        }
        Ok(t)
    }
}
