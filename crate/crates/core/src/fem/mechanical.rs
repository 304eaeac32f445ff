//! Axisymmetric linear thermo-elasticity.

use super::data::{MechanicalData, Site, VectorData};
use super::element::{physical_gradients, ElementGeometry, ReferenceElement};
use super::space::{Field, FunctionSpace, Rank};
use super::system::{Assembler, LinearSystem};
use super::thermal::mirror;
use crate::error::{Error, Result};
use crate::geometry::{Mesh, Point};
use crate::linalg::CsrMatrix;

/// Strain rows `(ε_rr, ε_yy, ε_θθ, γ_ry)` of local dof `2a + c`.
#[inline]
pub(crate) fn strain_row(value: f64, grad: [f64; 2], r: f64, comp: usize) -> [f64; 4] {
    if comp == 0 {
        [grad[0], 0.0, value / r, grad[1]]
    } else {
        [0.0, grad[1], 0.0, grad[0]]
    }
}

/// `∫ A ε(u)·ε(φ) r` over all dofs, before constraint elimination.
pub fn stiffness(mesh: &Mesh, mu: f64, lambda: f64) -> Result<CsrMatrix> {
    let asm = Assembler::new(mesh, 2);
    let refe = &asm.refe;
    let nl = refe.n_local();
    let k = 2 * nl;
    asm.matrix(|e, m| {
        let geo = ElementGeometry::of(mesh, e);
        let mut grads = Vec::with_capacity(nl);
        let mut rows = vec![[0.0; 4]; k];
        for (q, eval) in refe.basis.iter().enumerate() {
            let x = geo.point(refe.rule.points[q]);
            let w = refe.rule.weights[q] * geo.det * x.r;
            physical_gradients(&geo, eval, &mut grads);
            for a in 0..nl {
                for c in 0..2 {
                    rows[2 * a + c] = strain_row(eval.values[a], grads[a], x.r, c);
                }
            }
            for i in 0..k {
                let bi = rows[i];
                let tri = bi[0] + bi[1] + bi[2];
                for j in i..k {
                    let bj = rows[j];
                    let trj = bj[0] + bj[1] + bj[2];
                    let v = lambda * tri * trj
                        + 2.0 * mu * (bi[0] * bj[0] + bi[1] * bj[1] + bi[2] * bj[2])
                        + mu * bi[3] * bj[3];
                    m[i * k + j] += w * v;
                }
            }
        }
        mirror(m, k);
        Ok(())
    })
}

/// Body force and boundary tractions: `∫ f·φ r + Σ ∫ g·φ r`.
pub fn external_load(mesh: &Mesh, data: &MechanicalData) -> Result<Vec<f64>> {
    let asm = Assembler::new(mesh, 2);
    let refe = &asm.refe;
    let nl = refe.n_local();
    let mut rhs = if data.body_force.is_zero() {
        vec![0.0; asm.dim()]
    } else {
        asm.vector(|e, v| {
            let geo = ElementGeometry::of(mesh, e);
            for (q, eval) in refe.basis.iter().enumerate() {
                let x = geo.point(refe.rule.points[q]);
                let w = refe.rule.weights[q] * geo.det * x.r;
                let f = data.body_force.eval(&Site::interior(x));
                for a in 0..nl {
                    v[2 * a] += w * f[0] * eval.values[a];
                    v[2 * a + 1] += w * f[1] * eval.values[a];
                }
            }
            Ok(())
        })?
    };
    for edge in &mesh.boundary {
        let Some(g) = data.traction(edge.tag) else { continue };
        if g.is_zero() {
            continue;
        }
        traction_edge(mesh, refe, edge.element, edge.local_edge, g, &mut rhs);
    }
    Ok(rhs)
}

fn traction_edge(mesh: &Mesh, refe: &ReferenceElement, e: usize, local_edge: usize, g: &VectorData, rhs: &mut [f64]) {
    let geo = ElementGeometry::of(mesh, e);
    let nodes = mesh.element_nodes(e);
    let (len, normal) = geo.edge(local_edge);
    for (q, &s) in refe.edge_points.iter().enumerate() {
        let site = Site { point: geo.edge_point(local_edge, s), normal: Some(normal) };
        let w = refe.edge_weights[q] * len * site.point.r;
        let t = g.eval(&site);
        for (a, phi) in refe.edge_basis[local_edge][q].iter().enumerate() {
            rhs[2 * nodes[a]] += w * t[0] * phi;
            rhs[2 * nodes[a] + 1] += w * t[1] * phi;
        }
    }
}

/// Thermal stress load `∫ (2μ+3λ)α (T - T0) tr ε(φ) r`.
pub fn thermal_load(mesh: &Mesh, data: &MechanicalData, temperature: &Field) -> Result<Vec<f64>> {
    if temperature.rank != Rank::Scalar || temperature.len() != mesh.n_nodes() {
        return Err(Error::DimensionMismatch { expected: mesh.n_nodes(), found: temperature.len() });
    }
    let asm = Assembler::new(mesh, 2);
    let refe = &asm.refe;
    let nl = refe.n_local();
    let c = data.thermal_modulus();
    asm.vector(|e, v| {
        let geo = ElementGeometry::of(mesh, e);
        let nodes = mesh.element_nodes(e);
        let mut grads = Vec::with_capacity(nl);
        for (q, eval) in refe.basis.iter().enumerate() {
            let x = geo.point(refe.rule.points[q]);
            let t: f64 = (0..nl).map(|a| eval.values[a] * temperature.values[nodes[a]]).sum();
            let w = refe.rule.weights[q] * geo.det * x.r * c * (t - data.t_ref);
            physical_gradients(&geo, eval, &mut grads);
            for a in 0..nl {
                v[2 * a] += w * (grads[a][0] + eval.values[a] / x.r);
                v[2 * a + 1] += w * grads[a][1];
            }
        }
        Ok(())
    })
}

/// Full mechanical system; without a temperature the thermal load vanishes (`T = T0`).
pub fn assemble_mechanical(mesh: &Mesh, data: &MechanicalData, temperature: Option<&Field>) -> Result<LinearSystem> {
    data.validate()?;
    let matrix = stiffness(mesh, data.mu, data.lambda)?;
    let mut rhs = external_load(mesh, data)?;
    if let Some(t) = temperature {
        for (r, l) in rhs.iter_mut().zip(thermal_load(mesh, data, t)?) {
            *r += l;
        }
    }
    Ok(LinearSystem { matrix, rhs, space: FunctionSpace::displacement(mesh) })
}

/// Displacement gradient at a point inside element `e`: `[∂r u_r, ∂y u_r, ∂r u_y, ∂y u_y]` and `u`.
pub(crate) fn displacement_jet(mesh: &Mesh, u: &Field, e: usize, l: [f64; 3]) -> ([f64; 2], [f64; 4], Point) {
    let geo = ElementGeometry::of(mesh, e);
    let eval = super::lagrange::evaluate(mesh.degree, l);
    let nodes = mesh.element_nodes(e);
    let mut val = [0.0; 2];
    let mut grad = [0.0; 4];
    for (a, &n) in nodes.iter().enumerate() {
        let g = geo.gradient(eval.grads[a]);
        for c in 0..2 {
            let x = u.values[2 * n + c];
            val[c] += x * eval.values[a];
            grad[2 * c] += x * g[0];
            grad[2 * c + 1] += x * g[1];
        }
    }
    (val, grad, geo.point(l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MacroDecomposition;
    use crate::linalg::SolverKind;

    pub(crate) fn unloaded() -> MechanicalData {
        MechanicalData {
            mu: 2.08e9,
            lambda: 1.39e9,
            alpha: 1e-6,
            t_ref: 313.0,
            body_force: VectorData::ZERO,
            traction_top: VectorData::ZERO,
            traction_bottom: VectorData::ZERO,
            traction_fluid: VectorData::ZERO,
            traction_outer: VectorData::ZERO,
        }
    }

    #[test]
    fn zero_load_gives_zero_displacement() {
        let mesh = Mesh::refine(&MacroDecomposition::reference(), 1, 2).unwrap();
        let data = unloaded();
        let t = Field::scalar(vec![313.0; mesh.n_nodes()]);
        let sys = assemble_mechanical(&mesh, &data, None).unwrap();
        assert_eq!(sys.matrix.max_asymmetry(), 0.0);
        let u = sys.solve(SolverKind::Direct).unwrap();
        assert!(u.values.iter().all(|&v| v == 0.0));
        // T = T0 only up to the rounding of the interpolated temperature.
        let u = assemble_mechanical(&mesh, &data, Some(&t)).unwrap().solve(SolverKind::Direct).unwrap();
        assert!(u.values.iter().all(|&v| v.abs() < 1e-15));
    }

    #[test]
    fn uniform_heating_expands_the_body() {
        let mesh = Mesh::refine(&MacroDecomposition::reference(), 1, 1).unwrap();
        let data = unloaded();
        let t = Field::scalar(vec![413.0; mesh.n_nodes()]);
        let u = assemble_mechanical(&mesh, &data, Some(&t)).unwrap().solve(SolverKind::Direct).unwrap();
        // Free thermal expansion: u = α ΔT x, exact in the linear space.
        for (n, p) in mesh.nodes.iter().enumerate() {
            assert!((u.at(n, 0) - 1e-4 * p.r).abs() < 1e-12, "node {n}");
            assert!((u.at(n, 1) - 1e-4 * p.y).abs() < 1e-12, "node {n}");
        }
    }
}
