//! Stress recovery from displacement and temperature fields.

use serde::{Deserialize, Serialize};

use super::data::MechanicalData;
use super::element::ReferenceElement;
use super::lagrange;
use super::mechanical::displacement_jet;
use super::space::{Field, Rank};
use crate::error::{Error, Result};
use crate::geometry::{Mesh, Point};

/// Stress components `(σ_rr, σ_yy, σ_θθ, σ_ry)` in Pa.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Stress(pub [f64; 4]);

impl Stress {
    pub fn mean(&self) -> f64 {
        (self.0[0] + self.0[1] + self.0[2]) / 3.0
    }

    pub fn deviatoric(&self) -> Stress {
        let m = self.mean();
        Stress([self.0[0] - m, self.0[1] - m, self.0[2] - m, self.0[3]])
    }

    pub fn von_mises(&self) -> f64 {
        let d = self.deviatoric().0;
        let contraction = d[0] * d[0] + d[1] * d[1] + d[2] * d[2] + 2.0 * d[3] * d[3];
        (1.5 * contraction).max(0.0).sqrt()
    }
}

/// Stresses at a list of evaluation points.
#[derive(Clone, Debug, Default)]
pub struct StressState {
    pub points: Vec<Point>,
    pub stress: Vec<Stress>,
}

impl StressState {
    pub fn von_mises(&self) -> Vec<f64> {
        self.stress.iter().map(Stress::von_mises).collect()
    }

    pub fn mean(&self) -> Vec<f64> {
        self.stress.iter().map(Stress::mean).collect()
    }

    pub fn len(&self) -> usize {
        self.stress.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stress.is_empty()
    }
}

/// `σ = A ε(u) - (2μ+3λ)α (T - T0) I` from the strain `(ε_rr, ε_yy, ε_θθ, γ_ry)`.
pub fn constitutive(data: &MechanicalData, strain: [f64; 4], temperature: Option<f64>) -> Stress {
    let a = data.elasticity();
    let mut s = [0.0; 4];
    for (i, si) in s.iter_mut().enumerate() {
        *si = (0..4).map(|j| a[i][j] * strain[j]).sum();
    }
    if let Some(t) = temperature {
        let th = data.thermal_modulus() * (t - data.t_ref);
        for si in &mut s[..3] {
            *si -= th;
        }
    }
    Stress(s)
}

fn check(mesh: &Mesh, u: &Field, temperature: Option<&Field>) -> Result<()> {
    if u.rank != Rank::Vector || u.len() != 2 * mesh.n_nodes() {
        return Err(Error::DimensionMismatch { expected: 2 * mesh.n_nodes(), found: u.len() });
    }
    if let Some(t) = temperature {
        if t.rank != Rank::Scalar || t.len() != mesh.n_nodes() {
            return Err(Error::DimensionMismatch { expected: mesh.n_nodes(), found: t.len() });
        }
    }
    Ok(())
}

/// Stress at barycentric point `l` of element `e`. On the axis the hoop strain takes its limit `∂r u_r`.
pub fn stress_at(mesh: &Mesh, u: &Field, temperature: Option<&Field>, data: &MechanicalData, e: usize, l: [f64; 3]) -> (Point, Stress) {
    let (val, g, x) = displacement_jet(mesh, u, e, l);
    let hoop = if x.r > 1e-12 { val[0] / x.r } else { g[0] };
    let strain = [g[0], g[3], hoop, g[1] + g[2]];
    let t = temperature.map(|t| {
        let values = lagrange::evaluate(mesh.degree, l).values;
        mesh.element_nodes(e).iter().zip(&values).map(|(&n, v)| v * t.values[n]).sum()
    });
    (x, constitutive(data, strain, t))
}

/// Stress at every element quadrature point.
pub fn quadrature_stress(mesh: &Mesh, u: &Field, temperature: Option<&Field>, data: &MechanicalData) -> Result<StressState> {
    check(mesh, u, temperature)?;
    let refe = ReferenceElement::for_assembly(mesh.degree);
    let mut out = StressState::default();
    for e in 0..mesh.elements.len() {
        for &l in &refe.rule.points {
            let (x, s) = stress_at(mesh, u, temperature, data, e, l);
            out.points.push(x);
            out.stress.push(s);
        }
    }
    Ok(out)
}

/// Stress at every mesh node, averaged over the elements sharing it.
pub fn nodal_stress(mesh: &Mesh, u: &Field, temperature: Option<&Field>, data: &MechanicalData) -> Result<StressState> {
    check(mesh, u, temperature)?;
    let p = mesh.degree;
    let lattice = lagrange::lattice(p);
    let mut sum = vec![[0.0; 4]; mesh.n_nodes()];
    let mut count = vec![0usize; mesh.n_nodes()];
    for e in 0..mesh.elements.len() {
        for (a, &n) in mesh.element_nodes(e).iter().enumerate() {
            let l = lattice[a].map(|c| c as f64 / p as f64);
            let (_, s) = stress_at(mesh, u, temperature, data, e, l);
            for c in 0..4 {
                sum[n][c] += s.0[c];
            }
            count[n] += 1;
        }
    }
    let stress = sum.iter().zip(&count).map(|(s, &c)| Stress(s.map(|v| v / c as f64))).collect();
    Ok(StressState { points: mesh.nodes.clone(), stress })
}
