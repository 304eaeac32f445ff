//! Manufactured polynomial solutions and the verification runs built on them.
//!
//! The temperature `T = C' r² y` and displacement `u = C (r y², r² y)` are cubic,
//! so degree-3 elements reproduce them up to round-off; lower degrees give
//! convergence rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    assemble_mechanical, assemble_thermal, quadrature_stress, scalar_error, stress_at, vector_error, Field,
    InnerProductKind, MechanicalData, ReferenceElement, ScalarData, Stress, ThermalData, VectorData,
};
use crate::geometry::{lame_from_young, MacroDecomposition, Mesh, Point};
use crate::linalg::SolverKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseKind {
    Thermal,
    Mechanical,
    Coupled,
}

impl CaseKind {
    pub const ALL: [CaseKind; 3] = [CaseKind::Thermal, CaseKind::Mechanical, CaseKind::Coupled];

    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Thermal => "thermal",
            CaseKind::Mechanical => "mechanical",
            CaseKind::Coupled => "coupled",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        CaseKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown manufactured case {s:?}")))
    }
}

/// Material constants of the verification runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub conductivity: f64,
    pub h_bottom: f64,
    pub h_fluid: f64,
    pub h_outer: f64,
    pub young: f64,
    pub poisson: f64,
    pub alpha: f64,
    pub t_ref: f64,
}

impl Default for Material {
    fn default() -> Self {
        Material {
            conductivity: 10.0,
            h_bottom: 2000.0,
            h_fluid: 200.0,
            h_outer: 2000.0,
            young: 5e9,
            poisson: 0.2,
            alpha: 1e-6,
            t_ref: 298.0,
        }
    }
}

/// A manufactured problem: analytic fields plus the data that produce them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedCase {
    pub kind: CaseKind,
    /// Displacement amplitude, 1/m².
    pub displacement_scale: f64,
    /// Temperature amplitude, K/m³.
    pub temperature_scale: f64,
    pub material: Material,
}

impl ManufacturedCase {
    pub fn new(kind: CaseKind) -> Self {
        ManufacturedCase { kind, displacement_scale: 1e-4, temperature_scale: 1.0, material: Material::default() }
    }

    pub fn lame(&self) -> Result<(f64, f64)> {
        lame_from_young(self.material.young, self.material.poisson)
    }

    fn thermal_modulus(&self) -> f64 {
        let m = &self.material;
        m.young * m.alpha / (1.0 - 2.0 * m.poisson)
    }

    pub fn temperature(&self, p: Point) -> (f64, [f64; 2]) {
        let c = self.temperature_scale;
        (c * p.r * p.r * p.y, [2.0 * c * p.r * p.y, c * p.r * p.r])
    }

    /// Displacement and its gradient `[∂r u_r, ∂y u_r, ∂r u_y, ∂y u_y]`.
    pub fn displacement(&self, p: Point) -> ([f64; 2], [f64; 4]) {
        let c = self.displacement_scale;
        let (r, y) = (p.r, p.y);
        ([c * r * y * y, c * r * r * y], [c * y * y, 2.0 * c * r * y, 2.0 * c * r * y, c * r * r])
    }

    fn has_thermal_stress(&self) -> bool {
        self.kind == CaseKind::Coupled
    }

    pub fn mechanical_data(&self) -> Result<MechanicalData> {
        let (mu, lambda) = self.lame()?;
        let case = *self;
        let mut data = MechanicalData {
            mu,
            lambda,
            alpha: self.material.alpha,
            t_ref: self.material.t_ref,
            body_force: VectorData::ZERO,
            traction_top: VectorData::ZERO,
            traction_bottom: VectorData::ZERO,
            traction_fluid: VectorData::ZERO,
            traction_outer: VectorData::ZERO,
        };
        let (c, ct) = (self.displacement_scale, self.temperature_scale);
        let th = if self.has_thermal_stress() { self.thermal_modulus() } else { 0.0 };
        data.body_force = VectorData::function(move |s| {
            let (r, y) = (s.point.r, s.point.y);
            [
                -(2.0 * lambda * c * r + 4.0 * mu * c * r - 2.0 * th * ct * r * y),
                -(8.0 * mu * c * y + 4.0 * lambda * c * y - th * ct * r * r),
            ]
        });
        let traction = VectorData::function(move |s| {
            let st = case.stress(s.point).0;
            let n = s.normal();
            [st[0] * n[0] + st[3] * n[1], st[3] * n[0] + st[1] * n[1]]
        });
        data.traction_top = traction.clone();
        data.traction_bottom = traction.clone();
        data.traction_fluid = traction.clone();
        data.traction_outer = traction;
        Ok(data)
    }

    /// Analytic stress, including the thermal part for the coupled case.
    pub fn stress(&self, p: Point) -> Stress {
        let (mu, lambda) = self.lame().expect("validated material");
        let (u, g) = self.displacement(p);
        let strain = [g[0], g[3], u[0] / p.r, g[1] + g[2]];
        let a = crate::fem::elasticity_matrix(mu, lambda);
        let mut s = [0.0; 4];
        for (i, si) in s.iter_mut().enumerate() {
            *si = (0..4).map(|j| a[i][j] * strain[j]).sum();
        }
        if self.has_thermal_stress() {
            let t = self.thermal_modulus() * (self.temperature(p).0 - self.material.t_ref);
            s[..3].iter_mut().for_each(|v| *v -= t);
        }
        Stress(s)
    }

    pub fn thermal_data(&self) -> ThermalData {
        let m = self.material;
        let case = *self;
        let k = m.conductivity;
        let exterior = move |h: f64| {
            ScalarData::function(move |s| {
                let (t, g) = case.temperature(s.point);
                let n = s.normal();
                t + k / h * (g[0] * n[0] + g[1] * n[1])
            })
        };
        let ct = self.temperature_scale;
        ThermalData {
            conductivity: k.into(),
            h_fluid: m.h_fluid.into(),
            h_outer: m.h_outer.into(),
            h_bottom: m.h_bottom.into(),
            t_fluid: exterior(m.h_fluid),
            t_outer: exterior(m.h_outer),
            t_bottom: exterior(m.h_bottom),
            q_top: ScalarData::function(move |s| {
                let g = case.temperature(s.point).1;
                let n = s.normal();
                -k * (g[0] * n[0] + g[1] * n[1])
            }),
            source: ScalarData::function(move |s| -4.0 * ct * k * s.point.y),
        }
    }
}

/// Errors on one refinement level; relative errors are against the analytic field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: u32,
    pub n_dofs: usize,
    /// Temperature in `H1r`, displacement in the `U` norm.
    pub relative_error: f64,
    pub relative_l2: f64,
    pub relative_h1: f64,
    /// Only for the thermal part of the coupled case.
    pub temperature_error: Option<f64>,
    pub von_mises_error: Option<f64>,
    pub hydrostatic_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub kind: CaseKind,
    pub degree: usize,
    pub levels: Vec<LevelResult>,
    /// `log2(e_L / e_{L+1})` for consecutive levels in the `H1r` norm.
    pub h1_slopes: Vec<f64>,
    pub l2_slopes: Vec<f64>,
}

impl ValidationReport {
    /// Whether every level meets [`tolerance`] and the coupled case its hydrostatic identity.
    pub fn passes(&self) -> bool {
        let tol = tolerance(self.kind);
        self.levels.iter().all(|l| l.relative_error <= tol && l.hydrostatic_residual.is_none_or(|h| h <= tol))
    }

    pub fn max_relative_error(&self) -> f64 {
        self.levels.iter().map(|l| l.relative_error).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,degree,level,dofs,relative_error,relative_l2,relative_h1,temperature_error,von_mises_error,hydrostatic_residual\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_default();
        for l in &self.levels {
            out.push_str(&format!(
                "{},{},{},{},{:.6e},{:.6e},{:.6e},{},{},{}\n",
                self.kind.name(),
                self.degree,
                l.level,
                l.n_dofs,
                l.relative_error,
                l.relative_l2,
                l.relative_h1,
                opt(l.temperature_error),
                opt(l.von_mises_error),
                opt(l.hydrostatic_residual)
            ));
        }
        out
    }
}

/// Accepted relative error of a cubic discretization on a twice-refined mesh.
pub fn tolerance(kind: CaseKind) -> f64 {
    match kind {
        CaseKind::Thermal => 1e-9,
        CaseKind::Mechanical | CaseKind::Coupled => 1e-8,
    }
}

fn slopes(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Solves the manufactured problem on each level and measures errors.
pub fn run_validation(case: &ManufacturedCase, degree: usize, levels: &[u32], kind: SolverKind) -> Result<ValidationReport> {
    let macro_mesh = MacroDecomposition::reference();
    let mut results = Vec::with_capacity(levels.len());
    for &level in levels {
        let mesh = Mesh::refine(&macro_mesh, level, degree)?;
        results.push(match case.kind {
            CaseKind::Thermal => thermal_level(case, &mesh, kind)?,
            CaseKind::Mechanical | CaseKind::Coupled => mechanical_level(case, &mesh, kind)?,
        });
    }
    let h1: Vec<f64> = results.iter().map(|l| l.relative_h1).collect();
    let l2: Vec<f64> = results.iter().map(|l| l.relative_l2).collect();
    Ok(ValidationReport { kind: case.kind, degree, levels: results, h1_slopes: slopes(&h1), l2_slopes: slopes(&l2) })
}

fn thermal_level(case: &ManufacturedCase, mesh: &Mesh, kind: SolverKind) -> Result<LevelResult> {
    let t = assemble_thermal(mesh, &case.thermal_data())?.solve(kind)?;
    let exact = |p| case.temperature(p);
    let (eh, nh) = scalar_error(mesh, &t, InnerProductKind::H1r, exact)?;
    let (el, nl) = scalar_error(mesh, &t, InnerProductKind::L2r, exact)?;
    Ok(LevelResult {
        level: mesh.level,
        n_dofs: t.len(),
        relative_error: eh / nh,
        relative_l2: el / nl,
        relative_h1: eh / nh,
        temperature_error: None,
        von_mises_error: None,
        hydrostatic_residual: None,
    })
}

fn mechanical_level(case: &ManufacturedCase, mesh: &Mesh, kind: SolverKind) -> Result<LevelResult> {
    let data = case.mechanical_data()?;
    let (temperature, temperature_error) = if case.kind == CaseKind::Coupled {
        let thermal = ManufacturedCase { kind: CaseKind::Thermal, ..*case };
        let t = assemble_thermal(mesh, &thermal.thermal_data())?.solve(kind)?;
        let (e, n) = scalar_error(mesh, &t, InnerProductKind::H1r, |p| case.temperature(p))?;
        (Some(t), Some(e / n))
    } else {
        (None, None)
    };
    let u = assemble_mechanical(mesh, &data, temperature.as_ref())?.solve(kind)?;
    let exact = |p| case.displacement(p);
    let (eu, nu) = vector_error(mesh, &u, InnerProductKind::Unorm, exact)?;
    let (eh, nh) = vector_error(mesh, &u, InnerProductKind::H1r, exact)?;
    let (el, nl) = vector_error(mesh, &u, InnerProductKind::L2r, exact)?;

    let numeric = quadrature_stress(mesh, &u, temperature.as_ref(), &data)?;
    let mut vm_err: f64 = 0.0;
    let mut vm_max: f64 = 0.0;
    for (p, s) in numeric.points.iter().zip(&numeric.stress) {
        let a = case.stress(*p).von_mises();
        vm_err = vm_err.max((s.von_mises() - a).abs());
        vm_max = vm_max.max(a);
    }
    let hydrostatic = temperature.as_ref().map(|t| hydrostatic_residual(mesh, &u, t, &data));
    Ok(LevelResult {
        level: mesh.level,
        n_dofs: u.len(),
        relative_error: eu / nu,
        relative_l2: el / nl,
        relative_h1: eh / nh,
        temperature_error,
        von_mises_error: Some(vm_err / vm_max),
        hydrostatic_residual: hydrostatic,
    })
}

/// `max |⅓ tr(σ[T0] - σ[T]) - (2μ+3λ)α (T - T0)|` over quadrature points, relative to the largest thermal stress.
///
/// `σ[T]` is the stress of the same displacement evaluated with temperature `T`.
pub fn hydrostatic_residual(mesh: &Mesh, u: &Field, temperature: &Field, data: &MechanicalData) -> f64 {
    let refe = ReferenceElement::for_assembly(mesh.degree);
    let c = data.thermal_modulus();
    let (mut worst, mut scale): (f64, f64) = (0.0, 0.0);
    for e in 0..mesh.elements.len() {
        for &l in &refe.rule.points {
            let (_, hot) = stress_at(mesh, u, Some(temperature), data, e, l);
            let (_, cold) = stress_at(mesh, u, None, data, e, l);
            let values = crate::fem::lagrange::evaluate(mesh.degree, l).values;
            let t: f64 = mesh.element_nodes(e).iter().zip(&values).map(|(&n, v)| v * temperature.values[n]).sum();
            let thermal = c * (t - data.t_ref);
            let diff = (cold.mean() - hot.mean() - thermal).abs();
            worst = worst.max(diff);
            scale = scale.max(thermal.abs());
        }
    }
    worst / scale.max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::Site;

    fn boundary(r: f64, y: f64, n: [f64; 2]) -> Site {
        Site { point: Point::new(r, y), normal: Some(n) }
    }

    #[test]
    fn thermal_data_values() {
        let d = ManufacturedCase::new(CaseKind::Thermal).thermal_data();
        assert_eq!(d.source.eval(&Site::interior(Point::new(1.0, 1.0))), -40.0);
        assert_eq!(d.q_top.eval(&boundary(2.0, 7.265, [0.0, 1.0])), -40.0);
        assert!((d.t_bottom.eval(&boundary(2.0, 0.0, [0.0, -1.0])) + 0.02).abs() < 1e-15);
    }

    #[test]
    fn radial_stress_at_unit_point() {
        let s = ManufacturedCase::new(CaseKind::Mechanical).stress(Point::new(1.0, 1.0));
        let f = 5e9 / ((1.0 - 0.4) * 1.2);
        assert!((s.0[0] - f * 1.2e-4).abs() < 1e-6 * s.0[0]);
        assert!((s.0[0] - 8.333e5).abs() < 1e2);
    }

    #[test]
    fn body_force_balances_the_stress_divergence() {
        for kind in [CaseKind::Mechanical, CaseKind::Coupled] {
            let case = ManufacturedCase::new(kind);
            let f = case.mechanical_data().unwrap().body_force;
            let h = 1e-4;
            for &(r, y) in &[(1.0, 1.0), (3.5, 0.7), (6.0, 5.0)] {
                let s = |dr: f64, dy: f64| case.stress(Point::new(r + dr, y + dy)).0;
                let ds_rr = (s(h, 0.0)[0] - s(-h, 0.0)[0]) / (2.0 * h);
                let ds_ry_y = (s(0.0, h)[3] - s(0.0, -h)[3]) / (2.0 * h);
                let ds_ry_r = (s(h, 0.0)[3] - s(-h, 0.0)[3]) / (2.0 * h);
                let ds_yy = (s(0.0, h)[1] - s(0.0, -h)[1]) / (2.0 * h);
                let c = s(0.0, 0.0);
                let div = [ds_rr + ds_ry_y + (c[0] - c[2]) / r, ds_ry_r + ds_yy + c[3] / r];
                let b = f.eval(&Site::interior(Point::new(r, y)));
                let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for k in 0..2 {
                    assert!((div[k] + b[k]).abs() < 1e-6 * scale, "{kind:?} ({r},{y}) comp {k}: {} vs {}", div[k], b[k]);
                }
            }
        }
    }

    #[test]
    fn unknown_kind_is_rejected() {
        assert!(CaseKind::from_name("acoustic").is_err());
        assert_eq!(CaseKind::from_name("Coupled").unwrap(), CaseKind::Coupled);
    }
}
