//! Parameter-separable expansions `Σ θ_q(Ξ) op_q` of the pulled-back forms.
//!
//! Every subdomain map is `x = G x̂ + c`, so the radial weight
//! `r = G11 r̂ + G12 ŷ + c1` is affine in the reference coordinates and each
//! volume integrand splits over the reference weights `{1, r̂, ŷ}`. Only the
//! hoop term, weighted by `det G / r`, does not separate; it stays as a
//! descriptor and is integrated online.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::Model;
use crate::geometry::{
    signed_area, AffineMapSet, BoundaryTag, GeometricParams, MacroDecomposition, PhysicalParams,
};
use crate::problem::BoundaryData;

/// Scalar material factor of a term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhysFactor {
    One,
    Conductivity,
    Lambda,
    TwoMu,
    LambdaPlusTwoMu,
    /// `(2μ + 3λ) α`.
    ThermalModulus,
}

impl PhysFactor {
    pub fn eval(self, p: &PhysicalParams) -> f64 {
        match self {
            PhysFactor::One => 1.0,
            PhysFactor::Conductivity => p.conductivity,
            PhysFactor::Lambda => p.lambda,
            PhysFactor::TwoMu => 2.0 * p.mu,
            PhysFactor::LambdaPlusTwoMu => p.lambda + 2.0 * p.mu,
            PhysFactor::ThermalModulus => p.thermal_modulus(),
        }
    }
}

/// Reference-coordinate weight of a volume or edge integrand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Weight {
    One,
    R,
    Y,
}

impl Weight {
    pub const ALL: [Weight; 3] = [Weight::One, Weight::R, Weight::Y];

    #[inline]
    pub fn at(self, r: f64, y: f64) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::R => r,
            Weight::Y => y,
        }
    }
}

/// Quadratic monomials in `(r̂, ŷ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Monomial {
    One,
    R,
    Y,
    RR,
    RY,
    YY,
}

impl Monomial {
    pub const ALL: [Monomial; 6] = [Monomial::One, Monomial::R, Monomial::Y, Monomial::RR, Monomial::RY, Monomial::YY];

    #[inline]
    pub fn at(self, r: f64, y: f64) -> f64 {
        match self {
            Monomial::One => 1.0,
            Monomial::R => r,
            Monomial::Y => y,
            Monomial::RR => r * r,
            Monomial::RY => r * y,
            Monomial::YY => y * y,
        }
    }
}

/// Which quadratic form of the reference gradient a metric factor belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    /// `∇u·∇v` of a scalar.
    Conduction,
    /// `div u div v`.
    Dilatation,
    /// `ε_rr² + ε_yy² + γ²/2`, the in-plane part of `ε:ε`.
    Shear,
}

/// Closed-form geometric factor, evaluated from the subdomain maps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GeomFactor {
    One,
    /// `det G · w(G, c) · M_kl(G⁻ᵀ)`.
    Metric { sub: usize, weight: Weight, metric: Metric, k: usize, l: usize },
    /// `det G · d_k`, where `div u = Σ d_k ĝ_k`.
    Mix { sub: usize, k: usize },
    /// `det G · w(G, c) · d_k`.
    Couple { sub: usize, weight: Weight, k: usize },
    /// `det G · w(G, c)`.
    Volume { sub: usize, weight: Weight },
    Jacobian { sub: usize },
    /// `|G t̂| · w(G, c)` along an edge with reference unit tangent `t̂`.
    EdgeLength { sub: usize, tangent: [f64; 2], weight: Weight },
    /// Component of the rotated tangent `(G t̂)^⊥` times the monomial coefficient of `(y_top - y) r`.
    EdgeNormal { sub: usize, tangent: [f64; 2], comp: usize, monomial: Monomial },
}

/// The subdomain maps at one tuple, with the derived quantities the factors need.
#[derive(Clone, Debug)]
pub struct GeometryContext {
    pub maps: AffineMapSet,
    det: Vec<f64>,
    /// `G⁻ᵀ`, mapping reference to physical gradients.
    jac: Vec<[[f64; 2]; 2]>,
    top: f64,
}

impl GeometryContext {
    pub fn new(decomposition: &MacroDecomposition, g: &GeometricParams) -> Result<Self> {
        g.validate()?;
        let maps = AffineMapSet::new(decomposition, g)?;
        let det = maps.maps.iter().map(|m| m.det()).collect();
        let jac = maps
            .maps
            .iter()
            .map(|m| {
                let i = m.inverse_matrix();
                [[i[0][0], i[1][0]], [i[0][1], i[1][1]]]
            })
            .collect();
        Ok(GeometryContext { maps, det, jac, top: g.heights()[5] })
    }

    pub fn reference(decomposition: &MacroDecomposition) -> Self {
        Self::new(decomposition, &GeometricParams::reference()).expect("reference geometry is admissible")
    }

    pub fn det(&self, sub: usize) -> f64 {
        self.det[sub]
    }

    /// Coefficient of `w` in `r = G11 r̂ + G12 ŷ + c1`.
    #[inline]
    pub fn radial(&self, sub: usize, w: Weight) -> f64 {
        let m = &self.maps.maps[sub];
        match w {
            Weight::One => m.c[0],
            Weight::R => m.g[0][0],
            Weight::Y => m.g[0][1],
        }
    }

    /// Physical radius at a reference point of `sub`.
    #[inline]
    pub fn radius(&self, sub: usize, r: f64, y: f64) -> f64 {
        let m = &self.maps.maps[sub];
        m.g[0][0] * r + m.g[0][1] * y + m.c[0]
    }

    fn divergence(&self, sub: usize) -> [f64; 4] {
        let j = &self.jac[sub];
        [j[0][0], j[0][1], j[1][0], j[1][1]]
    }

    fn metric(&self, sub: usize, metric: Metric, k: usize, l: usize) -> f64 {
        let j = &self.jac[sub];
        match metric {
            Metric::Conduction => j[0][k] * j[0][l] + j[1][k] * j[1][l],
            Metric::Dilatation => {
                let d = self.divergence(sub);
                d[k] * d[l]
            }
            Metric::Shear => {
                let err = [j[0][0], j[0][1], 0.0, 0.0];
                let eyy = [0.0, 0.0, j[1][0], j[1][1]];
                let gam = [j[1][0], j[1][1], j[0][0], j[0][1]];
                err[k] * err[l] + eyy[k] * eyy[l] + 0.5 * gam[k] * gam[l]
            }
        }
    }

    fn stretched(&self, sub: usize, t: [f64; 2]) -> [f64; 2] {
        let g = &self.maps.maps[sub].g;
        [g[0][0] * t[0] + g[0][1] * t[1], g[1][0] * t[0] + g[1][1] * t[1]]
    }

    /// Coefficient of `m` in `(y_top - y) r` on `sub`.
    fn head_coefficient(&self, sub: usize, m: Monomial) -> f64 {
        let map = &self.maps.maps[sub];
        let a = [self.top - map.c[1], -map.g[1][0], -map.g[1][1]];
        let b = [map.c[0], map.g[0][0], map.g[0][1]];
        match m {
            Monomial::One => a[0] * b[0],
            Monomial::R => a[0] * b[1] + a[1] * b[0],
            Monomial::Y => a[0] * b[2] + a[2] * b[0],
            Monomial::RR => a[1] * b[1],
            Monomial::RY => a[1] * b[2] + a[2] * b[1],
            Monomial::YY => a[2] * b[2],
        }
    }
}

impl GeomFactor {
    pub fn eval(&self, ctx: &GeometryContext) -> f64 {
        match *self {
            GeomFactor::One => 1.0,
            GeomFactor::Metric { sub, weight, metric, k, l } => {
                ctx.det[sub] * ctx.radial(sub, weight) * ctx.metric(sub, metric, k, l)
            }
            GeomFactor::Mix { sub, k } => ctx.det[sub] * ctx.divergence(sub)[k],
            GeomFactor::Couple { sub, weight, k } => ctx.det[sub] * ctx.radial(sub, weight) * ctx.divergence(sub)[k],
            GeomFactor::Volume { sub, weight } => ctx.det[sub] * ctx.radial(sub, weight),
            GeomFactor::Jacobian { sub } => ctx.det[sub],
            GeomFactor::EdgeLength { sub, tangent, weight } => {
                let v = ctx.stretched(sub, tangent);
                v[0].hypot(v[1]) * ctx.radial(sub, weight)
            }
            GeomFactor::EdgeNormal { sub, tangent, comp, monomial } => {
                let v = ctx.stretched(sub, tangent);
                let n = if comp == 0 { v[1] } else { -v[0] };
                n * ctx.head_coefficient(sub, monomial)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, GeomFactor::One)
    }
}

/// Parameter-independent reference integrand.
///
/// Features of a trial function are its values and its reference gradient
/// `ĝ` (`(∂r̂, ∂ŷ)` for a scalar, `(∂r̂ u_r, ∂ŷ u_r, ∂r̂ u_y, ∂ŷ u_y)` for a displacement).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OpSpec {
    /// `∫_sub w ĝ_k(u) ĝ_l(v)`, symmetrized when `k ≠ l`.
    Stiffness { sub: usize, weight: Weight, k: usize, l: usize },
    /// `∫_sub ĝ_k(u) v_r + u_r ĝ_k(v)`.
    Mix { sub: usize, k: usize },
    /// `∫_edge scale · w u·v`.
    EdgeMass { edge: usize, weight: Weight, scale: f64 },
    /// `∫ u_r v_r / r̂` over the reference domain.
    Hoop,
    /// `∫_sub w value·v`.
    VolumeLoad { sub: usize, weight: Weight, value: [f64; 2] },
    /// `∫_edge w value·v`.
    EdgeLoad { edge: usize, weight: Weight, value: [f64; 2] },
    /// `∫_edge scale · m(r̂, ŷ) v_comp`.
    EdgeMonomial { edge: usize, comp: usize, monomial: Monomial, scale: f64 },
    /// `∫_sub w T ĝ_k(v)` against a scalar source field `T`.
    CoupleGrad { sub: usize, weight: Weight, k: usize },
    /// `∫_sub T v_r`.
    CoupleHoop { sub: usize },
    /// Fixed linear combination of other operators.
    Combination(Vec<(f64, OpSpec)>),
}

/// One `θ_phys(Ξ) θ_geom(Ξ) op` contribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineTerm {
    pub phys: PhysFactor,
    pub geom: GeomFactor,
    pub op: usize,
    /// Group used when geometry is frozen, e.g. `conduction` or `robin-fluid`.
    pub label: String,
}

/// Per-operator sums of `θ_phys θ_geom`; `ctx` may be omitted when every geometric factor is constant.
pub fn coefficients(terms: &[AffineTerm], n_ops: usize, phys: &PhysicalParams, ctx: Option<&GeometryContext>) -> Vec<f64> {
    let mut c = vec![0.0; n_ops];
    for t in terms {
        let g = match (&t.geom, ctx) {
            (GeomFactor::One, _) => 1.0,
            (geom, Some(ctx)) => geom.eval(ctx),
            (_, None) => panic!("geometric factor evaluated without a geometry"),
        };
        c[t.op] += t.phys.eval(phys) * g;
    }
    c
}

/// A form as a term list over shared reference operators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineForm {
    pub terms: Vec<AffineTerm>,
    pub ops: Vec<OpSpec>,
    /// Factor of the nonseparable hoop term `∫ u_r v_r det G / r`, if present.
    pub hoop: Option<PhysFactor>,
}

impl AffineForm {
    fn new() -> Self {
        AffineForm { terms: Vec::new(), ops: Vec::new(), hoop: None }
    }

    fn push_op(&mut self, op: OpSpec) -> usize {
        self.ops.push(op);
        self.ops.len() - 1
    }

    fn term(&mut self, phys: PhysFactor, geom: GeomFactor, op: usize, label: &str) {
        self.terms.push(AffineTerm { phys, geom, op, label: label.to_string() });
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_separable(&self) -> bool {
        self.hoop.is_none()
    }

    pub fn needs_geometry(&self) -> bool {
        self.hoop.is_some() || self.terms.iter().any(|t| !t.geom.is_constant())
    }

    /// Coefficient of every operator at a tuple (terms sharing an operator are summed).
    pub fn coefficients(&self, phys: &PhysicalParams, ctx: Option<&GeometryContext>) -> Vec<f64> {
        coefficients(&self.terms, self.ops.len(), phys, ctx)
    }

    /// Freezes the geometry: terms are summed per `(factor, label)` into one operator each,
    /// and the hoop term is split between the `λ` and `2μ` groups.
    pub fn collapse(&self, ctx: &GeometryContext) -> AffineForm {
        let mut groups: Vec<(PhysFactor, String, Vec<(f64, OpSpec)>)> = Vec::new();
        let mut add = |phys: PhysFactor, label: &str, coef: f64, op: OpSpec| {
            let slot = match groups.iter().position(|g| g.0 == phys && g.1 == label) {
                Some(i) => i,
                None => {
                    groups.push((phys, label.to_string(), Vec::new()));
                    groups.len() - 1
                }
            };
            groups[slot].2.push((coef, op));
        };
        for t in &self.terms {
            add(t.phys, &t.label, t.geom.eval(ctx), self.ops[t.op].clone());
        }
        if self.hoop.is_some() {
            add(PhysFactor::Lambda, "dilatation", 1.0, OpSpec::Hoop);
            add(PhysFactor::TwoMu, "shear", 1.0, OpSpec::Hoop);
        }
        let mut out = AffineForm::new();
        for (phys, label, parts) in groups {
            let op = out.push_op(OpSpec::Combination(parts));
            out.term(phys, GeomFactor::One, op, &label);
        }
        out
    }
}

/// Macro boundary edges with the subdomain they bound and their counter-clockwise tangent.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeInfo {
    pub sub: usize,
    pub tag: BoundaryTag,
    pub tangent: [f64; 2],
}

pub fn edge_infos(decomposition: &MacroDecomposition) -> Vec<EdgeInfo> {
    let pos = decomposition.reference_positions();
    decomposition
        .boundary
        .iter()
        .map(|e| {
            let tri = decomposition.triangle_points(&pos, e.triangle);
            let ccw = signed_area(tri[0], tri[1], tri[2]) > 0.0;
            let verts = decomposition.triangles[e.triangle].vertices;
            let k = verts.iter().position(|&v| v == e.vertices[0]).expect("edge vertex in its triangle");
            let forward = verts[(k + 1) % 3] == e.vertices[1];
            let (a, b) = if forward == ccw { (e.vertices[0], e.vertices[1]) } else { (e.vertices[1], e.vertices[0]) };
            let (dr, dy) = (pos[b].r - pos[a].r, pos[b].y - pos[a].y);
            let len = dr.hypot(dy);
            EdgeInfo { sub: e.triangle, tag: e.tag, tangent: [dr / len, dy / len] }
        })
        .collect()
}

/// Count of scalar gradient features.
const SCALAR_GRADS: usize = 2;
const VECTOR_GRADS: usize = 4;

fn stiffness_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |k| (k..n).map(move |l| (k, l)))
}

/// Expansion of the thermal bilinear form.
pub fn thermal_matrix(decomposition: &MacroDecomposition, data: &BoundaryData) -> Result<AffineForm> {
    data.validate()?;
    let mut f = AffineForm::new();
    for sub in 0..decomposition.triangles.len() {
        for w in Weight::ALL {
            for (k, l) in stiffness_pairs(SCALAR_GRADS) {
                let op = f.push_op(OpSpec::Stiffness { sub, weight: w, k, l });
                let geom = GeomFactor::Metric { sub, weight: w, metric: Metric::Conduction, k, l };
                f.term(PhysFactor::Conductivity, geom, op, "conduction");
            }
        }
    }
    for (edge, info) in edge_infos(decomposition).iter().enumerate() {
        let Some((h, _)) = robin(data, info.tag) else { continue };
        let label = format!("robin-{}", info.tag.name());
        for w in Weight::ALL {
            let op = f.push_op(OpSpec::EdgeMass { edge, weight: w, scale: h });
            f.term(PhysFactor::One, GeomFactor::EdgeLength { sub: info.sub, tangent: info.tangent, weight: w }, op, &label);
        }
    }
    Ok(f)
}

fn robin(data: &BoundaryData, tag: BoundaryTag) -> Option<(f64, f64)> {
    match tag {
        BoundaryTag::Fluid => Some((data.fluid_transfer, data.fluid_temperature)),
        BoundaryTag::Outer => Some((data.outer_transfer, data.outer_temperature)),
        BoundaryTag::Bottom => Some((data.bottom_transfer, data.bottom_temperature)),
        BoundaryTag::Top | BoundaryTag::Axis => None,
    }
}

/// Expansion of the thermal right-hand side.
pub fn thermal_rhs(decomposition: &MacroDecomposition, data: &BoundaryData) -> Result<AffineForm> {
    data.validate()?;
    let mut f = AffineForm::new();
    for (edge, info) in edge_infos(decomposition).iter().enumerate() {
        let (value, label) = match robin(data, info.tag) {
            Some((h, t)) => (h * t, format!("robin-{}", info.tag.name())),
            None if info.tag == BoundaryTag::Top => (data.top_flux, "flux".to_string()),
            None => continue,
        };
        if value == 0.0 {
            continue;
        }
        for w in Weight::ALL {
            let op = f.push_op(OpSpec::EdgeLoad { edge, weight: w, value: [value, 0.0] });
            f.term(PhysFactor::One, GeomFactor::EdgeLength { sub: info.sub, tangent: info.tangent, weight: w }, op, &label);
        }
    }
    if data.heat_source != 0.0 {
        for sub in 0..decomposition.triangles.len() {
            for w in Weight::ALL {
                let op = f.push_op(OpSpec::VolumeLoad { sub, weight: w, value: [data.heat_source, 0.0] });
                f.term(PhysFactor::One, GeomFactor::Volume { sub, weight: w }, op, "source");
            }
        }
    }
    Ok(f)
}

/// Expansion of the elastic bilinear form: `λ` dilatational and `2μ` shear terms plus the hoop descriptor.
pub fn mechanical_matrix(decomposition: &MacroDecomposition) -> AffineForm {
    let mut f = AffineForm::new();
    for sub in 0..decomposition.triangles.len() {
        for w in Weight::ALL {
            for (k, l) in stiffness_pairs(VECTOR_GRADS) {
                let op = f.push_op(OpSpec::Stiffness { sub, weight: w, k, l });
                let dil = GeomFactor::Metric { sub, weight: w, metric: Metric::Dilatation, k, l };
                let shear = GeomFactor::Metric { sub, weight: w, metric: Metric::Shear, k, l };
                f.term(PhysFactor::Lambda, dil, op, "dilatation");
                f.term(PhysFactor::TwoMu, shear, op, "shear");
            }
        }
        for k in 0..VECTOR_GRADS {
            let op = f.push_op(OpSpec::Mix { sub, k });
            f.term(PhysFactor::Lambda, GeomFactor::Mix { sub, k }, op, "dilatation");
        }
    }
    f.hoop = Some(PhysFactor::LambdaPlusTwoMu);
    f
}

/// Expansion of the body-force, traction and fluid-pressure loads.
pub fn mechanical_rhs(decomposition: &MacroDecomposition, data: &BoundaryData) -> Result<AffineForm> {
    data.validate()?;
    let mut f = AffineForm::new();
    if data.body_force != [0.0, 0.0] {
        for sub in 0..decomposition.triangles.len() {
            for w in Weight::ALL {
                let op = f.push_op(OpSpec::VolumeLoad { sub, weight: w, value: data.body_force });
                f.term(PhysFactor::One, GeomFactor::Volume { sub, weight: w }, op, "body");
            }
        }
    }
    let rho_g = data.pressure_gradient();
    for (edge, info) in edge_infos(decomposition).iter().enumerate() {
        let traction = match info.tag {
            BoundaryTag::Top => data.top_traction,
            BoundaryTag::Bottom => data.bottom_traction,
            BoundaryTag::Outer => data.outer_traction,
            BoundaryTag::Fluid => {
                if rho_g != 0.0 {
                    for comp in 0..2 {
                        for m in Monomial::ALL {
                            let op = f.push_op(OpSpec::EdgeMonomial { edge, comp, monomial: m, scale: -rho_g });
                            let geom = GeomFactor::EdgeNormal { sub: info.sub, tangent: info.tangent, comp, monomial: m };
                            f.term(PhysFactor::One, geom, op, "pressure");
                        }
                    }
                }
                continue;
            }
            BoundaryTag::Axis => continue,
        };
        if traction == [0.0, 0.0] {
            continue;
        }
        for w in Weight::ALL {
            let op = f.push_op(OpSpec::EdgeLoad { edge, weight: w, value: traction });
            f.term(PhysFactor::One, GeomFactor::EdgeLength { sub: info.sub, tangent: info.tangent, weight: w }, op, "traction");
        }
    }
    Ok(f)
}

/// Expansion of `T ↦ ∫ (2μ+3λ)α T tr ε(v) r`, linear in a scalar source field `T`.
pub fn thermal_coupling(decomposition: &MacroDecomposition) -> AffineForm {
    let mut f = AffineForm::new();
    for sub in 0..decomposition.triangles.len() {
        for w in Weight::ALL {
            for k in 0..VECTOR_GRADS {
                let op = f.push_op(OpSpec::CoupleGrad { sub, weight: w, k });
                f.term(PhysFactor::ThermalModulus, GeomFactor::Couple { sub, weight: w, k }, op, "thermal");
            }
        }
        let op = f.push_op(OpSpec::CoupleHoop { sub });
        f.term(PhysFactor::ThermalModulus, GeomFactor::Jacobian { sub }, op, "thermal");
    }
    f
}

/// The matrix and right-hand-side expansions of one reduced model.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelForms {
    pub model: Model,
    pub matrix: AffineForm,
    /// Load form; for `WM2` the coupling form applied to the temperature.
    pub rhs: AffineForm,
}

pub fn affine_decompose(model: Model, decomposition: &MacroDecomposition, data: &BoundaryData) -> Result<ModelForms> {
    let (matrix, rhs) = match model {
        Model::Thermal => (thermal_matrix(decomposition, data)?, thermal_rhs(decomposition, data)?),
        Model::MechanicalLoads => (mechanical_matrix(decomposition), mechanical_rhs(decomposition, data)?),
        Model::ThermalStress => {
            data.validate()?;
            (mechanical_matrix(decomposition), thermal_coupling(decomposition))
        }
        Model::Mechanical => {
            return Err(Error::InvalidParameter(
                "the Galerkin track reduces WM1 and WM2 separately; WM has no expansion".into(),
            ))
        }
    };
    Ok(ModelForms { model, matrix, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ParameterTuple;

    #[test]
    fn physical_only_thermal_collapses_to_four_terms() {
        let dec = MacroDecomposition::reference();
        let f = thermal_matrix(&dec, &BoundaryData::default()).unwrap();
        let c = f.collapse(&GeometryContext::reference(&dec));
        assert_eq!(c.len(), 4);
        let phys: Vec<PhysFactor> = c.terms.iter().map(|t| t.phys).collect();
        assert_eq!(phys.iter().filter(|&&p| p == PhysFactor::Conductivity).count(), 1);
        assert_eq!(phys.iter().filter(|&&p| p == PhysFactor::One).count(), 3);
        let mut labels: Vec<&str> = c.terms.iter().map(|t| t.label.as_str()).collect();
        labels.sort();
        assert_eq!(labels, ["conduction", "robin-bottom", "robin-fluid", "robin-outer"]);
    }

    #[test]
    fn conductivity_scales_its_coefficient() {
        let dec = MacroDecomposition::reference();
        let c = thermal_matrix(&dec, &BoundaryData::default()).unwrap().collapse(&GeometryContext::reference(&dec));
        let mut t = ParameterTuple::reference(crate::geometry::ActiveSet::new([crate::geometry::ParamId::K]));
        let k = c.terms.iter().position(|t| t.phys == PhysFactor::Conductivity).unwrap();
        let base = c.coefficients(&t.physical(), None)[c.terms[k].op];
        t.set(crate::geometry::ParamId::K, 2.0 * t.get(crate::geometry::ParamId::K)).unwrap();
        assert_eq!(c.coefficients(&t.physical(), None)[c.terms[k].op], 2.0 * base);
    }

    #[test]
    fn reference_factors_are_trivial() {
        let dec = MacroDecomposition::reference();
        let ctx = GeometryContext::reference(&dec);
        for sub in 0..30 {
            assert_eq!(ctx.det(sub), 1.0);
            assert_eq!(GeomFactor::Metric { sub, weight: Weight::R, metric: Metric::Conduction, k: 0, l: 1 }.eval(&ctx), 0.0);
            assert_eq!(GeomFactor::Metric { sub, weight: Weight::R, metric: Metric::Shear, k: 1, l: 1 }.eval(&ctx), 0.5);
            assert_eq!(GeomFactor::Mix { sub, k: 3 }.eval(&ctx), 1.0);
        }
    }

    #[test]
    fn edge_tangents_run_counter_clockwise() {
        let dec = MacroDecomposition::reference();
        for e in edge_infos(&dec) {
            let n = [e.tangent[1], -e.tangent[0]];
            match e.tag {
                BoundaryTag::Top => assert_eq!(n, [0.0, 1.0]),
                BoundaryTag::Bottom => assert_eq!(n, [0.0, -1.0]),
                BoundaryTag::Outer => assert_eq!(n, [1.0, 0.0]),
                BoundaryTag::Axis => assert_eq!(n, [-1.0, 0.0]),
                BoundaryTag::Fluid => assert!(n[0] <= 0.0 || n[1] >= 0.0),
            }
        }
    }

    #[test]
    fn whole_model_has_no_expansion() {
        let dec = MacroDecomposition::reference();
        assert!(affine_decompose(Model::Mechanical, &dec, &BoundaryData::default()).is_err());
    }
}
