//! Reduced models and their online solves.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::affine::{affine_decompose, GeometryContext, ModelForms};
use super::reduce::{HoopTable, ReducedForm, Reducer};
use crate::error::{Error, Result};
use crate::fem::{assemble_thermal, external_load, stiffness, thermal_load, Field, Model, Rank};
use crate::geometry::{MacroDecomposition, Mesh, ParameterTuple, PhysicalParams};
use crate::linalg::CsrMatrix;
use crate::pod::ReducedBasis;
use crate::problem::Problem;
use crate::sampling::ParameterRanges;

/// Reduced operators of one model on one basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedModel {
    pub model: Model,
    pub basis: ReducedBasis,
    pub matrix: ReducedForm,
    /// Right-hand sides: one for `WT` and `WM1`; for `WM2` the coupling against
    /// the constant field followed by one per thermal mode.
    pub rhs: Vec<ReducedForm>,
    pub hoop: Option<HoopTable>,
}

impl ReducedModel {
    pub fn n(&self) -> usize {
        self.basis.len()
    }

    pub fn needs_geometry(&self) -> bool {
        self.hoop.is_some() || self.matrix.terms.iter().chain(self.rhs.iter().flat_map(|r| &r.terms)).any(|t| !t.geom.is_constant())
    }

    /// The reduced matrix at a tuple.
    pub fn matrix_at(&self, phys: &PhysicalParams, ctx: Option<&GeometryContext>) -> DMatrix<f64> {
        let n = self.n();
        let mut a = self.matrix.evaluate(&self.matrix.coefficients(phys, ctx));
        if let Some(h) = &self.hoop {
            let ctx = ctx.expect("hoop term needs a geometry");
            let s = h.phys.eval(phys);
            for (x, v) in a.iter_mut().zip(h.matrix(ctx)) {
                *x += s * v;
            }
        }
        DMatrix::from_row_slice(n, n, &a)
    }

    /// The model on the leading `n` modes (and, for `WM2`, the leading `n_thermal` thermal modes).
    ///
    /// Bases are nested, so this is the leading block of every reduced operator.
    pub fn truncated(&self, n: usize, n_thermal: usize) -> ReducedModel {
        let old = self.n();
        let n = n.min(old);
        let block = |f: &ReducedForm, square: bool| ReducedForm {
            terms: f.terms.clone(),
            ops: f
                .ops
                .iter()
                .map(|op| if square { (0..n).flat_map(|i| op[i * old..i * old + n].to_vec()).collect() } else { op[..n].to_vec() })
                .collect(),
        };
        let n_rhs = if self.model == Model::ThermalStress { (1 + n_thermal).min(self.rhs.len()) } else { self.rhs.len() };
        let hoop = self.hoop.as_ref().map(|h| HoopTable {
            n,
            values: h.values.chunks(old).flat_map(|v| v[..n].to_vec()).collect(),
            ..h.clone()
        });
        ReducedModel {
            model: self.model,
            basis: self.basis.truncated(n),
            matrix: block(&self.matrix, true),
            rhs: self.rhs[..n_rhs].iter().map(|f| block(f, false)).collect(),
            hoop,
        }
    }

    /// Right-hand side number `i` at a tuple.
    pub fn rhs_at(&self, i: usize, phys: &PhysicalParams, ctx: Option<&GeometryContext>) -> DVector<f64> {
        let f = &self.rhs[i];
        DVector::from_vec(f.evaluate(&f.coefficients(phys, ctx)))
    }
}

/// Operators of `forms` reduced onto `basis`; the thermal basis supplies the `WM2` coupling sources.
///
/// With `freeze`, the geometry is fixed at that context and the terms are collapsed first.
pub fn reduce_operators(
    forms: &ModelForms,
    decomposition: &MacroDecomposition,
    mesh: &Mesh,
    basis: &ReducedBasis,
    thermal_basis: Option<&ReducedBasis>,
    freeze: Option<&GeometryContext>,
) -> Result<ReducedModel> {
    let rank = forms.model.rank();
    let reducer = Reducer::new(decomposition, mesh, rank.components(), &basis.modes)?;
    let (matrix_form, rhs_form) = match freeze {
        Some(ctx) => (forms.matrix.collapse(ctx), forms.rhs.collapse(ctx)),
        None => (forms.matrix.clone(), forms.rhs.clone()),
    };
    let matrix = reducer.reduce(&matrix_form, None)?;
    let rhs = if forms.model == Model::ThermalStress {
        let tb = thermal_basis
            .ok_or_else(|| Error::InvalidData("WM2 reduction needs the thermal basis".into()))?;
        if tb.dim() != mesh.n_nodes() {
            return Err(Error::DimensionMismatch { expected: mesh.n_nodes(), found: tb.dim() });
        }
        let ones = vec![1.0; mesh.n_nodes()];
        std::iter::once(&ones)
            .chain(&tb.modes)
            .map(|src| reducer.reduce(&rhs_form, Some(src)))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![reducer.reduce(&rhs_form, None)?]
    };
    let hoop = match (matrix_form.hoop, freeze) {
        (Some(phys), None) => Some(reducer.hoop_table(phys)?),
        _ => None,
    };
    Ok(ReducedModel { model: forms.model, basis: basis.clone(), matrix, rhs, hoop })
}

/// How the reduced system is obtained online.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OnlineMode {
    /// Sum the precomputed reduced terms.
    Affine,
    /// Assemble the full-order operators at the tuple and project them.
    Direct,
}

/// Reduced coordinates of one online query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalerkinSolution {
    pub thermal: Vec<f64>,
    pub loads: Option<Vec<f64>>,
    pub thermal_stress: Option<Vec<f64>>,
    pub warnings: Vec<String>,
}

/// The thermal model and, optionally, the two mechanical models of the split.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GalerkinRom {
    pub ranges: ParameterRanges,
    pub reference_temperature: f64,
    pub thermal: ReducedModel,
    pub loads: Option<ReducedModel>,
    pub thermal_stress: Option<ReducedModel>,
}

/// Bases handed to offline reduction.
pub struct GalerkinBases<'a> {
    pub thermal: &'a ReducedBasis,
    pub loads: Option<&'a ReducedBasis>,
    pub thermal_stress: Option<&'a ReducedBasis>,
}

impl GalerkinRom {
    /// Decomposes and reduces every model with a basis.
    pub fn build(problem: &Problem, ranges: ParameterRanges, bases: GalerkinBases<'_>) -> Result<Self> {
        let dec = &problem.decomposition;
        let frozen = (!ranges.active().has_geometry()).then(|| GeometryContext::reference(dec));
        let freeze = frozen.as_ref();
        let reduce = |model: Model, basis: &ReducedBasis| -> Result<ReducedModel> {
            let forms = affine_decompose(model, dec, &problem.data)?;
            reduce_operators(&forms, dec, &problem.reference, basis, Some(bases.thermal), freeze)
        };
        let thermal = reduce(Model::Thermal, bases.thermal)?;
        let loads = bases.loads.map(|b| reduce(Model::MechanicalLoads, b)).transpose()?;
        let thermal_stress = bases.thermal_stress.map(|b| reduce(Model::ThermalStress, b)).transpose()?;
        Ok(GalerkinRom {
            ranges,
            reference_temperature: problem.data.reference_temperature,
            thermal,
            loads,
            thermal_stress,
        })
    }

    /// Thermal model on `n_thermal` modes and mechanical models on `n_mechanical` modes.
    pub fn truncated(&self, n_thermal: usize, n_mechanical: usize) -> GalerkinRom {
        let nt = n_thermal.min(self.thermal.n());
        GalerkinRom {
            ranges: self.ranges.clone(),
            reference_temperature: self.reference_temperature,
            thermal: self.thermal.truncated(nt, nt),
            loads: self.loads.as_ref().map(|m| m.truncated(n_mechanical, nt)),
            thermal_stress: self.thermal_stress.as_ref().map(|m| m.truncated(n_mechanical, nt)),
        }
    }

    fn models(&self) -> impl Iterator<Item = &ReducedModel> {
        std::iter::once(&self.thermal).chain(&self.loads).chain(&self.thermal_stress)
    }

    pub fn needs_geometry(&self) -> bool {
        self.models().any(ReducedModel::needs_geometry)
    }

    fn warnings(&self, tuple: &ParameterTuple) -> Result<Vec<String>> {
        if tuple.active() != self.ranges.active() {
            return Err(Error::InvalidParameter("tuple activates different parameters than the reduced model".into()));
        }
        Ok(if self.ranges.contains(tuple) {
            Vec::new()
        } else {
            vec![format!("tuple {:?} lies outside the trained ranges", tuple.active_values())]
        })
    }

    /// Affine-mode online solve: θ evaluation, reduced sums and dense Cholesky solves.
    pub fn solve(&self, decomposition: &MacroDecomposition, tuple: &ParameterTuple) -> Result<GalerkinSolution> {
        let warnings = self.warnings(tuple)?;
        let phys = tuple.physical();
        phys.validate()?;
        let ctx = if self.needs_geometry() { Some(GeometryContext::new(decomposition, &tuple.geometric())?) } else { None };
        let ctx = ctx.as_ref();
        let m = &self.thermal;
        let thermal = spd_solve(m.matrix_at(&phys, ctx), m.rhs_at(0, &phys, ctx))?;
        let loads = match &self.loads {
            Some(m) => Some(spd_solve(m.matrix_at(&phys, ctx), m.rhs_at(0, &phys, ctx))?),
            None => None,
        };
        let thermal_stress = match &self.thermal_stress {
            Some(m) => {
                let coef = m.rhs[0].coefficients(&phys, ctx);
                let mut b = DVector::from_vec(m.rhs[0].evaluate(&coef)) * -self.reference_temperature;
                for (f, z) in m.rhs[1..].iter().zip(&thermal) {
                    b += DVector::from_vec(f.evaluate(&coef)) * *z;
                }
                Some(spd_solve(m.matrix_at(&phys, ctx), b)?)
            }
            None => None,
        };
        Ok(GalerkinSolution { thermal, loads, thermal_stress, warnings })
    }

    /// Direct-mode online solve: full-order assembly at the tuple, projected onto the bases.
    pub fn solve_direct(&self, problem: &Problem, tuple: &ParameterTuple) -> Result<GalerkinSolution> {
        let warnings = self.warnings(tuple)?;
        let mesh = problem.mesh_at(tuple)?;
        let sys = assemble_thermal(&mesh, &problem.thermal_data(tuple))?;
        let tb = &self.thermal.basis;
        let thermal = spd_solve(project_matrix(&sys.matrix, tb), project_vector(&sys.rhs, tb))?;
        let needs_mech = self.loads.is_some() || self.thermal_stress.is_some();
        let data = problem.mechanical_data(tuple);
        let k = if needs_mech { Some(stiffness(&mesh, data.mu, data.lambda)?) } else { None };
        let loads = match &self.loads {
            Some(m) => {
                let k = k.as_ref().expect("stiffness assembled");
                Some(spd_solve(project_matrix(k, &m.basis), project_vector(&external_load(&mesh, &data)?, &m.basis))?)
            }
            None => None,
        };
        let thermal_stress = match &self.thermal_stress {
            Some(m) => {
                let k = k.as_ref().expect("stiffness assembled");
                let t = Field::scalar(tb.reconstruct(&thermal));
                let b = thermal_load(&mesh, &data, &t)?;
                Some(spd_solve(project_matrix(k, &m.basis), project_vector(&b, &m.basis))?)
            }
            None => None,
        };
        Ok(GalerkinSolution { thermal, loads, thermal_stress, warnings })
    }

    pub fn temperature(&self, sol: &GalerkinSolution) -> Field {
        Field::scalar(self.thermal.basis.reconstruct(&sol.thermal))
    }

    /// `u = u_loads + u_thermal`; missing parts count as zero.
    pub fn displacement(&self, sol: &GalerkinSolution) -> Option<Field> {
        let parts: Vec<Vec<f64>> = [(&self.loads, &sol.loads), (&self.thermal_stress, &sol.thermal_stress)]
            .into_iter()
            .filter_map(|(m, z)| Some(m.as_ref()?.basis.reconstruct(z.as_ref()?)))
            .collect();
        let first = parts.first()?;
        let mut u = vec![0.0; first.len()];
        for p in &parts {
            for (x, v) in u.iter_mut().zip(p) {
                *x += v;
            }
        }
        Some(Field::new(Rank::Vector, u))
    }
}

/// `Vᵀ A V` for a full-size matrix; modes vanish on constrained dofs.
pub fn project_matrix(a: &CsrMatrix, basis: &ReducedBasis) -> DMatrix<f64> {
    let av: Vec<Vec<f64>> = basis.modes.iter().map(|m| a.mul_vec(m)).collect();
    let n = basis.len();
    DMatrix::from_fn(n, n, |i, j| crate::pod::dot(&basis.modes[i], &av[j]))
}

pub fn project_vector(b: &[f64], basis: &ReducedBasis) -> DVector<f64> {
    DVector::from_iterator(basis.len(), basis.modes.iter().map(|m| crate::pod::dot(m, b)))
}

fn spd_solve(a: DMatrix<f64>, b: DVector<f64>) -> Result<Vec<f64>> {
    let Some(chol) = a.clone().cholesky() else {
        let eig = a.symmetric_eigen();
        let (pivot, value) = eig.eigenvalues.iter().copied().enumerate().fold((0, f64::INFINITY), |best, (i, v)| {
            if v < best.1 {
                (i, v)
            } else {
                best
            }
        });
        return Err(Error::NotPositiveDefinite { pivot, value });
    };
    let x = chol.solve(&b);
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidData("reduced solve produced non-finite values".into()));
    }
    Ok(x.iter().copied().collect())
}
