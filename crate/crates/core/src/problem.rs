//! The parametrized hearth problem: fixed boundary data on a reference mesh,
//! with geometry and materials taken from a parameter tuple.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{
    assemble_thermal, solve_split, Field, MechanicalData, ScalarData, SplitDisplacement, ThermalData, VectorData,
};
use crate::geometry::{AffineMapSet, MacroDecomposition, Mesh, ParameterTuple, PhysicalParams};
use crate::linalg::SolverKind;

/// Constant boundary and load data of the industrial configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundaryData {
    pub fluid_temperature: f64,
    pub outer_temperature: f64,
    pub bottom_temperature: f64,
    pub fluid_transfer: f64,
    pub outer_transfer: f64,
    pub bottom_transfer: f64,
    /// Prescribed flux on the top face, positive into the wall.
    pub top_flux: f64,
    pub heat_source: f64,
    /// Stress-free temperature.
    pub reference_temperature: f64,
    pub body_force: [f64; 2],
    pub top_traction: [f64; 2],
    pub bottom_traction: [f64; 2],
    pub outer_traction: [f64; 2],
    /// Density of the liquid metal; the fluid face carries `ρ g (y_top - y)`.
    pub fluid_density: f64,
    pub gravity: f64,
}

impl Default for BoundaryData {
    fn default() -> Self {
        BoundaryData {
            fluid_temperature: 1773.0,
            outer_temperature: 313.0,
            bottom_temperature: 313.0,
            fluid_transfer: 200.0,
            outer_transfer: 2000.0,
            bottom_transfer: 2000.0,
            top_flux: 0.0,
            heat_source: 0.0,
            reference_temperature: 298.0,
            body_force: [0.0, 0.0],
            top_traction: [0.0, 0.0],
            bottom_traction: [0.0, 0.0],
            outer_traction: [0.0, 0.0],
            fluid_density: 7460.0,
            gravity: 9.81,
        }
    }
}

impl BoundaryData {
    pub fn validate(&self) -> Result<()> {
        let scalars = [
            ("fluid_temperature", self.fluid_temperature),
            ("outer_temperature", self.outer_temperature),
            ("bottom_temperature", self.bottom_temperature),
            ("top_flux", self.top_flux),
            ("heat_source", self.heat_source),
            ("reference_temperature", self.reference_temperature),
            ("fluid_density", self.fluid_density),
            ("gravity", self.gravity),
        ];
        for (name, v) in scalars {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} = {v} is not finite")));
            }
        }
        for (name, h) in [
            ("fluid_transfer", self.fluid_transfer),
            ("outer_transfer", self.outer_transfer),
            ("bottom_transfer", self.bottom_transfer),
        ] {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::Config(format!("{name} = {h} must be positive")));
            }
        }
        for (name, v) in [
            ("body_force", self.body_force),
            ("top_traction", self.top_traction),
            ("bottom_traction", self.bottom_traction),
            ("outer_traction", self.outer_traction),
        ] {
            if !v.iter().all(|x| x.is_finite()) {
                return Err(Error::Config(format!("{name} = {v:?} is not finite")));
            }
        }
        Ok(())
    }

    /// `ρ g`, the pressure gradient of the fluid column.
    pub fn pressure_gradient(&self) -> f64 {
        self.fluid_density * self.gravity
    }

    pub fn thermal_data(&self, phys: &PhysicalParams) -> ThermalData {
        ThermalData {
            conductivity: phys.conductivity.into(),
            h_fluid: self.fluid_transfer.into(),
            h_outer: self.outer_transfer.into(),
            h_bottom: self.bottom_transfer.into(),
            t_fluid: self.fluid_temperature.into(),
            t_outer: self.outer_temperature.into(),
            t_bottom: self.bottom_temperature.into(),
            q_top: ScalarData::Const(self.top_flux),
            source: self.heat_source.into(),
        }
    }

    /// Mechanical data for a wall whose top face sits at height `top`.
    pub fn mechanical_data(&self, phys: &PhysicalParams, top: f64) -> MechanicalData {
        let rho_g = self.pressure_gradient();
        let traction_fluid =
            if rho_g == 0.0 { VectorData::ZERO } else { VectorData::pressure(move |p| rho_g * (top - p.y)) };
        MechanicalData {
            mu: phys.mu,
            lambda: phys.lambda,
            alpha: phys.alpha,
            t_ref: self.reference_temperature,
            body_force: self.body_force.into(),
            traction_top: self.top_traction.into(),
            traction_bottom: self.bottom_traction.into(),
            traction_fluid,
            traction_outer: self.outer_traction.into(),
        }
    }
}

/// Reference mesh plus data: everything needed for a full-order solve at a tuple.
#[derive(Clone, Debug)]
pub struct Problem {
    pub decomposition: MacroDecomposition,
    pub reference: Mesh,
    pub data: BoundaryData,
    pub solver: SolverKind,
}

impl Problem {
    pub fn new(level: u32, degree: usize, data: BoundaryData) -> Result<Self> {
        data.validate()?;
        let decomposition = MacroDecomposition::reference();
        let reference = Mesh::refine(&decomposition, level, degree)?;
        Ok(Problem { decomposition, reference, data, solver: SolverKind::Auto })
    }

    /// The mesh of the tuple's geometry; node numbering is that of the reference mesh.
    pub fn mesh_at(&self, tuple: &ParameterTuple) -> Result<Cow<'_, Mesh>> {
        if !tuple.active().has_geometry() {
            return Ok(Cow::Borrowed(&self.reference));
        }
        let g = tuple.geometric();
        g.validate()?;
        let maps = AffineMapSet::new(&self.decomposition, &g)?;
        Ok(Cow::Owned(self.reference.map(&maps)?))
    }

    /// Height of the top face at the tuple.
    pub fn top(tuple: &ParameterTuple) -> f64 {
        tuple.geometric().heights()[5]
    }

    pub fn thermal_data(&self, tuple: &ParameterTuple) -> ThermalData {
        self.data.thermal_data(&tuple.physical())
    }

    pub fn mechanical_data(&self, tuple: &ParameterTuple) -> MechanicalData {
        self.data.mechanical_data(&tuple.physical(), Self::top(tuple))
    }

    pub fn temperature(&self, tuple: &ParameterTuple) -> Result<Field> {
        tuple.physical().validate()?;
        let mesh = self.mesh_at(tuple)?;
        assemble_thermal(&mesh, &self.thermal_data(tuple))?.solve(self.solver)
    }

    /// Displacement split into load and thermal-stress parts, driven by `temperature`.
    pub fn displacement(&self, tuple: &ParameterTuple, temperature: &Field) -> Result<SplitDisplacement> {
        tuple.physical().validate()?;
        let mesh = self.mesh_at(tuple)?;
        solve_split(&mesh, &self.mechanical_data(tuple), temperature, self.solver)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ActiveSet, ParamId};

    #[test]
    fn inactive_geometry_borrows_the_reference_mesh() {
        let p = Problem::new(0, 1, BoundaryData::default()).unwrap();
        let t = ParameterTuple::reference(ActiveSet::new([ParamId::K]));
        assert!(matches!(p.mesh_at(&t).unwrap(), Cow::Borrowed(_)));
        let g = ParameterTuple::reference(ActiveSet::new([ParamId::D0]));
        assert_eq!(p.mesh_at(&g).unwrap().nodes, p.reference.nodes);
        assert_eq!(Problem::top(&g), 7.265);
    }

    #[test]
    fn temperatures_lie_between_the_exterior_values() {
        let p = Problem::new(1, 1, BoundaryData::default()).unwrap();
        let t = p.temperature(&ParameterTuple::reference(ActiveSet::new([ParamId::K]))).unwrap();
        let (lo, hi) = t.values.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        // Coarse P1 meshes are not acute, so the discrete maximum principle only holds approximately.
        assert!(lo > 313.0 - 5.0 && hi < 1773.0 + 5.0, "{lo} {hi}");
        assert!(hi - lo > 1000.0);
    }

    #[test]
    fn bad_transfer_coefficient_is_a_config_error() {
        let data = BoundaryData { fluid_transfer: 0.0, ..BoundaryData::default() };
        assert!(matches!(Problem::new(0, 1, data), Err(Error::Config(_))));
    }
}
