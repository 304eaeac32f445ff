use serde::{Deserialize, Serialize};

use super::data::{MechanicalData, ThermalData};
use super::mechanical::{external_load, stiffness, thermal_load};
use super::space::{Field, FunctionSpace, Rank};
use super::thermal::assemble_thermal;
use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::linalg::{SolverKind, SpdSolver};

/// The four full-order problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    /// Temperature.
    #[serde(rename = "WT")]
    Thermal,
    /// Displacement under all loads.
    #[serde(rename = "WM")]
    Mechanical,
    /// Displacement under body force and tractions only.
    #[serde(rename = "WM1")]
    MechanicalLoads,
    /// Displacement under the thermal stress only.
    #[serde(rename = "WM2")]
    ThermalStress,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Thermal, Model::Mechanical, Model::MechanicalLoads, Model::ThermalStress];

    pub fn tag(self) -> &'static str {
        match self {
            Model::Thermal => "WT",
            Model::Mechanical => "WM",
            Model::MechanicalLoads => "WM1",
            Model::ThermalStress => "WM2",
        }
    }

    pub fn from_tag(s: &str) -> Option<Model> {
        Model::ALL.into_iter().find(|m| m.tag().eq_ignore_ascii_case(s))
    }

    pub fn rank(self) -> Rank {
        match self {
            Model::Thermal => Rank::Scalar,
            _ => Rank::Vector,
        }
    }

    pub fn needs_temperature(self) -> bool {
        matches!(self, Model::Mechanical | Model::ThermalStress)
    }
}

pub fn solve_thermal(mesh: &Mesh, data: &ThermalData, kind: SolverKind) -> Result<Field> {
    assemble_thermal(mesh, data)?.solve(kind)
}

/// Mechanical displacement split as `u = u_loads + u_thermal`, sharing one factorization.
#[derive(Clone, Debug)]
pub struct SplitDisplacement {
    pub loads: Field,
    pub thermal: Field,
}

impl SplitDisplacement {
    pub fn total(&self) -> Field {
        self.loads.add(&self.thermal)
    }
}

pub fn solve_split(mesh: &Mesh, data: &MechanicalData, temperature: &Field, kind: SolverKind) -> Result<SplitDisplacement> {
    data.validate()?;
    let space = FunctionSpace::displacement(mesh);
    let a = stiffness(mesh, data.mu, data.lambda)?.restrict(space.free_dofs());
    let solver = SpdSolver::new(&a, kind)?;
    let loads = solver.solve(&space.restrict(&external_load(mesh, data)?))?;
    let thermal = solver.solve(&space.restrict(&thermal_load(mesh, data, temperature)?))?;
    Ok(SplitDisplacement { loads: Field::vector(space.expand(&loads)), thermal: Field::vector(space.expand(&thermal)) })
}

/// Solves one of the four problems; the mechanical ones with a thermal load need `temperature`.
pub fn solve(
    model: Model,
    mesh: &Mesh,
    thermal: &ThermalData,
    mechanical: &MechanicalData,
    temperature: Option<&Field>,
    kind: SolverKind,
) -> Result<Field> {
    let owned;
    let t = match (model.needs_temperature(), temperature) {
        (true, Some(t)) => Some(t),
        (true, None) => {
            owned = solve_thermal(mesh, thermal, kind)?;
            Some(&owned)
        }
        _ => None,
    };
    match model {
        Model::Thermal => solve_thermal(mesh, thermal, kind),
        Model::MechanicalLoads => super::mechanical::assemble_mechanical(mesh, mechanical, None)?.solve(kind),
        Model::Mechanical => {
            super::mechanical::assemble_mechanical(mesh, mechanical, t)?.solve(kind)
        }
        Model::ThermalStress => {
            let t = t.ok_or_else(|| Error::InvalidData("thermal stress needs a temperature".into()))?;
            let space = FunctionSpace::displacement(mesh);
            let a = stiffness(mesh, mechanical.mu, mechanical.lambda)?.restrict(space.free_dofs());
            let b = space.restrict(&thermal_load(mesh, mechanical, t)?);
            Ok(Field::vector(space.expand(&SpdSolver::new(&a, kind)?.solve(&b)?)))
        }
    }
}
