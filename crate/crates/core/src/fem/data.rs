use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryTag, Point};

/// Where a coefficient is evaluated: the point and, on boundary edges, the outward unit normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Site {
    pub point: Point,
    pub normal: Option<[f64; 2]>,
}

impl Site {
    pub fn interior(point: Point) -> Self {
        Site { point, normal: None }
    }

    pub fn normal(&self) -> [f64; 2] {
        self.normal.expect("boundary data evaluated away from a boundary")
    }
}

type ScalarFn = Arc<dyn Fn(&Site) -> f64 + Send + Sync>;
type VectorFn = Arc<dyn Fn(&Site) -> [f64; 2] + Send + Sync>;

/// A scalar coefficient: constant, or a function of position and normal.
#[derive(Clone)]
pub enum ScalarData {
    Const(f64),
    Function(ScalarFn),
}

impl ScalarData {
    pub fn function(f: impl Fn(&Site) -> f64 + Send + Sync + 'static) -> Self {
        ScalarData::Function(Arc::new(f))
    }

    pub fn eval(&self, site: &Site) -> f64 {
        match self {
            ScalarData::Const(v) => *v,
            ScalarData::Function(f) => f(site),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ScalarData::Const(v) if *v == 0.0)
    }
}

impl fmt::Debug for ScalarData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarData::Const(v) => write!(f, "Const({v})"),
            ScalarData::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl From<f64> for ScalarData {
    fn from(v: f64) -> Self {
        ScalarData::Const(v)
    }
}

/// A 2-vector coefficient `(r, y)`.
#[derive(Clone)]
pub enum VectorData {
    Const([f64; 2]),
    Function(VectorFn),
}

impl VectorData {
    pub const ZERO: VectorData = VectorData::Const([0.0, 0.0]);

    pub fn function(f: impl Fn(&Site) -> [f64; 2] + Send + Sync + 'static) -> Self {
        VectorData::Function(Arc::new(f))
    }

    /// Normal pressure `-p(x) n`.
    pub fn pressure(p: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        VectorData::function(move |s| {
            let n = s.normal();
            let v = p(s.point);
            [-v * n[0], -v * n[1]]
        })
    }

    pub fn eval(&self, site: &Site) -> [f64; 2] {
        match self {
            VectorData::Const(v) => *v,
            VectorData::Function(f) => f(site),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, VectorData::Const(v) if *v == [0.0, 0.0])
    }
}

impl fmt::Debug for VectorData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorData::Const(v) => write!(f, "Const({v:?})"),
            VectorData::Function(_) => write!(f, "Function(..)"),
        }
    }
}

impl From<[f64; 2]> for VectorData {
    fn from(v: [f64; 2]) -> Self {
        VectorData::Const(v)
    }
}

/// Heat conduction coefficients and loads.
///
/// Robin exchange acts on the fluid face, the outer shell and the bottom; the
/// top carries the prescribed flux `q_top` (positive leaving the solid) and the
/// axis is a symmetry line.
#[derive(Clone, Debug)]
pub struct ThermalData {
    pub conductivity: ScalarData,
    pub h_fluid: ScalarData,
    pub h_outer: ScalarData,
    pub h_bottom: ScalarData,
    pub t_fluid: ScalarData,
    pub t_outer: ScalarData,
    pub t_bottom: ScalarData,
    pub q_top: ScalarData,
    pub source: ScalarData,
}

impl ThermalData {
    /// Robin coefficient and exterior temperature of a tag, if it has a Robin condition.
    pub fn robin(&self, tag: BoundaryTag) -> Option<(&ScalarData, &ScalarData)> {
        match tag {
            BoundaryTag::Fluid => Some((&self.h_fluid, &self.t_fluid)),
            BoundaryTag::Outer => Some((&self.h_outer, &self.t_outer)),
            BoundaryTag::Bottom => Some((&self.h_bottom, &self.t_bottom)),
            BoundaryTag::Top | BoundaryTag::Axis => None,
        }
    }
}

/// Elastic constants, reference temperature and mechanical loads.
#[derive(Clone, Debug)]
pub struct MechanicalData {
    pub mu: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub t_ref: f64,
    pub body_force: VectorData,
    pub traction_top: VectorData,
    pub traction_bottom: VectorData,
    pub traction_fluid: VectorData,
    pub traction_outer: VectorData,
}

impl MechanicalData {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mu", self.mu), ("lambda", self.lambda), ("alpha", self.alpha)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidData(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn traction(&self, tag: BoundaryTag) -> Option<&VectorData> {
        match tag {
            BoundaryTag::Top => Some(&self.traction_top),
            BoundaryTag::Bottom => Some(&self.traction_bottom),
            BoundaryTag::Fluid => Some(&self.traction_fluid),
            BoundaryTag::Outer => Some(&self.traction_outer),
            BoundaryTag::Axis => None,
        }
    }

    /// `(2 mu + 3 lambda) alpha`.
    pub fn thermal_modulus(&self) -> f64 {
        (2.0 * self.mu + 3.0 * self.lambda) * self.alpha
    }

    /// The 4x4 matrix relating `(ε_rr, ε_yy, ε_θθ, 2ε_ry)` to `(σ_rr, σ_yy, σ_θθ, σ_ry)`.
    pub fn elasticity(&self) -> [[f64; 4]; 4] {
        elasticity_matrix(self.mu, self.lambda)
    }
}

pub fn elasticity_matrix(mu: f64, lambda: f64) -> [[f64; 4]; 4] {
    let d = lambda + 2.0 * mu;
    [
        [d, lambda, lambda, 0.0],
        [lambda, d, lambda, 0.0],
        [lambda, lambda, d, 0.0],
        [0.0, 0.0, 0.0, mu],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::lame_from_young;

    #[test]
    fn elasticity_matches_young_form() {
        let (e, nu) = (5e9, 0.2);
        let (mu, lambda) = lame_from_young(e, nu).unwrap();
        let a = elasticity_matrix(mu, lambda);
        let f = e / ((1.0 - 2.0 * nu) * (1.0 + nu));
        let expect = [
            [1.0 - nu, nu, nu, 0.0],
            [nu, 1.0 - nu, nu, 0.0],
            [nu, nu, 1.0 - nu, 0.0],
            [0.0, 0.0, 0.0, (1.0 - 2.0 * nu) / 2.0],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((a[i][j] - f * expect[i][j]).abs() < 1e-6 * f);
            }
        }
    }

    #[test]
    fn pressure_points_into_the_solid() {
        let g = VectorData::pressure(|_| 2.0);
        let s = Site { point: Point::new(1.0, 1.0), normal: Some([0.0, 1.0]) };
        assert_eq!(g.eval(&s), [0.0, -2.0]);
    }
}
