//! Parameter tuples shared by every stage of the pipeline.
//!
//! The repo-wide ordering is `(t0..t4, D0..D4, k, mu, lambda, alpha)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifier of one entry of a [`ParameterTuple`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamId {
    T0,
    T1,
    T2,
    T3,
    T4,
    D0,
    D1,
    D2,
    D3,
    D4,
    K,
    Mu,
    Lambda,
    Alpha,
}

pub const N_PARAMS: usize = 14;

impl ParamId {
    pub const ALL: [ParamId; N_PARAMS] = [
        ParamId::T0,
        ParamId::T1,
        ParamId::T2,
        ParamId::T3,
        ParamId::T4,
        ParamId::D0,
        ParamId::D1,
        ParamId::D2,
        ParamId::D3,
        ParamId::D4,
        ParamId::K,
        ParamId::Mu,
        ParamId::Lambda,
        ParamId::Alpha,
    ];

    pub const GEOMETRIC: [ParamId; 10] = [
        ParamId::T0,
        ParamId::T1,
        ParamId::T2,
        ParamId::T3,
        ParamId::T4,
        ParamId::D0,
        ParamId::D1,
        ParamId::D2,
        ParamId::D3,
        ParamId::D4,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            ParamId::T0 => "t0",
            ParamId::T1 => "t1",
            ParamId::T2 => "t2",
            ParamId::T3 => "t3",
            ParamId::T4 => "t4",
            ParamId::D0 => "d0",
            ParamId::D1 => "d1",
            ParamId::D2 => "d2",
            ParamId::D3 => "d3",
            ParamId::D4 => "d4",
            ParamId::K => "k",
            ParamId::Mu => "mu",
            ParamId::Lambda => "lambda",
            ParamId::Alpha => "alpha",
        }
    }

    pub fn from_name(name: &str) -> Option<ParamId> {
        let lower = name.trim().to_ascii_lowercase();
        ParamId::ALL.into_iter().find(|p| p.name() == lower)
    }

    pub fn is_geometric(self) -> bool {
        self.index() < 10
    }

    /// Value used whenever the entry is not varied by an experiment.
    pub fn reference_value(self) -> f64 {
        REFERENCE_VALUES[self.index()]
    }
}

const REFERENCE_VALUES: [f64; N_PARAMS] = [
    2.365, 0.6, 0.6, 0.5, 3.2, 14.10, 8.50, 9.2, 9.9, 10.6, 10.0, 2.08e9, 1.39e9, 1e-6,
];

/// Wall thicknesses and diameters of the hearth profile, in metres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricParams {
    pub thickness: [f64; 5],
    pub diameter: [f64; 5],
}

impl GeometricParams {
    pub fn reference() -> Self {
        let v = REFERENCE_VALUES;
        GeometricParams {
            thickness: [v[0], v[1], v[2], v[3], v[4]],
            diameter: [v[5], v[6], v[7], v[8], v[9]],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, &t) in self.thickness.iter().enumerate() {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::DegenerateGeometry(format!("thickness t{i} = {t} must be positive")));
            }
        }
        for (i, &d) in self.diameter.iter().enumerate() {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::DegenerateGeometry(format!("diameter D{i} = {d} must be positive")));
            }
        }
        let r = self.radii();
        for w in r.windows(2) {
            if w[1] - w[0] <= 0.0 {
                return Err(Error::DegenerateGeometry(format!(
                    "radii must increase (D1 < D2 < D3 < D4 < D0), got {r:?}"
                )));
            }
        }
        Ok(())
    }

    /// Radial grid lines `{0, D1/2, D2/2, D3/2, D4/2, D0/2}`.
    ///
    /// Computed as reference radius plus displacement so the reference
    /// tuple reproduces the reference coordinates bit for bit.
    pub fn radii(&self) -> [f64; 6] {
        let reference = REFERENCE_RADII;
        let half = [
            0.0,
            self.diameter[1] / 2.0,
            self.diameter[2] / 2.0,
            self.diameter[3] / 2.0,
            self.diameter[4] / 2.0,
            self.diameter[0] / 2.0,
        ];
        let ref_half = [
            0.0,
            REFERENCE_VALUES[6] / 2.0,
            REFERENCE_VALUES[7] / 2.0,
            REFERENCE_VALUES[8] / 2.0,
            REFERENCE_VALUES[9] / 2.0,
            REFERENCE_VALUES[5] / 2.0,
        ];
        std::array::from_fn(|i| reference[i] + (half[i] - ref_half[i]))
    }

    /// Horizontal grid lines: cumulative wall thicknesses.
    pub fn heights(&self) -> [f64; 6] {
        let mut out = REFERENCE_HEIGHTS;
        let mut shift = 0.0;
        for i in 0..5 {
            shift += self.thickness[i] - REFERENCE_VALUES[i];
            out[i + 1] += shift;
        }
        out
    }
}

pub const REFERENCE_RADII: [f64; 6] = [0.0, 4.25, 4.6, 4.95, 5.3, 7.05];
pub const REFERENCE_HEIGHTS: [f64; 6] = [0.0, 2.365, 2.965, 3.565, 4.065, 7.265];

/// Material constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub conductivity: f64,
    pub mu: f64,
    pub lambda: f64,
    pub alpha: f64,
}

impl PhysicalParams {
    pub fn reference() -> Self {
        PhysicalParams {
            conductivity: REFERENCE_VALUES[10],
            mu: REFERENCE_VALUES[11],
            lambda: REFERENCE_VALUES[12],
            alpha: REFERENCE_VALUES[13],
        }
    }

    pub fn from_young(conductivity: f64, young: f64, poisson: f64, alpha: f64) -> Result<Self> {
        let (mu, lambda) = lame_from_young(young, poisson)?;
        Ok(PhysicalParams { conductivity, mu, lambda, alpha })
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("k", self.conductivity),
            ("mu", self.mu),
            ("lambda", self.lambda),
            ("alpha", self.alpha),
        ];
        for (name, v) in checks {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        Ok(())
    }

    pub fn young(&self) -> f64 {
        young_from_lame(self.mu, self.lambda).0
    }

    pub fn poisson(&self) -> f64 {
        young_from_lame(self.mu, self.lambda).1
    }

    /// Coefficient `(2 mu + 3 lambda) alpha` of the thermal stress.
    pub fn thermal_modulus(&self) -> f64 {
        (2.0 * self.mu + 3.0 * self.lambda) * self.alpha
    }
}

/// Lamé parameters `(mu, lambda)` from Young's modulus and Poisson's ratio.
pub fn lame_from_young(young: f64, poisson: f64) -> Result<(f64, f64)> {
    if !(young > 0.0 && young.is_finite()) {
        return Err(Error::InvalidParameter(format!("Young's modulus {young} must be positive")));
    }
    if !(0.0..0.5).contains(&poisson) {
        return Err(Error::InvalidParameter(format!(
            "Poisson's ratio {poisson} must lie in [0, 0.5)"
        )));
    }
    let mu = young / (2.0 * (1.0 + poisson));
    let lambda = young * poisson / ((1.0 - 2.0 * poisson) * (1.0 + poisson));
    Ok((mu, lambda))
}

/// Inverse of [`lame_from_young`].
pub fn young_from_lame(mu: f64, lambda: f64) -> (f64, f64) {
    let young = mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu);
    let poisson = lambda / (2.0 * (lambda + mu));
    (young, poisson)
}

/// The subset of parameters varied by an experiment, kept in canonical order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActiveSet(Vec<ParamId>);

impl ActiveSet {
    pub fn new(ids: impl IntoIterator<Item = ParamId>) -> Self {
        let mut v: Vec<ParamId> = ids.into_iter().collect();
        v.sort();
        v.dedup();
        ActiveSet(v)
    }

    pub fn ids(&self) -> &[ParamId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: ParamId) -> bool {
        self.0.contains(&id)
    }

    pub fn has_geometry(&self) -> bool {
        self.0.iter().any(|p| p.is_geometric())
    }
}

/// A full parameter vector together with the mask of entries an experiment varies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterTuple {
    values: [f64; N_PARAMS],
    active: ActiveSet,
}

impl ParameterTuple {
    pub fn reference(active: ActiveSet) -> Self {
        ParameterTuple { values: REFERENCE_VALUES, active }
    }

    /// Builds a tuple from the values of the active entries, in canonical order.
    pub fn from_active_values(active: ActiveSet, values: &[f64]) -> Result<Self> {
        if values.len() != active.len() {
            return Err(Error::DimensionMismatch { expected: active.len(), found: values.len() });
        }
        let mut t = ParameterTuple::reference(active);
        for (i, &id) in t.active.0.clone().iter().enumerate() {
            t.values[id.index()] = values[i];
        }
        Ok(t)
    }

    pub fn get(&self, id: ParamId) -> f64 {
        self.values[id.index()]
    }

    /// Sets an active entry; inactive entries stay pinned to their reference value.
    pub fn set(&mut self, id: ParamId, value: f64) -> Result<()> {
        if !self.active.contains(id) {
            return Err(Error::InvalidParameter(format!(
                "{} is not active in this experiment",
                id.name()
            )));
        }
        self.values[id.index()] = value;
        Ok(())
    }

    pub fn values(&self) -> &[f64; N_PARAMS] {
        &self.values
    }

    pub fn active(&self) -> &ActiveSet {
        &self.active
    }

    pub fn active_values(&self) -> Vec<f64> {
        self.active.ids().iter().map(|&id| self.get(id)).collect()
    }

    pub fn geometric(&self) -> GeometricParams {
        let v = &self.values;
        GeometricParams {
            thickness: [v[0], v[1], v[2], v[3], v[4]],
            diameter: [v[5], v[6], v[7], v[8], v[9]],
        }
    }

    pub fn physical(&self) -> PhysicalParams {
        PhysicalParams {
            conductivity: self.values[10],
            mu: self.values[11],
            lambda: self.values[12],
            alpha: self.values[13],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lame_conversion_matches_hand_values() {
        let (mu, lambda) = lame_from_young(2.6, 0.3).unwrap();
        assert!((mu - 1.0).abs() < 1e-14);
        assert!((lambda - 1.5).abs() < 1e-14);

        let (mu, lambda) = lame_from_young(5e9, 0.2).unwrap();
        assert!((mu / 1e9 - 2.0833333333).abs() < 1e-9);
        assert!((lambda / 1e9 - 1.3888888889).abs() < 1e-9);
        assert_eq!(format!("{:.2e}", mu), "2.08e9");
        assert_eq!(format!("{:.2e}", lambda), "1.39e9");

        let (mu, lambda) = lame_from_young(4.0, 0.0).unwrap();
        assert_eq!(lambda, 0.0);
        assert_eq!(mu, 2.0);
    }

    #[test]
    fn incompressible_limit_is_rejected() {
        assert!(lame_from_young(1.0, 0.5).is_err());
        assert!(lame_from_young(1.0, -0.1).is_err());
        assert!(lame_from_young(0.0, 0.2).is_err());
    }

    #[test]
    fn young_round_trip() {
        let (mu, lambda) = lame_from_young(5e9, 0.2).unwrap();
        let (e, nu) = young_from_lame(mu, lambda);
        assert!((e - 5e9).abs() < 1e-3);
        assert!((nu - 0.2).abs() < 1e-14);
    }

    #[test]
    fn reference_grid_lines() {
        let g = GeometricParams::reference();
        assert_eq!(g.radii(), REFERENCE_RADII);
        assert_eq!(g.heights(), REFERENCE_HEIGHTS);
        let top: f64 = g.thickness.iter().sum();
        assert!((top - 7.265).abs() < 1e-12);
    }

    #[test]
    fn unordered_diameters_are_degenerate() {
        let mut g = GeometricParams::reference();
        g.diameter[2] = 8.4;
        assert!(matches!(g.validate(), Err(Error::DegenerateGeometry(_))));
        let mut g = GeometricParams::reference();
        g.thickness[3] = 0.0;
        assert!(g.validate().is_err());
    }

    #[test]
    fn inactive_entries_stay_pinned() {
        let active = ActiveSet::new([ParamId::K, ParamId::T0]);
        let mut t = ParameterTuple::from_active_values(active, &[2.31, 9.9]).unwrap();
        assert_eq!(t.get(ParamId::T0), 2.31);
        assert_eq!(t.get(ParamId::K), 9.9);
        assert_eq!(t.get(ParamId::D3), 9.9);
        assert!(t.set(ParamId::Mu, 1.0).is_err());
        assert_eq!(t.active_values(), vec![2.31, 9.9]);
    }

    #[test]
    fn names_round_trip() {
        for id in ParamId::ALL {
            assert_eq!(ParamId::from_name(id.name()), Some(id));
        }
        assert_eq!(ParamId::from_name("D0"), Some(ParamId::D0));
        assert_eq!(ParamId::from_name("nope"), None);
    }
}
