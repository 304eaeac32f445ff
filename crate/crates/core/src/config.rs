//! Experiment definitions: which parameters vary, how much data is generated and how the ROMs are trained.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ActiveSet, ParamId};
use crate::pod::Truncation;
use crate::problem::BoundaryData;
use crate::rom_ann::TrainConfig;
use crate::sampling::{default_range, ParameterRanges};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Physics {
    Thermal,
    Mechanical,
}

impl Physics {
    pub fn name(self) -> &'static str {
        match self {
            Physics::Thermal => "thermal",
            Physics::Mechanical => "mechanical",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "thermal" => Ok(Physics::Thermal),
            "mechanical" => Ok(Physics::Mechanical),
            other => Err(Error::Config(format!("unknown physics {other:?}"))),
        }
    }

    fn physical(self) -> &'static [ParamId] {
        match self {
            Physics::Thermal => &[ParamId::K],
            Physics::Mechanical => &[ParamId::K, ParamId::Mu, ParamId::Lambda, ParamId::Alpha],
        }
    }
}

/// Experiment families of increasing geometric freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    I,
    Ii,
    Iii,
    Iv,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::I, Preset::Ii, Preset::Iii, Preset::Iv];

    pub fn name(self) -> &'static str {
        match self {
            Preset::I => "i",
            Preset::Ii => "ii",
            Preset::Iii => "iii",
            Preset::Iv => "iv",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Preset::ALL.into_iter().find(|p| p.name() == lower).ok_or_else(|| Error::Config(format!("unknown preset {s:?}")))
    }

    pub fn geometric(self) -> &'static [ParamId] {
        use ParamId::*;
        match self {
            Preset::I => &[],
            Preset::Ii => &[T0, D2, D4],
            Preset::Iii => &[T0, T2, T4, D0, D2, D4],
            Preset::Iv => &ParamId::GEOMETRIC,
        }
    }

    pub fn active(self, physics: Physics) -> ActiveSet {
        ActiveSet::new(physics.physical().iter().chain(self.geometric()).copied())
    }

    /// Default snapshot count for the POD bases.
    pub fn snapshots(self, physics: Physics) -> usize {
        match (physics, self) {
            (Physics::Thermal, Preset::I) => 50,
            _ => 1000,
        }
    }

    /// Default number of network training samples.
    pub fn training_samples(self, physics: Physics) -> usize {
        let table = match physics {
            Physics::Thermal => [100, 500, 2500, 4500],
            Physics::Mechanical => [500, 500, 1000, 2500],
        };
        table[self as usize]
    }

    /// Default hidden-layer width.
    pub fn hidden(self, physics: Physics) -> usize {
        let table = match physics {
            Physics::Thermal => [65, 70, 80, 70],
            Physics::Mechanical => [60, 80, 170, 130],
        };
        table[self as usize]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub snapshots: u64,
    pub training: u64,
    pub split: u64,
    pub network: u64,
    pub test: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds { snapshots: 1, training: 2, split: 3, network: 4, test: 5 }
    }
}

impl Seeds {
    /// Every seed derived from one base value.
    pub fn from_base(base: u64) -> Self {
        let k = base.wrapping_mul(10);
        Seeds { snapshots: k + 1, training: k + 2, split: k + 3, network: k + 4, test: k + 5 }
    }
}

/// A full experiment; unset counts fall back to the preset defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub physics: Physics,
    pub preset: Preset,
    #[serde(default = "default_level")]
    pub level: u32,
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default)]
    pub snapshots: Option<usize>,
    #[serde(default)]
    pub training_samples: Option<usize>,
    #[serde(default)]
    pub hidden: Option<usize>,
    #[serde(default)]
    pub truncation: Truncation,
    #[serde(default = "default_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_test_samples")]
    pub test_samples: usize,
    /// Basis sizes for the error sweep; empty means every size up to the retained one.
    #[serde(default)]
    pub sweep: Vec<usize>,
    /// Overrides of the default parameter box, keyed by parameter name.
    #[serde(default)]
    pub ranges: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    pub seeds: Seeds,
    #[serde(default)]
    pub boundary: BoundaryData,
    #[serde(default)]
    pub training: TrainConfig,
}

fn default_level() -> u32 {
    1
}

fn default_degree() -> usize {
    2
}

fn default_fraction() -> f64 {
    0.7
}

fn default_test_samples() -> usize {
    20
}

impl ExperimentConfig {
    pub fn new(name: impl Into<String>, physics: Physics, preset: Preset) -> Self {
        ExperimentConfig {
            name: name.into(),
            physics,
            preset,
            level: default_level(),
            degree: default_degree(),
            snapshots: None,
            training_samples: None,
            hidden: None,
            truncation: Truncation::default(),
            train_fraction: default_fraction(),
            test_samples: default_test_samples(),
            sweep: Vec::new(),
            ranges: BTreeMap::new(),
            seeds: Seeds::default(),
            boundary: BoundaryData::default(),
            training: TrainConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name.starts_with('.') {
            return Err(Error::Config(format!("run name {:?} is not a plain directory name", self.name)));
        }
        if !(1..=3).contains(&self.degree) {
            return Err(Error::Config(format!("degree {} not in 1..=3", self.degree)));
        }
        if self.level > 6 {
            return Err(Error::Config(format!("level {} is beyond the supported 0..=6", self.level)));
        }
        if self.n_snapshots() < 1 || self.n_training() < 2 || self.test_samples < 1 || self.hidden_width() < 1 {
            return Err(Error::Config("snapshot, training, test and hidden counts must be positive".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!("train fraction {} not in (0, 1)", self.train_fraction)));
        }
        match self.truncation {
            Truncation::Fixed(0) => return Err(Error::Config("fixed truncation needs at least one mode".into())),
            Truncation::Ratio(r) if !(r > 0.0 && r <= 1.0) => {
                return Err(Error::Config(format!("truncation ratio {r} not in (0, 1]")))
            }
            _ => {}
        }
        if self.sweep.contains(&0) {
            return Err(Error::Config("sweep sizes must be positive".into()));
        }
        self.boundary.validate()?;
        self.training.validate()?;
        self.parameter_ranges()?;
        Ok(())
    }

    pub fn active(&self) -> ActiveSet {
        self.preset.active(self.physics)
    }

    pub fn n_snapshots(&self) -> usize {
        self.snapshots.unwrap_or_else(|| self.preset.snapshots(self.physics))
    }

    pub fn n_training(&self) -> usize {
        self.training_samples.unwrap_or_else(|| self.preset.training_samples(self.physics))
    }

    pub fn hidden_width(&self) -> usize {
        self.hidden.unwrap_or_else(|| self.preset.hidden(self.physics))
    }

    /// The sampling box: defaults with the configured overrides.
    pub fn parameter_ranges(&self) -> Result<ParameterRanges> {
        let active = self.active();
        for name in self.ranges.keys() {
            match ParamId::from_name(name) {
                Some(id) if active.contains(id) => {}
                Some(_) => return Err(Error::Config(format!("range given for inactive parameter {name:?}"))),
                None => return Err(Error::Config(format!("range given for unknown parameter {name:?}"))),
            }
        }
        let bounds = active
            .ids()
            .iter()
            .map(|&id| self.ranges.get(id.name()).map_or(default_range(id), |b| (b[0], b[1])))
            .collect();
        ParameterRanges::new(active, bounds).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_activate_the_experiment_parameters() {
        assert_eq!(Preset::I.active(Physics::Thermal).ids(), &[ParamId::K]);
        assert_eq!(Preset::I.active(Physics::Mechanical).len(), 4);
        for (p, extra) in [(Preset::Ii, 3), (Preset::Iii, 6), (Preset::Iv, 10)] {
            assert_eq!(p.active(Physics::Thermal).len(), 1 + extra);
            assert_eq!(p.active(Physics::Mechanical).len(), 4 + extra);
            assert!(p.active(Physics::Thermal).has_geometry());
        }
        assert_eq!(Preset::Iii.hidden(Physics::Mechanical), 170);
        assert_eq!(Preset::I.snapshots(Physics::Thermal), 50);
    }

    #[test]
    fn toml_round_trip_with_overrides() {
        let text = r#"
            name = "demo"
            physics = "mechanical"
            preset = "ii"
            snapshots = 12
            truncation = { mode = "fixed", value = 4 }
            [ranges]
            k = [9.9, 10.1]
            [training]
            max_epochs = 10
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.n_snapshots(), 12);
        assert_eq!(cfg.n_training(), 500);
        assert_eq!(Preset::Iv.training_samples(Physics::Thermal), 4500);
        assert_eq!(cfg.training.patience, 50);
        assert_eq!(cfg.parameter_ranges().unwrap().bound(ParamId::K), Some((9.9, 10.1)));
        let back = ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let base = "name = \"x\"\nphysics = \"thermal\"\npreset = \"i\"\n";
        assert!(ExperimentConfig::from_toml(base).is_ok());
        for extra in ["degree = 4", "bogus = 1", "[ranges]\nmu = [1.0, 2.0]", "[ranges]\nk = [2.0, 1.0]", "train_fraction = 1.0"] {
            let r = ExperimentConfig::from_toml(&format!("{base}{extra}\n"));
            assert!(matches!(r, Err(Error::Config(_))), "{extra}: {r:?}");
        }
    }
}
