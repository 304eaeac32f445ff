//! Offline and online stages, error analysis and timing, with run-directory persistence.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Physics};
use crate::error::{Error, Result};
use crate::fem::{InnerProduct, InnerProductKind, Model, Rank};
use crate::geometry::{ParamId, ParameterTuple};
use crate::persist::{read_json, read_rows, write_atomic, write_json, write_rows};
use crate::pod::{dot, pod_basis, ReducedBasis};
use crate::problem::Problem;
use crate::rom_ann::{train_network, AnnModel, Dataset, NetworkConfig, NetworkParams, Normalization, TrainConfig, TrainingHistory};
use crate::rom_galerkin::{GalerkinBases, GalerkinRom, GalerkinSolution};
use crate::sampling::{lhs_sample, read_samples_csv, write_samples_csv, ParameterRanges};

/// Share of full-order failures tolerated before the offline stage gives up.
pub const MAX_FAILURE_FRACTION: f64 = 0.1;

/// Full-order fields at one tuple; mechanical parts only for mechanical runs.
#[derive(Clone, Debug, PartialEq)]
pub struct FomSnapshot {
    pub tuple: ParameterTuple,
    pub temperature: Vec<f64>,
    pub loads: Option<Vec<f64>>,
    pub thermal_stress: Option<Vec<f64>>,
    pub seconds: f64,
}

impl FomSnapshot {
    /// `u = u_loads + u_thermal`.
    pub fn displacement(&self) -> Option<Vec<f64>> {
        let (a, b) = (self.loads.as_ref()?, self.thermal_stress.as_ref()?);
        Some(a.iter().zip(b).map(|(x, y)| x + y).collect())
    }

    /// The field the surrogate of `physics` approximates.
    pub fn target(&self, physics: Physics) -> Vec<f64> {
        match physics {
            Physics::Thermal => self.temperature.clone(),
            Physics::Mechanical => self.displacement().expect("mechanical snapshot"),
        }
    }
}

pub fn solve_fom(problem: &Problem, physics: Physics, tuple: &ParameterTuple) -> Result<FomSnapshot> {
    let start = Instant::now();
    let t = problem.temperature(tuple)?;
    let (loads, thermal_stress) = match physics {
        Physics::Thermal => (None, None),
        Physics::Mechanical => {
            let u = problem.displacement(tuple, &t)?;
            (Some(u.loads.values), Some(u.thermal.values))
        }
    };
    Ok(FomSnapshot { tuple: tuple.clone(), temperature: t.values, loads, thermal_stress, seconds: start.elapsed().as_secs_f64() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub index: usize,
    pub values: Vec<f64>,
    pub error: String,
}

/// Solves in parallel; failures are recorded and skipped unless they exceed the tolerated share.
pub fn fom_batch(problem: &Problem, physics: Physics, tuples: &[ParameterTuple]) -> Result<(Vec<FomSnapshot>, Vec<FailureRecord>)> {
    let results: Vec<Result<FomSnapshot>> = tuples.par_iter().map(|t| solve_fom(problem, physics, t)).collect();
    let mut ok = Vec::with_capacity(tuples.len());
    let mut failures = Vec::new();
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => ok.push(s),
            Err(e) => failures.push(FailureRecord { index, values: tuples[index].active_values(), error: e.to_string() }),
        }
    }
    if failures.len() as f64 > MAX_FAILURE_FRACTION * tuples.len() as f64 || ok.is_empty() {
        return Err(Error::TooManyFailures { failed: failures.len(), total: tuples.len(), first: failures[0].error.clone() });
    }
    Ok((ok, failures))
}

/// POD bases of a run. The monolithic displacement basis feeds the surrogate, the split ones the Galerkin track.
#[derive(Clone, Debug, PartialEq)]
pub struct Bases {
    pub thermal: ReducedBasis,
    pub loads: Option<ReducedBasis>,
    pub thermal_stress: Option<ReducedBasis>,
    pub monolithic: Option<ReducedBasis>,
}

impl Bases {
    pub fn named(&self) -> Vec<(Model, &ReducedBasis)> {
        let mut out = vec![(Model::Thermal, &self.thermal)];
        for (m, b) in [
            (Model::MechanicalLoads, &self.loads),
            (Model::ThermalStress, &self.thermal_stress),
            (Model::Mechanical, &self.monolithic),
        ] {
            if let Some(b) = b {
                out.push((m, b));
            }
        }
        out
    }

    pub fn surrogate(&self, physics: Physics) -> &ReducedBasis {
        match physics {
            Physics::Thermal => &self.thermal,
            Physics::Mechanical => self.monolithic.as_ref().expect("mechanical run has a monolithic basis"),
        }
    }
}

/// Inner products on the reference mesh used for POD and coefficient targets.
pub struct ReferenceProducts {
    pub scalar: InnerProduct,
    pub vector: Option<InnerProduct>,
}

impl ReferenceProducts {
    pub fn new(problem: &Problem, physics: Physics) -> Result<Self> {
        let scalar = InnerProduct::new(&problem.reference, Rank::Scalar, InnerProductKind::H1r)?;
        let vector = match physics {
            Physics::Thermal => None,
            Physics::Mechanical => Some(InnerProduct::new(&problem.reference, Rank::Vector, InnerProductKind::Unorm)?),
        };
        Ok(ReferenceProducts { scalar, vector })
    }

    pub fn for_physics(&self, physics: Physics) -> &InnerProduct {
        match physics {
            Physics::Thermal => &self.scalar,
            Physics::Mechanical => self.vector.as_ref().expect("vector product"),
        }
    }
}

pub fn build_bases(cfg: &ExperimentConfig, ips: &ReferenceProducts, snaps: &[FomSnapshot]) -> Result<Bases> {
    let rule = cfg.truncation;
    let gather = |f: &dyn Fn(&FomSnapshot) -> Vec<f64>| snaps.iter().map(f).collect::<Vec<_>>();
    let thermal = pod_basis(&gather(&|s| s.temperature.clone()), &ips.scalar, rule)?;
    if cfg.physics == Physics::Thermal {
        return Ok(Bases { thermal, loads: None, thermal_stress: None, monolithic: None });
    }
    let ipu = ips.vector.as_ref().expect("vector product");
    Ok(Bases {
        thermal,
        loads: Some(pod_basis(&gather(&|s| s.loads.clone().expect("loads")), ipu, rule)?),
        thermal_stress: Some(pod_basis(&gather(&|s| s.thermal_stress.clone().expect("thermal part")), ipu, rule)?),
        monolithic: Some(pod_basis(&gather(&|s| s.displacement().expect("displacement")), ipu, rule)?),
    })
}

/// Wall-times of the offline phases, in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OfflineTimings {
    /// Mean time of one full-order solve.
    pub fom: f64,
    pub fom_total: f64,
    pub fom_solves: usize,
    pub pod: f64,
    pub projection: f64,
    pub training: f64,
}

impl OfflineTimings {
    pub fn to_csv(&self) -> String {
        format!(
            "t_POD,t_tr,t_FOM,t_proj,fom_solves,t_FOM_total\n{:.6e},{:.6e},{:.6e},{:.6e},{},{:.6e}\n",
            self.pod, self.training, self.fom, self.projection, self.fom_solves, self.fom_total
        )
    }
}

/// Everything the online stage needs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunModels {
    pub config: ExperimentConfig,
    pub ranges: ParameterRanges,
    pub bases: Bases,
    pub galerkin: GalerkinRom,
    pub ann: AnnModel,
}

/// Result of the offline stage.
#[derive(Clone, Debug, PartialEq)]
pub struct OfflineRun {
    pub models: RunModels,
    pub snapshots: Vec<FomSnapshot>,
    pub training_set: Vec<FomSnapshot>,
    pub failures: Vec<FailureRecord>,
    pub history: TrainingHistory,
    pub timings: OfflineTimings,
}

/// Samples, solves, compresses, reduces and trains.
pub fn offline_stage(cfg: &ExperimentConfig, problem: &Problem) -> Result<OfflineRun> {
    cfg.validate()?;
    let ranges = cfg.parameter_ranges()?;
    let physics = cfg.physics;
    let snapshot_tuples = lhs_sample(&ranges, cfg.n_snapshots(), cfg.seeds.snapshots)?;
    let training_tuples = lhs_sample(&ranges, cfg.n_training(), cfg.seeds.training)?;

    let start = Instant::now();
    let (snapshots, mut failures) = fom_batch(problem, physics, &snapshot_tuples)?;
    let (training_set, train_failures) = fom_batch(problem, physics, &training_tuples)?;
    let fom_total = start.elapsed().as_secs_f64();
    failures.extend(train_failures.into_iter().map(|f| FailureRecord { index: f.index + snapshot_tuples.len(), ..f }));
    let fom_solves = snapshots.len() + training_set.len();
    let fom = snapshots.iter().chain(&training_set).map(|s| s.seconds).sum::<f64>() / fom_solves as f64;

    let start = Instant::now();
    let ips = ReferenceProducts::new(problem, physics)?;
    let bases = build_bases(cfg, &ips, &snapshots)?;
    let pod = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let galerkin = GalerkinRom::build(
        problem,
        ranges.clone(),
        GalerkinBases { thermal: &bases.thermal, loads: bases.loads.as_ref(), thermal_stress: bases.thermal_stress.as_ref() },
    )?;
    let projection = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let basis = bases.surrogate(physics);
    let model = surrogate_model(physics);
    let tuples: Vec<ParameterTuple> = training_set.iter().map(|s| s.tuple.clone()).collect();
    let fields: Vec<Vec<f64>> = training_set.iter().map(|s| s.target(physics)).collect();
    let data = Dataset::build(model, &ranges, &tuples, &fields, basis, ips.for_physics(physics), cfg.train_fraction, cfg.seeds.split)?;
    let net = NetworkConfig::new(ranges.active().len(), cfg.hidden_width(), basis.len())?;
    let tcfg = TrainConfig { seed: cfg.seeds.network, ..cfg.training.clone() };
    let (params, history) = train_network(net, &tcfg, &data)?;
    let training = start.elapsed().as_secs_f64();

    let ann = AnnModel { model, ranges: ranges.clone(), normalization: data.normalization, params, basis: basis.clone() };
    Ok(OfflineRun {
        models: RunModels { config: cfg.clone(), ranges, bases, galerkin, ann },
        snapshots,
        training_set,
        failures,
        history,
        timings: OfflineTimings { fom, fom_total, fom_solves, pod, projection, training },
    })
}

pub fn surrogate_model(physics: Physics) -> Model {
    match physics {
        Physics::Thermal => Model::Thermal,
        Physics::Mechanical => Model::Mechanical,
    }
}

/// Layout of `runs/<name>/`.
#[derive(Clone, Debug)]
pub struct RunDir {
    pub root: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Sidecar {
    artifact: String,
    crate_version: String,
    run: String,
    level: u32,
    degree: usize,
    seeds: crate::config::Seeds,
    rows: usize,
    columns: usize,
    #[serde(default)]
    extra: serde_json::Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct BasisMeta {
    kind: InnerProductKind,
    eigenvalues: Vec<f64>,
    truncation: crate::pod::TruncationRecord,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct NetworkMeta {
    model: Model,
    network: NetworkConfig,
    training: TrainConfig,
    normalization: Normalization,
    ranges: ParameterRanges,
    best_epoch: usize,
    best_validation_mse: f64,
    initial_validation_mse: f64,
    epochs_run: usize,
    stopped_early: bool,
}

impl RunDir {
    pub fn new(base: &Path, name: &str) -> Self {
        RunDir { root: base.join(name) }
    }

    pub fn reports(&self) -> PathBuf {
        self.root.join("reports")
    }

    fn sidecar(&self, cfg: &ExperimentConfig, artifact: &str, rows: usize, columns: usize, extra: serde_json::Value) -> Sidecar {
        Sidecar {
            artifact: artifact.into(),
            crate_version: env!("CARGO_PKG_VERSION").into(),
            run: cfg.name.clone(),
            level: cfg.level,
            degree: cfg.degree,
            seeds: cfg.seeds,
            rows,
            columns,
            extra,
        }
    }

    fn write_rows_with_sidecar(&self, cfg: &ExperimentConfig, rel: &str, rows: &[Vec<f64>], extra: serde_json::Value) -> Result<()> {
        let path = self.root.join(rel);
        write_rows(&path, rows)?;
        let side = self.sidecar(cfg, rel, rows.len(), rows.first().map_or(0, Vec::len), extra);
        write_json(&path.with_extension("json"), &side)
    }

    /// Writes the complete offline output.
    pub fn save(&self, run: &OfflineRun) -> Result<()> {
        let m = &run.models;
        let cfg = &m.config;
        write_atomic(&self.root.join("config.toml"), cfg.to_toml()?.as_bytes())?;
        std::fs::create_dir_all(self.root.join("samples"))?;
        let active = m.ranges.active();
        let tuples = |s: &[FomSnapshot]| s.iter().map(|x| x.tuple.clone()).collect::<Vec<_>>();
        write_samples_csv(&self.root.join("samples/snapshots.csv"), active, &tuples(&run.snapshots))?;
        write_samples_csv(&self.root.join("samples/training.csv"), active, &tuples(&run.training_set))?;

        let mut stores: Vec<(Model, Vec<Vec<f64>>)> =
            vec![(Model::Thermal, run.snapshots.iter().map(|s| s.temperature.clone()).collect())];
        if cfg.physics == Physics::Mechanical {
            stores.push((Model::MechanicalLoads, run.snapshots.iter().map(|s| s.loads.clone().expect("loads")).collect()));
            stores.push((Model::ThermalStress, run.snapshots.iter().map(|s| s.thermal_stress.clone().expect("thermal")).collect()));
        }
        for (model, rows) in &stores {
            let extra = serde_json::json!({ "model": model, "samples": "samples/snapshots.csv" });
            self.write_rows_with_sidecar(cfg, &format!("snapshots/{}.bin", model.tag()), rows, extra)?;
        }

        for (model, basis) in m.bases.named() {
            let meta = BasisMeta { kind: basis.kind, eigenvalues: basis.eigenvalues.clone(), truncation: basis.truncation.clone() };
            self.write_rows_with_sidecar(cfg, &format!("bases/{}.bin", model.tag()), &basis.modes, serde_json::to_value(meta)?)?;
        }

        write_json(&self.root.join("galerkin.json"), &without_modes(&m.galerkin))?;

        let ann = &m.ann;
        let meta = NetworkMeta {
            model: ann.model,
            network: ann.params.config,
            training: TrainConfig { seed: cfg.seeds.network, ..cfg.training.clone() },
            normalization: ann.normalization.clone(),
            ranges: ann.ranges.clone(),
            best_epoch: run.history.best_epoch,
            best_validation_mse: run.history.best_validation_mse,
            initial_validation_mse: run.history.initial_validation_mse,
            epochs_run: run.history.epochs.len(),
            stopped_early: run.history.stopped_early,
        };
        self.write_rows_with_sidecar(cfg, "network.bin", &[ann.params.to_flat()], serde_json::to_value(meta)?)?;

        let reports = self.reports();
        write_atomic(&reports.join("offline_timings.csv"), run.timings.to_csv().as_bytes())?;
        write_atomic(&reports.join("training_history.csv"), run.history.to_csv().as_bytes())?;
        let mut failures = String::from("index,values,error\n");
        for f in &run.failures {
            let vals: Vec<String> = f.values.iter().map(|v| format!("{v:.17e}")).collect();
            let _ = writeln!(failures, "{},{},\"{}\"", f.index, vals.join(" "), f.error.replace('"', "'"));
        }
        write_atomic(&reports.join("failures.csv"), failures.as_bytes())?;
        for (model, basis) in m.bases.named() {
            let mut s = String::from("index,eigenvalue,ratio\n");
            let top = basis.eigenvalues.first().copied().unwrap_or(1.0);
            for (i, e) in basis.eigenvalues.iter().enumerate() {
                let _ = writeln!(s, "{},{e:.6e},{:.6e}", i + 1, e / top);
            }
            write_atomic(&reports.join(format!("spectrum_{}.csv", model.tag())), s.as_bytes())?;
        }
        Ok(())
    }

    fn read_basis(&self, model: Model) -> Result<ReducedBasis> {
        let path = self.root.join(format!("bases/{}.bin", model.tag()));
        let modes = read_rows(&path)?;
        let side: Sidecar = read_json(&path.with_extension("json"))?;
        let meta: BasisMeta = serde_json::from_value(side.extra)?;
        Ok(ReducedBasis { kind: meta.kind, modes, eigenvalues: meta.eigenvalues, truncation: meta.truncation })
    }

    /// Reloads the online models of a finished offline stage.
    pub fn load(&self) -> Result<RunModels> {
        let missing = |what: &str| Error::Config(format!("{} has no {what}; run the offline stage first", self.root.display()));
        if !self.root.join("galerkin.json").exists() || !self.root.join("network.bin").exists() {
            return Err(missing("offline artifacts"));
        }
        let config = ExperimentConfig::load(&self.root.join("config.toml"))?;
        let ranges = config.parameter_ranges()?;
        let mechanical = config.physics == Physics::Mechanical;
        let opt = |m: Model| -> Result<Option<ReducedBasis>> { if mechanical { self.read_basis(m).map(Some) } else { Ok(None) } };
        let bases = Bases {
            thermal: self.read_basis(Model::Thermal)?,
            loads: opt(Model::MechanicalLoads)?,
            thermal_stress: opt(Model::ThermalStress)?,
            monolithic: opt(Model::Mechanical)?,
        };
        let mut galerkin: GalerkinRom = read_json(&self.root.join("galerkin.json"))?;
        galerkin.thermal.basis = bases.thermal.clone();
        if let (Some(m), Some(b)) = (galerkin.loads.as_mut(), &bases.loads) {
            m.basis = b.clone();
        }
        if let (Some(m), Some(b)) = (galerkin.thermal_stress.as_mut(), &bases.thermal_stress) {
            m.basis = b.clone();
        }
        let net_path = self.root.join("network.bin");
        let side: Sidecar = read_json(&net_path.with_extension("json"))?;
        let meta: NetworkMeta = serde_json::from_value(side.extra)?;
        let flat = read_rows(&net_path)?.into_iter().next().ok_or_else(|| missing("network parameters"))?;
        let params = NetworkParams::from_flat(meta.network, &flat)?;
        let ann = AnnModel {
            model: meta.model,
            ranges: meta.ranges,
            normalization: meta.normalization,
            params,
            basis: bases.surrogate(config.physics).clone(),
        };
        Ok(RunModels { config, ranges, bases, galerkin, ann })
    }

    pub fn read_samples(&self, which: &str) -> Result<Vec<ParameterTuple>> {
        Ok(read_samples_csv(&self.root.join(format!("samples/{which}.csv")))?.1)
    }
}

/// The Galerkin models with their (separately stored) modes removed.
fn without_modes(rom: &GalerkinRom) -> GalerkinRom {
    let mut r = rom.clone();
    r.thermal.basis.modes.clear();
    for m in [r.loads.as_mut(), r.thermal_stress.as_mut()].into_iter().flatten() {
        m.basis.modes.clear();
    }
    r
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Galerkin,
    Ann,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Galerkin => "galerkin",
            Method::Ann => "ann",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "galerkin" | "pod-g" => Ok(Method::Galerkin),
            "ann" | "pod-ann" => Ok(Method::Ann),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// Coefficients of one online query, grouped per reduced model.
#[derive(Clone, Debug, PartialEq)]
pub struct OnlineRecord {
    pub coefficients: Vec<(Model, Vec<f64>)>,
    /// Coefficient computation only; reconstruction is excluded.
    pub seconds: f64,
    pub warnings: Vec<String>,
}

fn galerkin_groups(sol: GalerkinSolution) -> Vec<(Model, Vec<f64>)> {
    let mut out = vec![(Model::Thermal, sol.thermal)];
    out.extend(sol.loads.map(|z| (Model::MechanicalLoads, z)));
    out.extend(sol.thermal_stress.map(|z| (Model::ThermalStress, z)));
    out
}

impl RunModels {
    /// One online query by `method`.
    pub fn query(&self, problem: &Problem, tuple: &ParameterTuple, method: Method) -> Result<OnlineRecord> {
        let start = Instant::now();
        let (coefficients, warnings) = match method {
            Method::Galerkin => {
                let mut sol = self.galerkin.solve(&problem.decomposition, tuple)?;
                let w = std::mem::take(&mut sol.warnings);
                (galerkin_groups(sol), w)
            }
            Method::Ann => {
                let p = self.ann.predict(tuple)?;
                (vec![(self.ann.model, p.coefficients)], p.warnings)
            }
        };
        Ok(OnlineRecord { coefficients, seconds: start.elapsed().as_secs_f64(), warnings })
    }

    /// The field a query approximates: temperature or total displacement.
    pub fn reconstruct(&self, record: &OnlineRecord) -> Vec<f64> {
        let mut out: Option<Vec<f64>> = None;
        for (model, z) in &record.coefficients {
            let basis = match model {
                Model::Thermal if self.config.physics == Physics::Mechanical => continue,
                Model::Thermal => &self.bases.thermal,
                Model::MechanicalLoads => self.bases.loads.as_ref().expect("loads basis"),
                Model::ThermalStress => self.bases.thermal_stress.as_ref().expect("thermal-stress basis"),
                Model::Mechanical => self.bases.monolithic.as_ref().expect("monolithic basis"),
            };
            let f = basis.reconstruct(z);
            match out.as_mut() {
                None => out = Some(f),
                Some(acc) => acc.iter_mut().zip(&f).for_each(|(a, b)| *a += b),
            }
        }
        out.expect("at least one coefficient group")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OnlineReport {
    pub method: Method,
    pub records: Vec<OnlineRecord>,
}

impl OnlineReport {
    pub fn mean_seconds(&self) -> f64 {
        self.records.iter().map(|r| r.seconds).sum::<f64>() / self.records.len().max(1) as f64
    }

    /// One CSV per reduced model: `index,seconds,z1,...`.
    pub fn to_csv(&self) -> Vec<(Model, String)> {
        let Some(first) = self.records.first() else { return Vec::new() };
        first
            .coefficients
            .iter()
            .enumerate()
            .map(|(g, (model, z))| {
                let mut s = String::from("index,seconds");
                (1..=z.len()).for_each(|i| {
                    let _ = write!(s, ",z{i}");
                });
                s.push('\n');
                for (k, r) in self.records.iter().enumerate() {
                    let _ = write!(s, "{k},{:.6e}", r.seconds);
                    r.coefficients[g].1.iter().for_each(|v| {
                        let _ = write!(s, ",{v:.17e}");
                    });
                    s.push('\n');
                }
                (*model, s)
            })
            .collect()
    }
}

/// Queries in sequence, so per-query timings are not disturbed by each other.
pub fn online_stage(models: &RunModels, problem: &Problem, tuples: &[ParameterTuple], method: Method) -> Result<OnlineReport> {
    let records = tuples.iter().map(|t| models.query(problem, t, method)).collect::<Result<Vec<_>>>()?;
    Ok(OnlineReport { method, records })
}

/// Relative errors of one method at one basis size, over the test tuples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub n: usize,
    pub method: Method,
    /// Per tuple `ε_rel`.
    pub relative: Vec<f64>,
    /// Per tuple best-approximation error in the method's reduced space.
    pub projection: Vec<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

impl ErrorRow {
    pub fn mean_relative(&self) -> f64 {
        mean(&self.relative)
    }

    pub fn max_relative(&self) -> f64 {
        max(&self.relative)
    }

    pub fn mean_projection(&self) -> f64 {
        mean(&self.projection)
    }

    pub fn max_projection(&self) -> f64 {
        max(&self.projection)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub physics: Physics,
    pub norm: InnerProductKind,
    pub rows: Vec<ErrorRow>,
}

impl ErrorReport {
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("n,method,mean_rel,max_rel,mean_proj,max_proj\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.6e},{:.6e},{:.6e},{:.6e}",
                r.n,
                r.method.name(),
                r.mean_relative(),
                r.max_relative(),
                r.mean_projection(),
                r.max_projection()
            );
        }
        s
    }

    /// Plot data: one line per (size, method, tuple).
    pub fn per_tuple_csv(&self) -> String {
        let mut s = String::from("n,method,tuple,rel,proj\n");
        for r in &self.rows {
            for (k, (e, p)) in r.relative.iter().zip(&r.projection).enumerate() {
                let _ = writeln!(s, "{},{},{k},{e:.6e},{p:.6e}", r.n, r.method.name());
            }
        }
        s
    }

    /// Share of (tuple, size, method) entries with `ε_proj ≤ ε_rel`, up to rounding.
    pub fn projection_bound_fraction(&self) -> f64 {
        let (mut ok, mut total) = (0usize, 0usize);
        for r in &self.rows {
            for (e, p) in r.relative.iter().zip(&r.projection) {
                total += 1;
                ok += usize::from(*p <= e * (1.0 + 1e-9) + 1e-14);
            }
        }
        ok as f64 / total.max(1) as f64
    }

    /// Whether every tuple's projection error is nonincreasing in the basis size, for each method.
    pub fn projection_nested(&self) -> bool {
        [Method::Galerkin, Method::Ann].into_iter().all(|m| {
            let rows: Vec<&ErrorRow> = self.rows.iter().filter(|r| r.method == m).collect();
            rows.windows(2).all(|w| {
                w[1].projection.iter().zip(&w[0].projection).all(|(b, a)| *b <= a * (1.0 + 1e-9) + 1e-14)
            })
        })
    }
}

/// `X`-orthogonal projection error of `u` onto the span of `columns`, via the Gram system.
///
/// Nearly dependent columns are handled by a spectral pseudo-inverse.
pub fn projection_error(ip: &InnerProduct, u: &[f64], columns: &[&[f64]]) -> f64 {
    let xu = ip.matrix.mul_vec(u);
    let unorm = dot(u, &xu).sqrt();
    if columns.is_empty() {
        return 1.0;
    }
    let xc: Vec<Vec<f64>> = columns.iter().map(|c| ip.matrix.mul_vec(c)).collect();
    let k = columns.len();
    let g = DMatrix::from_fn(k, k, |i, j| dot(columns[i], &xc[j]));
    let b = DVector::from_iterator(k, xc.iter().map(|x| dot(x, u)));
    let eig = g.symmetric_eigen();
    let cut = eig.eigenvalues.max() * 1e-13;
    let mut c = DVector::zeros(k);
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if l > cut {
            let v = eig.eigenvectors.column(i);
            c += v * (v.dot(&b) / l);
        }
    }
    let mut e = u.to_vec();
    for (col, ci) in columns.iter().zip(c.iter()) {
        e.iter_mut().zip(col.iter()).for_each(|(x, v)| *x -= ci * v);
    }
    ip.inner_raw(&e, &e).sqrt() / unorm
}

fn relative(ip: &InnerProduct, exact: &[f64], approx: &[f64]) -> f64 {
    let e: Vec<f64> = exact.iter().zip(approx).map(|(a, b)| a - b).collect();
    ip.inner_raw(&e, &e).sqrt() / ip.inner_raw(exact, exact).sqrt()
}

/// Basis sizes to sweep: the configured ones capped by what was retained, or `1..=N`.
pub fn sweep_sizes(cfg: &ExperimentConfig, models: &RunModels) -> Vec<usize> {
    let n_max = match cfg.physics {
        Physics::Thermal => models.bases.thermal.len(),
        Physics::Mechanical => [&models.bases.loads, &models.bases.thermal_stress, &models.bases.monolithic]
            .iter()
            .filter_map(|b| b.as_ref().map(ReducedBasis::len))
            .max()
            .unwrap_or(0),
    };
    let mut n: Vec<usize> = if cfg.sweep.is_empty() { (1..=n_max).collect() } else { cfg.sweep.iter().map(|&k| k.min(n_max)).collect() };
    n.sort_unstable();
    n.dedup();
    n
}

/// `ε_rel` of both methods and their projection benchmarks, measured on each tuple's own mesh.
pub fn analyze_errors(models: &RunModels, problem: &Problem, tuples: &[ParameterTuple], sizes: &[usize]) -> Result<ErrorReport> {
    let physics = models.config.physics;
    let rank = surrogate_model(physics).rank();
    let norm = InnerProductKind::default_for(rank);
    let n_thermal = models.bases.thermal.len();
    let roms: Vec<GalerkinRom> = sizes
        .iter()
        .map(|&n| match physics {
            Physics::Thermal => models.galerkin.truncated(n, 0),
            Physics::Mechanical => models.galerkin.truncated(n_thermal, n),
        })
        .collect();

    // per tuple: for each size, (galerkin rel, galerkin proj, ann rel, ann proj)
    let per_tuple: Vec<Vec<[f64; 4]>> = tuples
        .par_iter()
        .map(|tuple| -> Result<Vec<[f64; 4]>> {
            let fom = solve_fom(problem, physics, tuple)?;
            let exact = fom.target(physics);
            let mesh = problem.mesh_at(tuple)?;
            let ip = InnerProduct::new(&mesh, rank, norm)?;
            let ann = models.ann.predict(tuple)?;
            let ann_basis = models.bases.surrogate(physics);
            sizes
                .iter()
                .zip(&roms)
                .map(|(&n, rom)| {
                    let sol = rom.solve(&problem.decomposition, tuple)?;
                    let (g_field, g_space): (Vec<f64>, Vec<&[f64]>) = match physics {
                        Physics::Thermal => (rom.temperature(&sol).values, rom.thermal.basis.modes.iter().map(Vec::as_slice).collect()),
                        Physics::Mechanical => (
                            rom.displacement(&sol).expect("mechanical models").values,
                            [&rom.loads, &rom.thermal_stress]
                                .into_iter()
                                .flatten()
                                .flat_map(|m| m.basis.modes.iter().map(Vec::as_slice))
                                .collect(),
                        ),
                    };
                    let nn = n.min(ann_basis.len());
                    let a_field = ann_basis.reconstruct(&ann.coefficients[..nn]);
                    let a_space: Vec<&[f64]> = ann_basis.modes[..nn].iter().map(Vec::as_slice).collect();
                    Ok([
                        relative(&ip, &exact, &g_field),
                        projection_error(&ip, &exact, &g_space),
                        relative(&ip, &exact, &a_field),
                        projection_error(&ip, &exact, &a_space),
                    ])
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (k, &n) in sizes.iter().enumerate() {
        for (method, off) in [(Method::Galerkin, 0), (Method::Ann, 2)] {
            rows.push(ErrorRow {
                n,
                method,
                relative: per_tuple.iter().map(|t| t[k][off]).collect(),
                projection: per_tuple.iter().map(|t| t[k][off + 1]).collect(),
            });
        }
    }
    Ok(ErrorReport { physics, norm, rows })
}

/// Mean wall-times per query, each the median over repeated passes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub level: u32,
    pub degree: usize,
    pub n_dofs: usize,
    pub fom: f64,
    pub galerkin: f64,
    pub ann: f64,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        format!(
            "level,degree,dofs,t_FOM,t_galerkin,t_ann,fom_over_ann,galerkin_over_ann\n{},{},{},{:.6e},{:.6e},{:.6e},{:.3},{:.3}\n",
            self.level,
            self.degree,
            self.n_dofs,
            self.fom,
            self.galerkin,
            self.ann,
            self.fom / self.ann,
            self.galerkin / self.ann
        )
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

/// Wall-time of one call of `f`: per pass, sweeps over `tuples` are repeated for at least
/// `min_seconds` and averaged; the median over `passes` is returned.
pub fn time_per_query<F: FnMut(&ParameterTuple) -> Result<()>>(
    tuples: &[ParameterTuple],
    passes: usize,
    min_seconds: f64,
    mut f: F,
) -> Result<f64> {
    let mut samples = Vec::with_capacity(passes);
    for _ in 0..passes.max(1) {
        let start = Instant::now();
        let mut calls = 0usize;
        loop {
            for t in tuples {
                f(t)?;
            }
            calls += tuples.len();
            if start.elapsed().as_secs_f64() >= min_seconds {
                break;
            }
        }
        samples.push(start.elapsed().as_secs_f64() / calls.max(1) as f64);
    }
    Ok(median(samples))
}

pub fn bench(models: &RunModels, problem: &Problem, tuples: &[ParameterTuple], passes: usize) -> Result<BenchReport> {
    let physics = models.config.physics;
    let fom = time_per_query(tuples, passes.min(3), 0.0, |t| solve_fom(problem, physics, t).map(drop))?;
    let galerkin = time_per_query(tuples, passes, 5e-3, |t| models.galerkin.solve(&problem.decomposition, t).map(drop))?;
    let ann = time_per_query(tuples, passes, 5e-3, |t| models.ann.predict(t).map(drop))?;
    let n_dofs = problem.reference.n_nodes() * surrogate_model(physics).rank().components();
    Ok(BenchReport { level: problem.reference.level, degree: problem.reference.degree, n_dofs, fom, galerkin, ann })
}

/// Test tuples of a run, independent of the training data.
pub fn test_tuples(cfg: &ExperimentConfig) -> Result<Vec<ParameterTuple>> {
    lhs_sample(&cfg.parameter_ranges()?, cfg.test_samples, cfg.seeds.test)
}

/// Names the active parameters for report headers.
pub fn parameter_header(ids: &[ParamId]) -> String {
    ids.iter().map(|id| id.name()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preset;
    use crate::fem::Rank;

    fn tiny(physics: Physics, preset: Preset) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new("tiny", physics, preset);
        cfg.level = 0;
        cfg.degree = 1;
        cfg.snapshots = Some(8);
        cfg.training_samples = Some(10);
        cfg.hidden = Some(6);
        cfg.test_samples = 3;
        cfg.training.max_epochs = 30;
        cfg
    }

    #[test]
    fn offline_round_trips_through_the_run_directory() {
        let cfg = tiny(Physics::Mechanical, Preset::Ii);
        let problem = Problem::new(cfg.level, cfg.degree, cfg.boundary.clone()).unwrap();
        let run = offline_stage(&cfg, &problem).unwrap();
        assert_eq!(run.snapshots.len(), 8);
        assert!(run.timings.to_csv().starts_with("t_POD,t_tr,t_FOM,t_proj"));
        let dir = tempfile::tempdir().unwrap();
        let rd = RunDir::new(dir.path(), &cfg.name);
        rd.save(&run).unwrap();
        let back = rd.load().unwrap();
        assert_eq!(back.bases, run.models.bases);
        assert_eq!(back.ann, run.models.ann);
        assert_eq!(back.galerkin, run.models.galerkin);
        assert_eq!(rd.read_samples("snapshots").unwrap().len(), 8);
        let t = &test_tuples(&cfg).unwrap()[0];
        for m in [Method::Galerkin, Method::Ann] {
            let a = run.models.query(&problem, t, m).unwrap();
            let b = back.query(&problem, t, m).unwrap();
            assert_eq!(a.coefficients, b.coefficients);
            assert_eq!(run.models.reconstruct(&a).len(), 2 * problem.reference.n_nodes());
        }
    }

    #[test]
    fn missing_artifacts_are_a_config_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(RunDir::new(dir.path(), "none").load(), Err(Error::Config(_))));
    }

    #[test]
    fn projection_error_of_a_member_vanishes() {
        let problem = Problem::new(0, 1, crate::problem::BoundaryData::default()).unwrap();
        let ip = InnerProduct::new(&problem.reference, Rank::Scalar, InnerProductKind::H1r).unwrap();
        let n = problem.reference.n_nodes();
        let a: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let u: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - 0.5 * y).collect();
        assert!(projection_error(&ip, &u, &[&a, &b, &a]) < 1e-10);
        assert!(projection_error(&ip, &u, &[&a]) > 1e-3);
    }

    #[test]
    fn too_many_failures_abort() {
        let cfg = tiny(Physics::Thermal, Preset::I);
        let problem = Problem::new(0, 1, cfg.boundary.clone()).unwrap();
        let active = cfg.active();
        let good = ParameterTuple::reference(active.clone());
        let bad = ParameterTuple::from_active_values(active, &[-1.0]).unwrap();
        let mut tuples = vec![good.clone(); 10];
        tuples.push(bad.clone());
        let (ok, fails) = fom_batch(&problem, Physics::Thermal, &tuples).unwrap();
        assert_eq!((ok.len(), fails.len(), fails[0].index), (10, 1, 10));
        tuples.push(bad);
        let err = fom_batch(&problem, Physics::Thermal, &tuples).unwrap_err();
        assert!(err.is_numerical(), "{err}");
    }
}
