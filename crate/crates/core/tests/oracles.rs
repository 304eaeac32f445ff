//! Independent checks of the reduced models against quantities computed from scratch.

use nalgebra::{DMatrix, DVector};

use hearth_rom::config::{ExperimentConfig, Physics, Preset};
use hearth_rom::fem::{assemble_thermal, Model};
use hearth_rom::pipeline::{analyze_errors, bench, offline_stage, test_tuples, Method, ReferenceProducts};
use hearth_rom::pod::{snapshot_basis, Truncation};
use hearth_rom::problem::Problem;
use hearth_rom::rom_ann::Dataset;
use hearth_rom::rom_galerkin::{GalerkinBases, GalerkinRom};
use hearth_rom::sampling::lhs_sample;

fn small(physics: Physics, preset: Preset, level: u32) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new("oracle", physics, preset);
    cfg.level = level;
    cfg.snapshots = Some(16);
    cfg.training_samples = Some(16);
    cfg.test_samples = 6;
    cfg.training.max_epochs = 30;
    cfg
}

fn energy(a: &hearth_rom::linalg::CsrMatrix, v: &[f64]) -> f64 {
    a.bilinear(v, v).sqrt()
}

#[test]
fn galerkin_error_is_optimal_in_the_energy_norm() {
    let mut cfg = small(Physics::Thermal, Preset::Iv, 1);
    cfg.truncation = Truncation::Fixed(3);
    let problem = Problem::new(cfg.level, cfg.degree, cfg.boundary.clone()).unwrap();
    let run = offline_stage(&cfg, &problem).unwrap();
    let rom = &run.models.galerkin;
    let basis = &run.models.bases.thermal;
    for t in test_tuples(&cfg).unwrap() {
        let mesh = problem.mesh_at(&t).unwrap();
        let system = assemble_thermal(&mesh, &problem.thermal_data(&t)).unwrap();
        let a = &system.matrix;
        let exact = problem.temperature(&t).unwrap().values;
        let galerkin = basis.reconstruct(&rom.solve(&problem.decomposition, &t).unwrap().thermal);

        let av: Vec<Vec<f64>> = basis.modes.iter().map(|m| a.mul_vec(m)).collect();
        let n = basis.len();
        let gram = DMatrix::from_fn(n, n, |i, j| basis.modes[i].iter().zip(&av[j]).map(|(x, y)| x * y).sum());
        let rhs = DVector::from_fn(n, |i, _| av[i].iter().zip(&exact).map(|(x, y)| x * y).sum());
        let c = gram.cholesky().unwrap().solve(&rhs);
        let best = basis.reconstruct(c.as_slice());

        let err = |v: &[f64]| energy(a, &exact.iter().zip(v).map(|(x, y)| x - y).collect::<Vec<_>>());
        let scale = energy(a, &exact);
        assert!(err(&galerkin) <= err(&best) + 1e-9 * scale, "{} > {}", err(&galerkin), err(&best));
        // Any other member of the space, here the H1r projection, does no better.
        let h1 = basis.reconstruct(&basis.project(&ReferenceProducts::new(&problem, Physics::Thermal).unwrap().scalar, &exact).unwrap().0);
        assert!(err(&galerkin) <= err(&h1) + 1e-9 * scale);
    }
}

#[test]
fn four_mode_thermal_galerkin_is_near_its_projection() {
    let mut cfg = small(Physics::Thermal, Preset::Iv, 1);
    cfg.snapshots = Some(40);
    cfg.truncation = Truncation::Fixed(4);
    let problem = Problem::new(cfg.level, cfg.degree, cfg.boundary.clone()).unwrap();
    let run = offline_stage(&cfg, &problem).unwrap();
    let tuples = test_tuples(&cfg).unwrap();
    let report = analyze_errors(&run.models, &problem, &tuples, &[4]).unwrap();
    let row = report.rows.iter().find(|r| r.method == Method::Galerkin && r.n == 4).unwrap();
    for (eps, proj) in row.relative.iter().zip(&row.projection) {
        assert!(*eps <= 10.0 * proj, "relative {eps:.3e} vs projection {proj:.3e}");
    }
}

#[test]
fn full_rank_targets_reconstruct_their_snapshots() {
    let cfg = small(Physics::Mechanical, Preset::Ii, 0);
    let problem = Problem::new(cfg.level, cfg.degree, cfg.boundary.clone()).unwrap();
    let ranges = cfg.parameter_ranges().unwrap();
    let ips = ReferenceProducts::new(&problem, Physics::Mechanical).unwrap();
    let ip = ips.vector.as_ref().unwrap();
    let tuples = lhs_sample(&ranges, 10, 8).unwrap();
    let fields: Vec<Vec<f64>> = tuples
        .iter()
        .map(|t| {
            let temp = problem.temperature(t).unwrap();
            let u = problem.displacement(t, &temp).unwrap();
            u.loads.values.iter().zip(&u.thermal.values).map(|(a, b)| a + b).collect()
        })
        .collect();
    let basis = snapshot_basis(&fields, ip).unwrap();
    let data = Dataset::build(Model::Mechanical, &ranges, &tuples, &fields, &basis, ip, 0.7, 1).unwrap();
    for (z, u) in data.targets.iter().zip(&fields) {
        let back = basis.reconstruct(z);
        let diff: Vec<f64> = u.iter().zip(&back).map(|(a, b)| a - b).collect();
        assert!((ip.inner_raw(&diff, &diff) / ip.inner_raw(u, u)).sqrt() <= 1e-9);
    }
}

#[test]
fn mechanical_network_targets_the_monolithic_displacement() {
    let cfg = small(Physics::Mechanical, Preset::I, 0);
    let problem = Problem::new(cfg.level, cfg.degree, cfg.boundary.clone()).unwrap();
    let run = offline_stage(&cfg, &problem).unwrap();
    assert_eq!(run.models.ann.model, Model::Mechanical);
    assert_eq!(Some(&run.models.ann.basis), run.models.bases.monolithic.as_ref());
}

#[test]
fn network_cost_does_not_grow_with_the_mesh() {
    let mut times = Vec::new();
    for level in [1, 3] {
        let mut cfg = small(Physics::Thermal, Preset::Ii, level);
        cfg.truncation = Truncation::Fixed(3);
        let problem = Problem::new(cfg.level, cfg.degree, cfg.boundary.clone()).unwrap();
        let run = offline_stage(&cfg, &problem).unwrap();
        times.push(bench(&run.models, &problem, &test_tuples(&cfg).unwrap(), 7).unwrap().ann);
    }
    let ratio = times[0].max(times[1]) / times[0].min(times[1]);
    assert!(ratio < 2.0, "network time at level 1 vs 3: {times:?}");
}

#[test]
fn galerkin_bases_from_the_split_reproduce_the_monolithic_field() {
    let cfg = small(Physics::Mechanical, Preset::Iii, 0);
    let problem = Problem::new(cfg.level, cfg.degree, cfg.boundary.clone()).unwrap();
    let run = offline_stage(&cfg, &problem).unwrap();
    let ips = ReferenceProducts::new(&problem, Physics::Mechanical).unwrap();
    let ip = ips.vector.as_ref().unwrap();
    let temps: Vec<Vec<f64>> = run.snapshots.iter().map(|s| s.temperature.clone()).collect();
    let loads: Vec<Vec<f64>> = run.snapshots.iter().map(|s| s.loads.clone().unwrap()).collect();
    let stress: Vec<Vec<f64>> = run.snapshots.iter().map(|s| s.thermal_stress.clone().unwrap()).collect();
    let (bt, bl, bs) = (
        snapshot_basis(&temps, &ips.scalar).unwrap(),
        snapshot_basis(&loads, ip).unwrap(),
        snapshot_basis(&stress, ip).unwrap(),
    );
    let rom = GalerkinRom::build(
        &problem,
        run.models.ranges.clone(),
        GalerkinBases { thermal: &bt, loads: Some(&bl), thermal_stress: Some(&bs) },
    )
    .unwrap();
    let snap = &run.snapshots[3];
    let u = rom.displacement(&rom.solve(&problem.decomposition, &snap.tuple).unwrap()).unwrap();
    let exact = snap.displacement().unwrap();
    let diff: Vec<f64> = exact.iter().zip(&u.values).map(|(a, b)| a - b).collect();
    assert!((ip.inner_raw(&diff, &diff) / ip.inner_raw(&exact, &exact)).sqrt() <= 1e-8);
}
