//! Builds a POD-Galerkin model of the split displacement and compares it with the full solve.

use hearth_rom::config::{ExperimentConfig, Physics, Preset};
use hearth_rom::pipeline::{fom_batch, solve_fom, test_tuples, build_bases, ReferenceProducts};
use hearth_rom::problem::Problem;
use hearth_rom::rom_galerkin::{GalerkinBases, GalerkinRom};
use hearth_rom::sampling::lhs_sample;

fn main() -> hearth_rom::error::Result<()> {
    let mut cfg = ExperimentConfig::new("galerkin", Physics::Mechanical, Preset::Ii);
    cfg.snapshots = Some(40);
    let problem = Problem::new(cfg.level, cfg.degree, cfg.boundary.clone())?;
    let ranges = cfg.parameter_ranges()?;
    let (snapshots, _) = fom_batch(&problem, cfg.physics, &lhs_sample(&ranges, cfg.n_snapshots(), 1)?)?;
    let ips = ReferenceProducts::new(&problem, cfg.physics)?;
    let bases = build_bases(&cfg, &ips, &snapshots)?;
    let rom = GalerkinRom::build(
        &problem,
        ranges,
        GalerkinBases { thermal: &bases.thermal, loads: bases.loads.as_ref(), thermal_stress: bases.thermal_stress.as_ref() },
    )?;
    let ip = ips.vector.as_ref().expect("mechanical runs have a vector product");
    for t in test_tuples(&cfg)?.iter().take(5) {
        let start = std::time::Instant::now();
        let u = rom.displacement(&rom.solve(&problem.decomposition, t)?).expect("mechanical model");
        let online = start.elapsed().as_secs_f64();
        let exact = solve_fom(&problem, cfg.physics, t)?.displacement().expect("displacement");
        let diff: Vec<f64> = exact.iter().zip(&u.values).map(|(a, b)| a - b).collect();
        let err = (ip.inner_raw(&diff, &diff) / ip.inner_raw(&exact, &exact)).sqrt();
        println!("relative error {err:.2e} in {online:.1e}s");
    }
    Ok(())
}
