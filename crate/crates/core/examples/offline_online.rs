//! The full workflow on a small mechanical experiment: offline stage, storage, reload, errors.

use hearth_rom::config::{ExperimentConfig, Physics, Preset};
use hearth_rom::pipeline::{analyze_errors, offline_stage, sweep_sizes, test_tuples, RunDir};
use hearth_rom::problem::Problem;

fn main() -> hearth_rom::error::Result<()> {
    let mut cfg = ExperimentConfig::new("demo", Physics::Mechanical, Preset::Ii);
    cfg.level = 0;
    cfg.snapshots = Some(30);
    cfg.training_samples = Some(60);
    let problem = Problem::new(cfg.level, cfg.degree, cfg.boundary.clone())?;
    let run = offline_stage(&cfg, &problem)?;
    print!("{}", run.timings.to_csv());

    let dir = std::env::temp_dir().join("hearth-demo");
    let rd = RunDir::new(&dir, &cfg.name);
    rd.save(&run)?;
    let models = rd.load()?;
    let report = analyze_errors(&models, &problem, &test_tuples(&cfg)?, &sweep_sizes(&cfg, &models))?;
    print!("{}", report.summary_csv());
    println!("artifacts in {}", rd.root.display());
    Ok(())
}
