//! Trains the coefficient network for the thermal field and queries it.

use hearth_rom::config::{ExperimentConfig, Physics, Preset};
use hearth_rom::pipeline::{offline_stage, test_tuples, Method};
use hearth_rom::problem::Problem;

fn main() -> hearth_rom::error::Result<()> {
    let mut cfg = ExperimentConfig::new("ann", Physics::Thermal, Preset::Iii);
    cfg.snapshots = Some(60);
    cfg.training_samples = Some(200);
    let problem = Problem::new(cfg.level, cfg.degree, cfg.boundary.clone())?;
    let run = offline_stage(&cfg, &problem)?;
    let h = &run.history;
    println!(
        "validation MSE {:.3e} -> {:.3e} at epoch {} of {}",
        h.initial_validation_mse,
        h.best_validation_mse,
        h.best_epoch,
        h.epochs.len()
    );
    for t in test_tuples(&cfg)?.iter().take(3) {
        let record = run.models.query(&problem, t, Method::Ann)?;
        let field = run.models.reconstruct(&record);
        let peak = field.iter().copied().fold(f64::MIN, f64::max);
        println!("{:.1e}s per query, peak temperature {peak:.1} K", record.seconds);
    }
    Ok(())
}
