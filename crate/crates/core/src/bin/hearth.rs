use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hearth_rom::config::{ExperimentConfig, Physics, Preset, Seeds};
use hearth_rom::fem::export::write_field;
use hearth_rom::fem::Field;
use hearth_rom::geometry::io::write_mesh;
use hearth_rom::geometry::{mesh_quality, MacroDecomposition, Mesh};
use hearth_rom::linalg::SolverKind;
use hearth_rom::manufactured::{run_validation, CaseKind, ManufacturedCase};
use hearth_rom::persist::{read_json, write_atomic, write_json};
use hearth_rom::pipeline::{
    analyze_errors, bench, offline_stage, online_stage, sweep_sizes, test_tuples, Method, RunDir,
};
use hearth_rom::problem::Problem;
use hearth_rom::sampling::{lhs_sample, read_samples_csv, write_samples_csv};
use hearth_rom::{Error, Result};

#[derive(Parser)]
#[command(name = "hearth", version, about = "Hearth wall finite elements and reduced order models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the refined reference mesh and its quality histogram.
    Mesh {
        #[arg(long, default_value_t = 1)]
        level: u32,
        #[arg(long, default_value_t = 1)]
        degree: usize,
        #[arg(long, default_value = "mesh")]
        out: PathBuf,
    },
    /// Run the manufactured-solution benchmarks.
    Validate {
        /// thermal, mechanical, coupled or all.
        #[arg(long, default_value = "all")]
        case: String,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        levels: Vec<u32>,
        #[arg(long, default_value = "runs")]
        runs: PathBuf,
    },
    /// Write a Latin hypercube sample of the experiment's parameter box.
    Sample {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Snapshots, bases, reduced operators and network training.
    Offline {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Refuse to run unless a passing `validate` record exists.
        #[arg(long)]
        require_validation: bool,
    },
    /// Evaluate a reduced model at sample tuples.
    Online {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value = "ann")]
        method: String,
        /// Sample CSV; defaults to the run's test tuples.
        #[arg(long)]
        samples: Option<PathBuf>,
        /// Also write reconstructed fields.
        #[arg(long)]
        fields: bool,
    },
    /// Relative and projection errors over a basis-size sweep.
    Analyze {
        #[command(flatten)]
        exp: ExperimentArgs,
    },
    /// Per-query wall-times of the full-order model and both reduced models.
    Bench {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value_t = 20)]
        passes: usize,
    },
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    /// Experiment file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// thermal or mechanical, when no config file is given.
    #[arg(long, default_value = "thermal")]
    physics: String,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    level: Option<u32>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long, default_value = "runs")]
    runs: PathBuf,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => {
                let physics = Physics::from_name(&self.physics)?;
                let preset = Preset::from_name(self.preset.as_deref().unwrap_or("i"))?;
                ExperimentConfig::new(format!("{}-{}", physics.name(), preset.name()), physics, preset)
            }
        };
        if let Some(p) = &self.preset {
            cfg.preset = Preset::from_name(p)?;
        }
        if let Some(s) = self.seed {
            cfg.seeds = Seeds::from_base(s);
        }
        if let Some(l) = self.level {
            cfg.level = l;
        }
        if let Some(d) = self.degree {
            cfg.degree = d;
        }
        if let Some(n) = &self.name {
            cfg.name = n.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// The stored run, checked against any overrides given on the command line.
    fn stored(&self) -> Result<(ExperimentConfig, RunDir)> {
        let wanted = self.resolve()?;
        let dir = RunDir::new(&self.runs, &wanted.name);
        let stored = ExperimentConfig::load(&dir.root.join("config.toml"))
            .map_err(|_| Error::Config(format!("no offline run at {}", dir.root.display())))?;
        if stored != wanted {
            return Err(Error::Config(format!(
                "run {} was built with a different configuration; rerun offline",
                dir.root.display()
            )));
        }
        Ok((stored, dir))
    }
}

fn problem_for(cfg: &ExperimentConfig) -> Result<Problem> {
    Problem::new(cfg.level, cfg.degree, cfg.boundary.clone())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())
}

fn validation_record(runs: &Path) -> PathBuf {
    runs.join("validation").join("reports").join("status.json")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Mesh { level, degree, out } => {
            let mesh = Mesh::refine(&MacroDecomposition::reference(), level, degree)?;
            write_mesh(&mesh, &out, "hearth")?;
            let q = mesh_quality(&mesh);
            let mut csv = String::from("bin_low,bin_high,count\n");
            for (i, c) in q.histogram.iter().enumerate() {
                csv.push_str(&format!("{:.1},{:.1},{c}\n", i as f64 / 10.0, (i + 1) as f64 / 10.0));
            }
            write_text(&out.join("quality.csv"), &csv)?;
            println!(
                "{} elements, {} nodes, min quality {:.4}; written to {}",
                mesh.elements.len(),
                mesh.n_nodes(),
                q.min,
                out.display()
            );
        }
        Command::Validate { case, degree, levels, runs } => {
            let kinds = if case.eq_ignore_ascii_case("all") { CaseKind::ALL.to_vec() } else { vec![CaseKind::from_name(&case)?] };
            let reports_dir = runs.join("validation").join("reports");
            let mut all_pass = true;
            for kind in kinds {
                let report = run_validation(&ManufacturedCase::new(kind), degree, &levels, SolverKind::Auto)?;
                write_text(&reports_dir.join(format!("{}.csv", kind.name())), &report.to_csv())?;
                let pass = report.passes();
                all_pass &= pass;
                for l in &report.levels {
                    let hydro = l.hydrostatic_residual.map(|h| format!(", hydrostatic {h:.2e}")).unwrap_or_default();
                    println!(
                        "{:<10} p={degree} L={} dofs={:<7} rel {:.3e}  L2 {:.3e}{hydro}",
                        kind.name(),
                        l.level,
                        l.n_dofs,
                        l.relative_error,
                        l.relative_l2
                    );
                }
                if !report.h1_slopes.is_empty() {
                    println!("{:<10} H1 slopes {:?}  L2 slopes {:?}", "", report.h1_slopes, report.l2_slopes);
                }
                println!("{:<10} {}", kind.name(), if pass { "PASS" } else { "FAIL" });
            }
            write_json(&validation_record(&runs), &serde_json::json!({ "degree": degree, "levels": levels, "pass": all_pass }))?;
            if !all_pass {
                return Err(Error::InvalidData("manufactured benchmarks above tolerance".into()));
            }
        }
        Command::Sample { exp, n, out } => {
            let cfg = exp.resolve()?;
            let ranges = cfg.parameter_ranges()?;
            let tuples = lhs_sample(&ranges, n, cfg.seeds.snapshots)?;
            write_samples_csv(&out, ranges.active(), &tuples)?;
            println!("{n} tuples over {} parameters written to {}", ranges.active().len(), out.display());
        }
        Command::Offline { exp, require_validation } => {
            if require_validation {
                let status: serde_json::Value = read_json(&validation_record(&exp.runs))
                    .map_err(|_| Error::Config("no validation record; run `hearth validate` first".into()))?;
                if status["pass"] != serde_json::Value::Bool(true) {
                    return Err(Error::Config("the last validation run did not pass".into()));
                }
            }
            let cfg = exp.resolve()?;
            let problem = problem_for(&cfg)?;
            let run = offline_stage(&cfg, &problem)?;
            let dir = RunDir::new(&exp.runs, &cfg.name);
            dir.save(&run)?;
            for f in &run.failures {
                eprintln!("warning: full-order solve {} failed: {}", f.index, f.error);
            }
            for (model, b) in run.models.bases.named() {
                if let Some(w) = &b.truncation.warning {
                    eprintln!("warning: {} basis: {w}", model.tag());
                }
                println!("{:<4} basis: {} modes", model.tag(), b.len());
            }
            let t = &run.timings;
            println!(
                "t_FOM {:.3e} s/solve ({} solves), t_POD {:.3e} s, t_proj {:.3e} s, t_tr {:.3e} s",
                t.fom, t.fom_solves, t.pod, t.projection, t.training
            );
            println!(
                "network: best validation MSE {:.3e} at epoch {} (initial {:.3e})",
                run.history.best_validation_mse, run.history.best_epoch, run.history.initial_validation_mse
            );
            println!("artifacts in {}", dir.root.display());
        }
        Command::Online { exp, method, samples, fields } => {
            let method = Method::from_name(&method)?;
            let (cfg, dir) = exp.stored()?;
            let models = dir.load()?;
            let problem = problem_for(&cfg)?;
            let tuples = match samples {
                Some(p) => {
                    let (active, t) = read_samples_csv(&p)?;
                    if &active != models.ranges.active() {
                        return Err(Error::Config("sample file activates different parameters than the run".into()));
                    }
                    t
                }
                None => test_tuples(&cfg)?,
            };
            let report = online_stage(&models, &problem, &tuples, method)?;
            for (model, csv) in report.to_csv() {
                write_text(&dir.reports().join(format!("online_{}_{}.csv", method.name(), model.tag())), &csv)?;
            }
            for (k, r) in report.records.iter().enumerate() {
                for w in &r.warnings {
                    eprintln!("warning: tuple {k}: {w}");
                }
            }
            if fields {
                let rank = hearth_rom::pipeline::surrogate_model(cfg.physics).rank();
                for (k, (t, r)) in tuples.iter().zip(&report.records).enumerate() {
                    let mesh = problem.mesh_at(t)?;
                    let f = Field::new(rank, models.reconstruct(r));
                    write_field(&mesh, &f, &dir.root.join("fields").join(format!("{}_{k}.txt", method.name())))?;
                }
            }
            println!("{} queries by {}: mean {:.3e} s", report.records.len(), method.name(), report.mean_seconds());
        }
        Command::Analyze { exp } => {
            let (cfg, dir) = exp.stored()?;
            let models = dir.load()?;
            let problem = problem_for(&cfg)?;
            let sizes = sweep_sizes(&cfg, &models);
            let report = analyze_errors(&models, &problem, &test_tuples(&cfg)?, &sizes)?;
            write_text(&dir.reports().join("errors.csv"), &report.summary_csv())?;
            write_text(&dir.reports().join("errors_per_tuple.csv"), &report.per_tuple_csv())?;
            print!("{}", report.summary_csv());
            println!(
                "projection bound holds for {:.1}% of entries; nested: {}",
                100.0 * report.projection_bound_fraction(),
                report.projection_nested()
            );
        }
        Command::Bench { exp, passes } => {
            let (cfg, dir) = exp.stored()?;
            let models = dir.load()?;
            let problem = problem_for(&cfg)?;
            let report = bench(&models, &problem, &test_tuples(&cfg)?, passes)?;
            write_text(&dir.reports().join("bench.csv"), &report.to_csv())?;
            print!("{}", report.to_csv());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
