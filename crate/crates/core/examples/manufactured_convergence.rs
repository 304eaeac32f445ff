//! Convergence of linear elements on the manufactured thermal and mechanical cases.

use hearth_rom::linalg::SolverKind;
use hearth_rom::manufactured::{run_validation, CaseKind, ManufacturedCase};

fn main() -> hearth_rom::error::Result<()> {
    for kind in [CaseKind::Thermal, CaseKind::Mechanical] {
        let report = run_validation(&ManufacturedCase::new(kind), 1, &[1, 2, 3], SolverKind::Auto)?;
        print!("{}", report.to_csv());
        println!("H1 slopes {:.2?}, L2 slopes {:.2?}", report.h1_slopes, report.l2_slopes);
    }
    let cubic = run_validation(&ManufacturedCase::new(CaseKind::Coupled), 3, &[1], SolverKind::Direct)?;
    println!("coupled P3: relative error {:.2e}, passes {}", cubic.max_relative_error(), cubic.passes());
    Ok(())
}
