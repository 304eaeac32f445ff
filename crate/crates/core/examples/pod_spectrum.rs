//! Temperature snapshots over the conductivity range and their POD spectrum.

use hearth_rom::config::{Physics, Preset};
use hearth_rom::pipeline::ReferenceProducts;
use hearth_rom::pod::{pod_basis, Truncation};
use hearth_rom::problem::Problem;
use hearth_rom::sampling::{lhs_sample, ParameterRanges};

fn main() -> hearth_rom::error::Result<()> {
    let problem = Problem::new(1, 2, Default::default())?;
    let ranges = ParameterRanges::defaults(Preset::Ii.active(Physics::Thermal));
    let snapshots = lhs_sample(&ranges, 30, 1)?
        .iter()
        .map(|t| problem.temperature(t).map(|f| f.values))
        .collect::<hearth_rom::error::Result<Vec<_>>>()?;
    let ips = ReferenceProducts::new(&problem, Physics::Thermal)?;
    let basis = pod_basis(&snapshots, &ips.scalar, Truncation::Ratio(1e-4))?;
    for (i, t) in basis.eigenvalues.iter().take(8).enumerate() {
        println!("{:>2} {:.3e} {:.3e}", i + 1, t, t / basis.eigenvalues[0]);
    }
    println!("retained {} modes, orthonormality defect {:.1e}", basis.len(), basis.orthonormality_defect(&ips.scalar));
    Ok(())
}
