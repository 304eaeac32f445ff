//! Draws a Latin hypercube design over the ten geometric parameters and splits it.

use hearth_rom::geometry::{ActiveSet, ParamId};
use hearth_rom::sampling::{lhs_sample, split, ParameterRanges};

fn main() -> hearth_rom::error::Result<()> {
    let ranges = ParameterRanges::defaults(ActiveSet::new(ParamId::GEOMETRIC));
    let tuples = lhs_sample(&ranges, 10, 7)?;
    for t in &tuples {
        let row: Vec<String> = t.active_values().iter().map(|v| format!("{v:.3}")).collect();
        println!("{}", row.join(" "));
    }
    let (train, validation) = split(&tuples, 0.7, 3)?;
    println!("{} training, {} validation", train.len(), validation.len());
    Ok(())
}
