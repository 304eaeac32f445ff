use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::space::Field;
use super::stress::StressState;
use crate::error::Result;
use crate::geometry::Mesh;

/// Writes `node r y value...` lines, one per mesh node.
pub fn write_field(mesh: &Mesh, field: &Field, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let c = field.rank.components();
    writeln!(w, "# node r y {}", if c == 1 { "value" } else { "u_r u_y" })?;
    for (n, p) in mesh.nodes.iter().enumerate() {
        write!(w, "{n} {:.17e} {:.17e}", p.r, p.y)?;
        for k in 0..c {
            write!(w, " {:.17e}", field.at(n, k))?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Stress table as CSV with von Mises and mean stress columns.
pub fn write_stress_csv(state: &StressState, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["r", "y", "s_rr", "s_yy", "s_tt", "s_ry", "von_mises", "mean"])?;
    for (p, s) in state.points.iter().zip(&state.stress) {
        let mut rec = vec![p.r, p.y];
        rec.extend_from_slice(&s.0);
        rec.push(s.von_mises());
        rec.push(s.mean());
        w.write_record(rec.iter().map(|v| format!("{v:.10e}")))?;
    }
    w.flush()?;
    Ok(())
}
