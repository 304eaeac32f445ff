//! Refines the section, deforms it to a sampled geometry and reports element quality.

use hearth_rom::geometry::{mesh_quality, AffineMapSet, MacroDecomposition, Mesh, ParamId, ParameterTuple};

fn main() -> hearth_rom::error::Result<()> {
    let dec = MacroDecomposition::reference();
    let mesh = Mesh::refine(&dec, 2, 2)?;
    println!("level 2, P2: {} elements, {} nodes, area {:.4} m^2", mesh.elements.len(), mesh.n_nodes(), mesh.area());

    let mut tuple = ParameterTuple::reference(hearth_rom::geometry::ActiveSet::new(ParamId::GEOMETRIC));
    tuple.set(ParamId::T0, 2.6)?;
    tuple.set(ParamId::D4, 10.2)?;
    let maps = AffineMapSet::new(&dec, &tuple.geometric())?;
    let deformed = mesh.map(&maps)?;
    let q = mesh_quality(&deformed);
    println!("deformed area {:.4} m^2, min quality {:.3}", deformed.area(), q.min);
    println!("quality histogram {:?}", q.histogram);
    Ok(())
}
