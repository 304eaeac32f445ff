//! Plain-text mesh files.
//!
//! A mesh `stem` is written as three whitespace-separated tables, one record per line,
//! lines starting with `#` are comments:
//!
//! * `stem.nodes`: `id r y`
//! * `stem.elements`: `id subdomain n0 n1 ... nk` (the first three nodes are the vertices)
//! * `stem.boundary`: `v0 v1 tag` with the solid on the left of `v0 -> v1`

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use super::{BoundaryTag, Mesh, Point};
use crate::error::{Error, Result};

fn path(dir: &Path, stem: &str, ext: &str) -> PathBuf {
    dir.join(format!("{stem}.{ext}"))
}

pub fn write_mesh(mesh: &Mesh, dir: &Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(path(dir, stem, "nodes"))?);
    writeln!(w, "# id r y (level {}, degree {})", mesh.level, mesh.degree)?;
    for (i, n) in mesh.nodes.iter().enumerate() {
        writeln!(w, "{i} {:.17e} {:.17e}", n.r, n.y)?;
    }
    w.flush()?;

    let mut w = BufWriter::new(File::create(path(dir, stem, "elements"))?);
    writeln!(w, "# id subdomain nodes...")?;
    for (e, el) in mesh.elements.iter().enumerate() {
        write!(w, "{e} {}", el.subdomain)?;
        for n in mesh.element_nodes(e) {
            write!(w, " {n}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;

    let mut w = BufWriter::new(File::create(path(dir, stem, "boundary"))?);
    writeln!(w, "# v0 v1 tag")?;
    for b in &mesh.boundary {
        writeln!(w, "{} {} {}", b.vertices[0], b.vertices[1], b.tag.name())?;
    }
    w.flush()?;
    Ok(())
}

/// Tables of a mesh read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct MeshRecords {
    pub nodes: Vec<Point>,
    pub elements: Vec<(usize, Vec<usize>)>,
    pub boundary: Vec<([usize; 2], BoundaryTag)>,
}

fn records(file: &Path) -> Result<Vec<Vec<String>>> {
    let reader = BufReader::new(File::open(file)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        out.push(line.split_whitespace().map(str::to_owned).collect());
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(file: &Path, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Format {
        path: file.display().to_string(),
        reason: format!("cannot parse '{s}'"),
    })
}

pub fn read_mesh(dir: &Path, stem: &str) -> Result<MeshRecords> {
    let f = path(dir, stem, "nodes");
    let mut nodes = Vec::new();
    for rec in records(&f)? {
        if rec.len() != 3 {
            return Err(Error::Format { path: f.display().to_string(), reason: "expected 3 columns".into() });
        }
        nodes.push(Point::new(parse(&f, &rec[1])?, parse(&f, &rec[2])?));
    }
    let f = path(dir, stem, "elements");
    let mut elements = Vec::new();
    for rec in records(&f)? {
        if rec.len() < 5 {
            return Err(Error::Format { path: f.display().to_string(), reason: "too few columns".into() });
        }
        let sub = parse(&f, &rec[1])?;
        let ids = rec[2..].iter().map(|s| parse(&f, s)).collect::<Result<Vec<usize>>>()?;
        elements.push((sub, ids));
    }
    let f = path(dir, stem, "boundary");
    let mut boundary = Vec::new();
    for rec in records(&f)? {
        if rec.len() != 3 {
            return Err(Error::Format { path: f.display().to_string(), reason: "expected 3 columns".into() });
        }
        let tag = BoundaryTag::from_name(&rec[2]).ok_or_else(|| Error::Format {
            path: f.display().to_string(),
            reason: format!("unknown tag '{}'", rec[2]),
        })?;
        boundary.push(([parse(&f, &rec[0])?, parse(&f, &rec[1])?], tag));
    }
    Ok(MeshRecords { nodes, elements, boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MacroDecomposition;

    #[test]
    fn written_mesh_reads_back() {
        let mesh = Mesh::refine(&MacroDecomposition::reference(), 1, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_mesh(&mesh, dir.path(), "hearth").unwrap();
        let back = read_mesh(dir.path(), "hearth").unwrap();
        assert_eq!(back.nodes, mesh.nodes);
        assert_eq!(back.elements.len(), mesh.elements.len());
        assert_eq!(back.elements[7].1, mesh.element_nodes(7));
        assert_eq!(back.boundary.len(), mesh.boundary.len());
        assert_eq!(back.boundary[3].1, mesh.boundary[3].tag);
    }
}
