use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::decomposition::{signed_area, BoundaryTag, MacroDecomposition};
use super::maps::AffineMapSet;
use super::Point;
use crate::error::{Error, Result};
use crate::fem::lagrange;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub vertices: [usize; 3],
    pub subdomain: usize,
}

/// Boundary edge of a mesh, oriented with the solid on its left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub element: usize,
    pub local_edge: usize,
    pub tag: BoundaryTag,
}

/// Conforming triangulation carrying a degree-`p` node layout.
///
/// Node ids `0..vertices.len()` coincide with vertex ids; higher-order nodes follow.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub level: u32,
    pub degree: usize,
    pub vertices: Vec<Point>,
    pub elements: Vec<Element>,
    pub boundary: Vec<BoundaryEdge>,
    pub nodes: Vec<Point>,
    element_nodes: Vec<usize>,
    node_subdomain: Vec<usize>,
}

impl Mesh {
    /// Uniform refinement of the macro decomposition with `4^level` children per triangle.
    pub fn refine(macro_mesh: &MacroDecomposition, level: u32, degree: usize) -> Result<Mesh> {
        if !(1..=3).contains(&degree) {
            return Err(Error::InvalidParameter(format!("element degree {degree} not in 1..=3")));
        }
        let mut vertices = macro_mesh.reference_positions();
        let mut elements: Vec<Element> = macro_mesh
            .triangles
            .iter()
            .enumerate()
            .map(|(i, t)| Element { vertices: t.vertices, subdomain: i })
            .collect();
        let mut edges: Vec<([usize; 2], BoundaryTag)> =
            macro_mesh.boundary.iter().map(|e| (e.vertices, e.tag)).collect();

        for _ in 0..level {
            let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
            let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
                *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let (p, q) = (vertices[a], vertices[b]);
                    vertices.push(Point::new(0.5 * (p.r + q.r), 0.5 * (p.y + q.y)));
                    vertices.len() - 1
                })
            };
            let mut next = Vec::with_capacity(elements.len() * 4);
            for e in &elements {
                let [a, b, c] = e.vertices;
                let ab = mid(a, b, &mut vertices);
                let bc = mid(b, c, &mut vertices);
                let ca = mid(c, a, &mut vertices);
                for v in [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]] {
                    next.push(Element { vertices: v, subdomain: e.subdomain });
                }
            }
            elements = next;
            let mut split = Vec::with_capacity(edges.len() * 2);
            for ([a, b], tag) in &edges {
                let m = mid(*a, *b, &mut vertices);
                split.push(([*a, m], *tag));
                split.push(([m, *b], *tag));
            }
            edges = split;
        }

        let mut directed = HashMap::new();
        for (i, e) in elements.iter().enumerate() {
            for k in 0..3 {
                directed.insert((e.vertices[k], e.vertices[(k + 1) % 3]), (i, k));
            }
        }
        let boundary = edges
            .into_iter()
            .map(|(v, tag)| {
                let (element, local_edge) = directed[&(v[0], v[1])];
                BoundaryEdge { vertices: v, element, local_edge, tag }
            })
            .collect();

        let mut mesh = Mesh {
            level,
            degree,
            vertices,
            elements,
            boundary,
            nodes: Vec::new(),
            element_nodes: Vec::new(),
            node_subdomain: Vec::new(),
        };
        mesh.build_nodes();
        Ok(mesh)
    }

    fn build_nodes(&mut self) {
        let p = self.degree;
        let lat = lagrange::lattice(p);
        let nv = self.vertices.len();
        let mut nodes = self.vertices.clone();
        let mut subdomain = vec![usize::MAX; nv];
        let mut edge_ids: HashMap<(usize, usize, usize), usize> = HashMap::new();
        let mut element_nodes = Vec::with_capacity(self.elements.len() * lat.len());
        for e in &self.elements {
            let pts = e.vertices.map(|v| self.vertices[v]);
            for idx in &lat {
                let nonzero: Vec<usize> = (0..3).filter(|&c| idx[c] > 0).collect();
                let id = match nonzero.len() {
                    1 => e.vertices[nonzero[0]],
                    2 => {
                        let (ca, cb) = (nonzero[0], nonzero[1]);
                        let (va, vb) = (e.vertices[ca], e.vertices[cb]);
                        let key = if va < vb { (va, vb, idx[ca]) } else { (vb, va, idx[cb]) };
                        *edge_ids.entry(key).or_insert_with(|| {
                            nodes.push(lattice_point(pts, *idx, p));
                            subdomain.push(e.subdomain);
                            nodes.len() - 1
                        })
                    }
                    _ => {
                        nodes.push(lattice_point(pts, *idx, p));
                        subdomain.push(e.subdomain);
                        nodes.len() - 1
                    }
                };
                if id < nv && subdomain[id] == usize::MAX {
                    subdomain[id] = e.subdomain;
                }
                element_nodes.push(id);
            }
        }
        self.nodes = nodes;
        self.element_nodes = element_nodes;
        self.node_subdomain = subdomain;
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes_per_element(&self) -> usize {
        lagrange::n_local(self.degree)
    }

    pub fn element_nodes(&self, e: usize) -> &[usize] {
        let k = self.nodes_per_element();
        &self.element_nodes[e * k..(e + 1) * k]
    }

    pub fn element_points(&self, e: usize) -> [Point; 3] {
        self.elements[e].vertices.map(|v| self.vertices[v])
    }

    /// Nodes lying on a boundary edge, in edge order.
    pub fn boundary_edge_nodes(&self, edge: &BoundaryEdge) -> Vec<usize> {
        let local = lagrange::edge_local_nodes(self.degree, edge.local_edge);
        let nodes = self.element_nodes(edge.element);
        local.into_iter().map(|n| nodes[n]).collect()
    }

    pub fn node_subdomain(&self, n: usize) -> usize {
        self.node_subdomain[n]
    }

    pub fn n_subdomains(&self) -> usize {
        self.elements.iter().map(|e| e.subdomain + 1).max().unwrap_or(0)
    }

    /// Moves every vertex and node by the map of its subdomain.
    pub fn map(&self, maps: &AffineMapSet) -> Result<Mesh> {
        if maps.len() != self.n_subdomains() {
            return Err(Error::DimensionMismatch { expected: self.n_subdomains(), found: maps.len() });
        }
        let mut out = self.clone();
        for (i, node) in out.nodes.iter_mut().enumerate() {
            *node = maps.maps[self.node_subdomain[i]].apply(*node);
        }
        out.vertices.copy_from_slice(&out.nodes[..self.vertices.len()]);
        Ok(out)
    }

    pub fn area(&self) -> f64 {
        (0..self.elements.len())
            .map(|e| {
                let [a, b, c] = self.element_points(e);
                signed_area(a, b, c)
            })
            .sum()
    }

    pub fn subdomain_area(&self, subdomain: usize) -> f64 {
        (0..self.elements.len())
            .filter(|&e| self.elements[e].subdomain == subdomain)
            .map(|e| {
                let [a, b, c] = self.element_points(e);
                signed_area(a, b, c)
            })
            .sum()
    }
}

fn lattice_point(pts: [Point; 3], idx: [usize; 3], p: usize) -> Point {
    let w = idx.map(|c| c as f64 / p as f64);
    Point::new(
        w[0] * pts[0].r + w[1] * pts[1].r + w[2] * pts[2].r,
        w[0] * pts[0].y + w[1] * pts[1].y + w[2] * pts[2].y,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::params::GeometricParams;

    fn macro_mesh() -> MacroDecomposition {
        MacroDecomposition::reference()
    }

    #[test]
    fn element_counts() {
        let m = macro_mesh();
        for (level, count) in [(0, 30), (1, 120), (2, 480)] {
            assert_eq!(Mesh::refine(&m, level, 1).unwrap().elements.len(), count);
        }
    }

    #[test]
    fn interior_edges_shared_by_two_elements() {
        let mesh = Mesh::refine(&macro_mesh(), 1, 1).unwrap();
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &mesh.elements {
            for k in 0..3 {
                let (a, b) = (e.vertices[k], e.vertices[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let on_boundary = count.values().filter(|&&c| c == 1).count();
        assert_eq!(on_boundary, mesh.boundary.len());
        assert!(count.values().all(|&c| c == 1 || c == 2));
    }

    #[test]
    fn refinement_preserves_area() {
        let m = macro_mesh();
        let a0 = Mesh::refine(&m, 0, 1).unwrap().area();
        let a3 = Mesh::refine(&m, 3, 1).unwrap().area();
        assert!((a0 - a3).abs() < 1e-12 * a0);
    }

    #[test]
    fn axis_vertices_lie_on_axis_edges() {
        let mesh = Mesh::refine(&macro_mesh(), 2, 2).unwrap();
        let mut on_axis = std::collections::HashSet::new();
        for e in mesh.boundary.iter().filter(|e| e.tag == BoundaryTag::Axis) {
            on_axis.extend(mesh.boundary_edge_nodes(e));
        }
        for (i, n) in mesh.nodes.iter().enumerate() {
            assert!(n.r >= 0.0);
            if n.r == 0.0 {
                assert!(on_axis.contains(&i), "node {i} on r = 0 but not tagged axis");
            }
        }
    }

    #[test]
    fn node_counts_by_degree() {
        let m = macro_mesh();
        let mesh1 = Mesh::refine(&m, 1, 1).unwrap();
        let nv = mesh1.vertices.len();
        let ne = mesh1.elements.len();
        let n_edges = nv + ne - 1;
        assert_eq!(Mesh::refine(&m, 1, 2).unwrap().n_nodes(), nv + n_edges);
        assert_eq!(Mesh::refine(&m, 1, 3).unwrap().n_nodes(), nv + 2 * n_edges + ne);
    }

    #[test]
    fn high_order_nodes_are_shared_consistently() {
        let mesh = Mesh::refine(&macro_mesh(), 1, 3).unwrap();
        let lat = lagrange::lattice(3);
        for e in 0..mesh.elements.len() {
            let pts = mesh.element_points(e);
            for (k, &n) in mesh.element_nodes(e).iter().enumerate() {
                let q = lattice_point(pts, lat[k], 3);
                assert!((q.r - mesh.nodes[n].r).abs() < 1e-12 && (q.y - mesh.nodes[n].y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_map_is_bitwise_identity() {
        let mesh = Mesh::refine(&macro_mesh(), 2, 2).unwrap();
        let mapped = mesh.map(&AffineMapSet::identity(30)).unwrap();
        assert_eq!(mapped, mesh);
    }

    #[test]
    fn mapped_subdomain_area_scales_by_determinant() {
        let m = macro_mesh();
        let mesh = Mesh::refine(&m, 2, 1).unwrap();
        let mut g = GeometricParams::reference();
        g.thickness = [2.38, 0.55, 0.66, 0.44, 3.1];
        g.diameter = [13.8, 8.6, 9.0, 10.0, 10.7];
        let maps = AffineMapSet::new(&m, &g).unwrap();
        let mapped = mesh.map(&maps).unwrap();
        for s in 0..30 {
            let expect = maps.maps[s].det() * mesh.subdomain_area(s);
            assert!((mapped.subdomain_area(s) - expect).abs() < 1e-12 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn inverse_parameters_recover_reference() {
        let m = macro_mesh();
        let mesh = Mesh::refine(&m, 2, 2).unwrap();
        let mut g = GeometricParams::reference();
        g.thickness[4] = 3.3;
        g.diameter[1] = 8.4;
        let maps = AffineMapSet::new(&m, &g).unwrap();
        let inverse = AffineMapSet { maps: maps.maps.iter().map(|a| a.inverse()).collect() };
        let back = mesh.map(&maps).unwrap().map(&inverse).unwrap();
        for (a, b) in back.nodes.iter().zip(&mesh.nodes) {
            assert!((a.r - b.r).abs() < 1e-12 && (a.y - b.y).abs() < 1e-12);
        }
    }
}
