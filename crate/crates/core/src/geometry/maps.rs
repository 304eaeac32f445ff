use serde::{Deserialize, Serialize};

use super::decomposition::MacroDecomposition;
use super::params::GeometricParams;
use super::Point;
use crate::error::{Error, Result};

/// Smallest admissible map determinant.
pub const MIN_DETERMINANT: f64 = 1e-12;

/// Affine map `x = G x̂ + c` of one subdomain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub g: [[f64; 2]; 2],
    pub c: [f64; 2],
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap { g: [[1.0, 0.0], [0.0, 1.0]], c: [0.0, 0.0] };

    /// The unique map taking the reference triangle `from` onto `to`.
    ///
    /// Built from vertex displacements so that a motionless triangle yields the
    /// identity exactly.
    pub fn from_triangles(from: [Point; 3], to: [Point; 3]) -> AffineMap {
        let e1 = [from[1].r - from[0].r, from[1].y - from[0].y];
        let e2 = [from[2].r - from[0].r, from[2].y - from[0].y];
        let det = e1[0] * e2[1] - e2[0] * e1[1];
        let inv = [[e2[1] / det, -e2[0] / det], [-e1[1] / det, e1[0] / det]];
        let d: [[f64; 2]; 3] = std::array::from_fn(|k| [to[k].r - from[k].r, to[k].y - from[k].y]);
        let d1 = [d[1][0] - d[0][0], d[1][1] - d[0][1]];
        let d2 = [d[2][0] - d[0][0], d[2][1] - d[0][1]];
        let mut g = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let dg = d1[i] * inv[0][j] + d2[i] * inv[1][j];
                g[i][j] = if i == j { 1.0 + dg } else { dg };
            }
        }
        let c = [
            d[0][0] - ((g[0][0] - 1.0) * from[0].r + g[0][1] * from[0].y),
            d[0][1] - (g[1][0] * from[0].r + (g[1][1] - 1.0) * from[0].y),
        ];
        AffineMap { g, c }
    }

    pub fn apply(&self, p: Point) -> Point {
        Point::new(
            self.g[0][0] * p.r + self.g[0][1] * p.y + self.c[0],
            self.g[1][0] * p.r + self.g[1][1] * p.y + self.c[1],
        )
    }

    pub fn det(&self) -> f64 {
        self.g[0][0] * self.g[1][1] - self.g[0][1] * self.g[1][0]
    }

    pub fn inverse_matrix(&self) -> [[f64; 2]; 2] {
        let d = self.det();
        [[self.g[1][1] / d, -self.g[0][1] / d], [-self.g[1][0] / d, self.g[0][0] / d]]
    }

    pub fn inverse(&self) -> AffineMap {
        let gi = self.inverse_matrix();
        let c = [
            -(gi[0][0] * self.c[0] + gi[0][1] * self.c[1]),
            -(gi[1][0] * self.c[0] + gi[1][1] * self.c[1]),
        ];
        AffineMap { g: gi, c }
    }
}

/// One affine map per macro subdomain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMapSet {
    pub maps: Vec<AffineMap>,
}

impl AffineMapSet {
    pub fn identity(n: usize) -> Self {
        AffineMapSet { maps: vec![AffineMap::IDENTITY; n] }
    }

    /// Maps sending every macro triangle onto its parametrized position.
    pub fn new(macro_mesh: &MacroDecomposition, g: &GeometricParams) -> Result<Self> {
        let target = macro_mesh.vertex_positions(g)?;
        let source = macro_mesh.reference_positions();
        let mut maps = Vec::with_capacity(macro_mesh.triangles.len());
        for t in 0..macro_mesh.triangles.len() {
            let m = AffineMap::from_triangles(
                macro_mesh.triangle_points(&source, t),
                macro_mesh.triangle_points(&target, t),
            );
            let det = m.det();
            if !(det > MIN_DETERMINANT) {
                return Err(Error::InvertedSubdomain { subdomain: t, det });
            }
            maps.push(m);
        }
        Ok(AffineMapSet { maps })
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::decomposition::signed_area;

    #[test]
    fn reference_maps_are_identities() {
        let m = MacroDecomposition::reference();
        let set = AffineMapSet::new(&m, &GeometricParams::reference()).unwrap();
        assert_eq!(set.len(), 30);
        for map in &set.maps {
            assert_eq!(*map, AffineMap::IDENTITY);
        }
    }

    #[test]
    fn outer_radius_stretch() {
        let m = MacroDecomposition::reference();
        let mut g = GeometricParams::reference();
        g.diameter[0] = 15.1;
        let set = AffineMapSet::new(&m, &g).unwrap();
        let p = m.reference_positions();
        let mut stretched = 0;
        for (t, map) in set.maps.iter().enumerate() {
            let [a, b, c] = m.triangle_points(&p, t);
            let min_r = a.r.min(b.r).min(c.r);
            if min_r >= 5.3 - 1e-12 && a.r.max(b.r).max(c.r) > 7.0 {
                stretched += 1;
                assert!((map.g[0][0] - (7.55 - 5.3) / (7.05 - 5.3)).abs() < 1e-12);
                assert!((map.g[0][0] - 1.2857).abs() < 1e-4);
                assert_eq!(map.g[0][1], 0.0);
            }
        }
        assert_eq!(stretched, 10);
    }

    #[test]
    fn maps_agree_on_shared_vertices() {
        let m = MacroDecomposition::reference();
        let mut g = GeometricParams::reference();
        g.thickness = [2.31, 0.52, 0.69, 0.41, 3.3];
        g.diameter = [14.4, 8.35, 8.85, 10.15, 10.45];
        let set = AffineMapSet::new(&m, &g).unwrap();
        let reference = m.reference_positions();
        let target = m.vertex_positions(&g).unwrap();
        for (t, tri) in m.triangles.iter().enumerate() {
            for &v in &tri.vertices {
                let q = set.maps[t].apply(reference[v]);
                assert!((q.r - target[v].r).abs() < 1e-12 && (q.y - target[v].y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mapped_area_scales_with_determinant() {
        let m = MacroDecomposition::reference();
        let mut g = GeometricParams::reference();
        g.thickness[0] = 2.4;
        g.diameter[2] = 8.9;
        let set = AffineMapSet::new(&m, &g).unwrap();
        let p = m.reference_positions();
        let q = m.vertex_positions(&g).unwrap();
        for t in 0..30 {
            let [a, b, c] = m.triangle_points(&p, t);
            let [x, y, z] = m.triangle_points(&q, t);
            let ratio = signed_area(x, y, z) / signed_area(a, b, c);
            assert!((ratio - set.maps[t].det()).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_composes_to_identity() {
        let map = AffineMap { g: [[1.3, 0.2], [-0.1, 0.8]], c: [0.5, -2.0] };
        let p = Point::new(3.0, 1.5);
        let back = map.inverse().apply(map.apply(p));
        assert!((back.r - p.r).abs() < 1e-14 && (back.y - p.y).abs() < 1e-14);
    }
}
