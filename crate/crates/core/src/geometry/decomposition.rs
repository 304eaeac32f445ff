//! The fixed 30-triangle macro decomposition of the hearth cross-section.
//!
//! The section is a stepped polygon bounded by six radial and six horizontal
//! grid lines. Cells of that grid lying inside the polygon are cut along one
//! diagonal, except in the bottom band where the three narrow columns between
//! `D1/2` and `D4/2` are merged into a single region fanned around one interior
//! vertex. Narrow cells stretched over the full bottom band degrade to
//! slivers for admissible diameters, the fan keeps every triangle well shaped.
//!
//! Macro vertices (reference coordinates, metres):
//!
//! | id | r̂ | ŷ | role |
//! |----|----|----|------|
//! | 0–3 | 0, 4.25, 5.3, 7.05 | 0 | bottom |
//! | 4–9 | 0, 4.25, 4.6, 4.95, 5.3, 7.05 | 2.365 | |
//! | 10–14 | 4.25 … 7.05 | 2.965 | |
//! | 15–18 | 4.6 … 7.05 | 3.565 | |
//! | 19–21 | 4.95, 5.3, 7.05 | 4.065 | |
//! | 22–23 | 5.3, 7.05 | 7.265 | top |
//! | 24 | 4.705 | 1.95 | interior fan centre |

use serde::{Deserialize, Serialize};

use super::params::{GeometricParams, REFERENCE_HEIGHTS, REFERENCE_RADII};
use super::Point;
use crate::error::Result;

/// Boundary portions of the cross-section.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    /// Top annulus `y = y_max`.
    Top,
    /// Bottom plane `y = 0`.
    Bottom,
    /// Stepped face wetted by the molten charge.
    Fluid,
    /// Outer shell `r = r_max`.
    Outer,
    /// Symmetry axis `r = 0`.
    Axis,
}

impl BoundaryTag {
    pub const ALL: [BoundaryTag; 5] = [
        BoundaryTag::Top,
        BoundaryTag::Bottom,
        BoundaryTag::Fluid,
        BoundaryTag::Outer,
        BoundaryTag::Axis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundaryTag::Top => "top",
            BoundaryTag::Bottom => "bottom",
            BoundaryTag::Fluid => "fluid",
            BoundaryTag::Outer => "outer",
            BoundaryTag::Axis => "axis",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        BoundaryTag::ALL.into_iter().find(|t| t.name() == s)
    }
}

/// How a macro vertex follows the geometric parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum VertexRule {
    /// Sits on the intersection of radial line `col` and horizontal line `row`.
    Grid { col: usize, row: usize },
    /// Interior of the grid cell `[col, col+1] x [row, row+1]`, at fixed local
    /// coordinates `(s, f)` of that cell.
    Cell { col: usize, row: usize, s: f64, f: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroVertex {
    pub reference: Point,
    pub rule: VertexRule,
}

impl MacroVertex {
    fn position(&self, radii: &[f64; 6], heights: &[f64; 6]) -> Point {
        let dr: [f64; 6] = std::array::from_fn(|i| radii[i] - REFERENCE_RADII[i]);
        let dy: [f64; 6] = std::array::from_fn(|i| heights[i] - REFERENCE_HEIGHTS[i]);
        match self.rule {
            VertexRule::Grid { col, row } => Point::new(
                self.reference.r + dr[col],
                self.reference.y + dy[row],
            ),
            VertexRule::Cell { col, row, s, f } => Point::new(
                self.reference.r + (1.0 - s) * dr[col] + s * dr[col + 1],
                self.reference.y + (1.0 - f) * dy[row] + f * dy[row + 1],
            ),
        }
    }
}

/// Macro triangle; its index in [`MacroDecomposition::triangles`] is its subdomain id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacroTriangle {
    pub vertices: [usize; 3],
}

/// Boundary segment of the macro decomposition, oriented with the solid on its left.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacroEdge {
    pub vertices: [usize; 2],
    pub triangle: usize,
    pub tag: BoundaryTag,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroDecomposition {
    pub vertices: Vec<MacroVertex>,
    pub triangles: Vec<MacroTriangle>,
    pub boundary: Vec<MacroEdge>,
}

pub const N_SUBDOMAINS: usize = 30;

/// The twelve corners of the reference section, counter-clockwise.
pub const POLYGON: [(f64, f64); 12] = [
    (0.0, 0.0),
    (7.05, 0.0),
    (7.05, 7.265),
    (5.30, 7.265),
    (5.30, 4.065),
    (4.95, 4.065),
    (4.95, 3.565),
    (4.6, 3.565),
    (4.6, 2.965),
    (4.25, 2.965),
    (4.25, 2.365),
    (0.0, 2.365),
];

const FAN_CENTRE: (f64, f64) = (4.705, 1.95);

impl MacroDecomposition {
    /// Builds the fixed reference decomposition.
    pub fn reference() -> Self {
        let mut b = Builder::default();
        let columns: [&[usize]; 6] = [&[0, 1, 4, 5], &[0, 1, 2, 3, 4, 5], &[1, 2, 3, 4, 5], &[2, 3, 4, 5], &[3, 4, 5], &[4, 5]];
        for (row, cols) in columns.iter().enumerate() {
            for &col in cols.iter() {
                b.grid(col, row);
            }
        }
        let s = (FAN_CENTRE.0 - REFERENCE_RADII[2]) / (REFERENCE_RADII[3] - REFERENCE_RADII[2]);
        let f = FAN_CENTRE.1 / REFERENCE_HEIGHTS[1];
        b.vertices.push(MacroVertex {
            reference: Point::new(FAN_CENTRE.0, FAN_CENTRE.1),
            rule: VertexRule::Cell { col: 2, row: 0, s, f },
        });
        let centre = b.vertices.len() - 1;

        b.cell(0, 0);
        b.cell(4, 0);
        let b1 = b.grid(1, 0);
        let b4 = b.grid(4, 0);
        let top: Vec<usize> = (1..5).map(|c| b.grid(c, 1)).collect();
        for tri in [
            [b1, b4, centre],
            [b1, centre, top[0]],
            [b4, top[3], centre],
            [top[0], centre, top[1]],
            [top[1], centre, top[2]],
            [top[2], centre, top[3]],
        ] {
            b.triangles.push(MacroTriangle { vertices: tri });
        }
        for row in 1..5 {
            for col in row..5 {
                b.cell(col, row);
            }
        }

        let boundary = boundary_edges(&b.vertices, &b.triangles);
        MacroDecomposition { vertices: b.vertices, triangles: b.triangles, boundary }
    }

    pub fn reference_positions(&self) -> Vec<Point> {
        self.vertices.iter().map(|v| v.reference).collect()
    }

    /// Macro vertex coordinates for the given geometry.
    pub fn vertex_positions(&self, g: &GeometricParams) -> Result<Vec<Point>> {
        g.validate()?;
        let radii = g.radii();
        let heights = g.heights();
        Ok(self.vertices.iter().map(|v| v.position(&radii, &heights)).collect())
    }

    pub fn triangle_points(&self, positions: &[Point], t: usize) -> [Point; 3] {
        self.triangles[t].vertices.map(|v| positions[v])
    }
}

#[derive(Default)]
struct Builder {
    vertices: Vec<MacroVertex>,
    triangles: Vec<MacroTriangle>,
    ids: std::collections::HashMap<(usize, usize), usize>,
}

impl Builder {
    fn grid(&mut self, col: usize, row: usize) -> usize {
        let vertices = &mut self.vertices;
        *self.ids.entry((col, row)).or_insert_with(|| {
            vertices.push(MacroVertex {
                reference: Point::new(REFERENCE_RADII[col], REFERENCE_HEIGHTS[row]),
                rule: VertexRule::Grid { col, row },
            });
            vertices.len() - 1
        })
    }

    fn cell(&mut self, col: usize, row: usize) {
        let a = self.grid(col, row);
        let b = self.grid(col + 1, row);
        let c = self.grid(col + 1, row + 1);
        let d = self.grid(col, row + 1);
        self.triangles.push(MacroTriangle { vertices: [a, b, c] });
        self.triangles.push(MacroTriangle { vertices: [a, c, d] });
    }
}

fn classify(a: Point, b: Point) -> BoundaryTag {
    let r_max = REFERENCE_RADII[5];
    let y_max = REFERENCE_HEIGHTS[5];
    if a.y == 0.0 && b.y == 0.0 {
        BoundaryTag::Bottom
    } else if a.r == 0.0 && b.r == 0.0 {
        BoundaryTag::Axis
    } else if a.r == r_max && b.r == r_max {
        BoundaryTag::Outer
    } else if a.y == y_max && b.y == y_max {
        BoundaryTag::Top
    } else {
        BoundaryTag::Fluid
    }
}

fn boundary_edges(vertices: &[MacroVertex], triangles: &[MacroTriangle]) -> Vec<MacroEdge> {
    use std::collections::HashMap;
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            directed.insert((tri.vertices[k], tri.vertices[(k + 1) % 3]), t);
        }
    }
    let mut edges = Vec::new();
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri.vertices[k], tri.vertices[(k + 1) % 3]);
            if !directed.contains_key(&(b, a)) {
                let tag = classify(vertices[a].reference, vertices[b].reference);
                edges.push(MacroEdge { vertices: [a, b], triangle: t, tag });
            }
        }
    }
    edges
}

/// Signed area of a triangle (positive when counter-clockwise).
pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b.r - a.r) * (c.y - a.y) - (c.r - a.r) * (b.y - a.y))
}
