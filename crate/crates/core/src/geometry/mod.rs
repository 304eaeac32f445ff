//! Reference cross-section, its macro decomposition, parameter-dependent
//! subdomain maps and uniformly refined meshes.

mod decomposition;
pub mod io;
mod maps;
mod mesh;
mod params;
mod quality;

use serde::{Deserialize, Serialize};

pub use decomposition::{
    signed_area, BoundaryTag, MacroDecomposition, MacroEdge, MacroTriangle, MacroVertex, VertexRule,
    N_SUBDOMAINS, POLYGON,
};
pub use maps::{AffineMap, AffineMapSet, MIN_DETERMINANT};
pub use mesh::{BoundaryEdge, Element, Mesh};
pub use params::{
    lame_from_young, young_from_lame, ActiveSet, GeometricParams, ParamId, ParameterTuple, PhysicalParams,
    N_PARAMS, REFERENCE_HEIGHTS, REFERENCE_RADII,
};
pub use quality::{mesh_quality, triangle_quality, QualityReport};

/// A point of the meridian half-plane: radius `r` and height `y`, in metres.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub r: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(r: f64, y: f64) -> Self {
        Point { r, y }
    }
}
