use super::mesh::Mesh;
use super::Point;

/// Shape quality `4√3 A / (l1² + l2² + l3²)`; 1 for an equilateral triangle.
pub fn triangle_quality(a: Point, b: Point, c: Point) -> f64 {
    let d2 = |p: Point, q: Point| (p.r - q.r).powi(2) + (p.y - q.y).powi(2);
    let (ab, bc, ca) = (d2(a, b), d2(b, c), d2(c, a));
    if ab == 0.0 || bc == 0.0 || ca == 0.0 {
        return 0.0;
    }
    4.0 * 3f64.sqrt() * super::decomposition::signed_area(a, b, c) / (ab + bc + ca)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QualityReport {
    pub per_element: Vec<f64>,
    pub min: f64,
    /// Counts over ten equal bins of `[0, 1]`.
    pub histogram: [usize; 10],
    /// Elements with a zero-length edge.
    pub degenerate: Vec<usize>,
}

pub fn mesh_quality(mesh: &Mesh) -> QualityReport {
    let per_element: Vec<f64> = (0..mesh.elements.len())
        .map(|e| {
            let [a, b, c] = mesh.element_points(e);
            triangle_quality(a, b, c)
        })
        .collect();
    let mut histogram = [0usize; 10];
    for &q in &per_element {
        histogram[((q.clamp(0.0, 1.0) * 10.0) as usize).min(9)] += 1;
    }
    let degenerate = per_element
        .iter()
        .enumerate()
        .filter(|(_, &q)| q == 0.0)
        .map(|(i, _)| i)
        .collect();
    let min = per_element.iter().copied().fold(f64::INFINITY, f64::min);
    QualityReport { per_element, min, histogram, degenerate }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::decomposition::MacroDecomposition;

    #[test]
    fn equilateral_is_one() {
        let q = triangle_quality(Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, 3f64.sqrt() / 2.0));
        assert!((q - 1.0).abs() < 1e-14);
    }

    #[test]
    fn right_isoceles() {
        let q = triangle_quality(Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0));
        assert!((q - 3f64.sqrt() / 2.0).abs() < 1e-14);
    }

    #[test]
    fn collapsed_edge_is_flagged() {
        let p = Point::new(1.0, 1.0);
        assert_eq!(triangle_quality(p, p, Point::new(2.0, 0.0)), 0.0);
    }

    #[test]
    fn reference_mesh_quality() {
        let mesh = Mesh::refine(&MacroDecomposition::reference(), 2, 1).unwrap();
        let report = mesh_quality(&mesh);
        assert!(report.min >= 0.25, "min quality {}", report.min);
        assert_eq!(report.histogram.iter().sum::<usize>(), 480);
        assert!(report.degenerate.is_empty());
    }
}
