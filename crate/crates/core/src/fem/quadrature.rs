//! Gauss rules on the unit interval and on the reference triangle.
//!
//! Triangle rules are collapsed tensor products of Gauss-Legendre rules; all
//! points are strictly interior, so the hoop term `1/r` is never evaluated on
//! the axis.

/// Gauss-Legendre rule with `n` points on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = 0.5 * (1.0 - z);
        x[n - 1 - i] = 0.5 * (1.0 + z);
        w[i] = 0.5 * wi;
        w[n - 1 - i] = 0.5 * wi;
    }
    (x, w)
}

/// Points in barycentric coordinates with weights summing to the reference area 1/2.
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

/// Rule exact for polynomials of total degree `degree`.
pub fn triangle_rule(degree: usize) -> TriangleRule {
    let n = (degree + 3) / 2;
    let (x, w) = gauss_legendre(n);
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let xi = x[i];
            let eta = (1.0 - x[i]) * x[j];
            points.push([1.0 - xi - eta, xi, eta]);
            weights.push(w[i] * w[j] * (1.0 - x[i]));
        }
    }
    TriangleRule { points, weights }
}

/// Gauss-Legendre rule on `[0, 1]` exact for degree `degree`.
pub fn line_rule(degree: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_legendre(degree / 2 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn line_rule_exactness() {
        for n in 1..8 {
            let (x, w) = gauss_legendre(n);
            for d in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                assert!((q - 1.0 / (d as f64 + 1.0)).abs() < 1e-14, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn triangle_rule_exactness() {
        // ∫ ξ^a η^b over the reference triangle = a! b! / (a+b+2)!
        for degree in 1..=10 {
            let rule = triangle_rule(degree);
            for a in 0..=degree {
                for b in 0..=degree - a {
                    let q: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32))
                        .sum();
                    let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                    assert!((q - exact).abs() < 1e-14, "degree {degree}: a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn points_strictly_interior() {
        let rule = triangle_rule(9);
        assert!(rule.points.iter().all(|p| p.iter().all(|&c| c > 0.0)));
    }
}
