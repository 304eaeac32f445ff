//! Lagrange elements of degree 1 to 3 on triangles.
//!
//! Nodes sit on the equispaced barycentric lattice `(i, j, k)`, `i + j + k = p`,
//! ordered vertices first, then edge nodes (edge `e` runs from local vertex
//! `e` to `e + 1`), then interior nodes.

/// Lattice of local nodes, as barycentric multi-indices.
pub fn lattice(p: usize) -> Vec<[usize; 3]> {
    assert!((1..=3).contains(&p), "element degree must be 1, 2 or 3");
    let mut out = vec![[p, 0, 0], [0, p, 0], [0, 0, p]];
    for m in 1..p {
        out.push([p - m, m, 0]);
    }
    for m in 1..p {
        out.push([0, p - m, m]);
    }
    for m in 1..p {
        out.push([m, 0, p - m]);
    }
    for i in 1..p {
        for j in 1..p {
            if i + j < p {
                out.push([i, j, p - i - j]);
            }
        }
    }
    out
}

pub fn n_local(p: usize) -> usize {
    (p + 1) * (p + 2) / 2
}

/// Local node indices on edge `e`, ordered from vertex `e` to vertex `e + 1`.
pub fn edge_local_nodes(p: usize, e: usize) -> Vec<usize> {
    let lat = lattice(p);
    let a = e;
    let b = (e + 1) % 3;
    let off = (e + 2) % 3;
    let mut nodes: Vec<usize> = (0..lat.len()).filter(|&n| lat[n][off] == 0).collect();
    nodes.sort_by_key(|&n| (lat[n][b], std::cmp::Reverse(lat[n][a])));
    nodes
}

/// Basis values and reference gradients at one barycentric point.
#[derive(Clone, Debug)]
pub struct BasisEval {
    pub values: Vec<f64>,
    /// `d/dξ, d/dη` with `ξ = λ1`, `η = λ2`.
    pub grads: Vec<[f64; 2]>,
}

fn factor(p: usize, n: usize, x: f64) -> (f64, f64) {
    let pf = p as f64;
    let mut value = 1.0;
    for m in 0..n {
        value *= (pf * x - m as f64) / (m as f64 + 1.0);
    }
    let mut deriv = 0.0;
    for l in 0..n {
        let mut term = pf / (l as f64 + 1.0);
        for m in 0..n {
            if m != l {
                term *= (pf * x - m as f64) / (m as f64 + 1.0);
            }
        }
        deriv += term;
    }
    (value, deriv)
}

pub fn evaluate(p: usize, lambda: [f64; 3]) -> BasisEval {
    let lat = lattice(p);
    let mut values = Vec::with_capacity(lat.len());
    let mut grads = Vec::with_capacity(lat.len());
    for idx in &lat {
        let f: [(f64, f64); 3] = std::array::from_fn(|c| factor(p, idx[c], lambda[c]));
        let v = f[0].0 * f[1].0 * f[2].0;
        let d0 = f[0].1 * f[1].0 * f[2].0;
        let d1 = f[0].0 * f[1].1 * f[2].0;
        let d2 = f[0].0 * f[1].0 * f[2].1;
        values.push(v);
        grads.push([d1 - d0, d2 - d0]);
    }
    BasisEval { values, grads }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        for p in 1..=3 {
            assert_eq!(lattice(p).len(), n_local(p));
            assert_eq!(edge_local_nodes(p, 0).len(), p + 1);
        }
    }

    #[test]
    fn nodal_interpolation_property() {
        for p in 1..=3 {
            let lat = lattice(p);
            for (a, node) in lat.iter().enumerate() {
                let lambda = node.map(|c| c as f64 / p as f64);
                let e = evaluate(p, lambda);
                for (b, v) in e.values.iter().enumerate() {
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((v - expect).abs() < 1e-13, "p={p} node {a} basis {b}: {v}");
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_and_zero_gradient_sum() {
        for p in 1..=3 {
            let e = evaluate(p, [0.2, 0.3, 0.5]);
            let s: f64 = e.values.iter().sum();
            assert!((s - 1.0).abs() < 1e-13);
            let gx: f64 = e.grads.iter().map(|g| g[0]).sum();
            let gy: f64 = e.grads.iter().map(|g| g[1]).sum();
            assert!(gx.abs() < 1e-12 && gy.abs() < 1e-12);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-6;
        for p in 1..=3 {
            let (xi, eta) = (0.27, 0.41);
            let at = |x: f64, y: f64| evaluate(p, [1.0 - x - y, x, y]).values;
            let e = evaluate(p, [1.0 - xi - eta, xi, eta]);
            let px = at(xi + h, eta);
            let mx = at(xi - h, eta);
            let py = at(xi, eta + h);
            let my = at(xi, eta - h);
            for n in 0..n_local(p) {
                assert!((e.grads[n][0] - (px[n] - mx[n]) / (2.0 * h)).abs() < 1e-7);
                assert!((e.grads[n][1] - (py[n] - my[n]) / (2.0 * h)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn edge_nodes_run_between_vertices() {
        let lat = lattice(3);
        let nodes = edge_local_nodes(3, 1);
        assert_eq!(lat[nodes[0]], [0, 3, 0]);
        assert_eq!(lat[*nodes.last().unwrap()], [0, 0, 3]);
    }
}
