//! Solvers for sparse symmetric positive definite systems.
//!
//! The direct path is an envelope (profile) Cholesky factorization after a
//! reverse Cuthill-McKee reordering; the iterative path is conjugate gradients
//! with a Jacobi preconditioner.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Reverse Cuthill-McKee ordering; `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = peripheral_node(a, seed, &degree);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = a.row(v).0.iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(a: &CsrMatrix, start: usize) -> Vec<usize> {
    let mut level = vec![usize::MAX; a.nrows()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in a.row(v).0 {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

fn peripheral_node(a: &CsrMatrix, seed: usize, degree: &[usize]) -> usize {
    let mut node = seed;
    let mut depth = 0;
    for _ in 0..8 {
        let level = bfs_levels(a, node);
        let max = level.iter().filter(|&&l| l != usize::MAX).max().copied().unwrap_or(0);
        if max <= depth && depth > 0 {
            break;
        }
        depth = max;
        node = (0..a.nrows())
            .filter(|&i| level[i] == max)
            .min_by_key(|&i| (degree[i], i))
            .unwrap_or(node);
    }
    node
}

/// Envelope Cholesky factor `P A Pᵀ = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct EnvelopeCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &j in a.row(old).0 {
                let jn = inv[j];
                if jn < first[new] {
                    first[new] = jn;
                }
            }
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for (new, &old) in perm.iter().enumerate() {
            let (cols, vals) = a.row(old);
            for (&j, &v) in cols.iter().zip(vals) {
                let jn = inv[j];
                if jn <= new {
                    data[start[new] + jn - first[new]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let (row_i, row_j) = {
                    let ri = &data[start[i] + k0 - fi..start[i] + j - fi];
                    let rj = &data[start[j] + k0 - fj..start[j] + j - fj];
                    (ri, rj)
                };
                let dot: f64 = row_i.iter().zip(row_j).map(|(x, y)| x * y).sum();
                let ljj = data[start[j + 1] - 1];
                let idx = start[i] + j - fi;
                data[idx] = (data[idx] - dot) / ljj;
            }
            let row = &data[start[i]..start[i + 1] - 1];
            let sq: f64 = row.iter().map(|x| x * x).sum();
            let d = data[start[i + 1] - 1] - sq;
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: perm[i], value: d });
            }
            data[start[i + 1] - 1] = d.sqrt();
        }
        Ok(EnvelopeCholesky { perm, first, start, data })
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1] - 1];
            let dot: f64 = row.iter().zip(&x[fi..i]).map(|(l, y)| l * y).sum();
            x[i] = (x[i] - dot) / self.data[self.start[i + 1] - 1];
        }
        for i in (0..n).rev() {
            x[i] /= self.data[self.start[i + 1] - 1];
            let xi = x[i];
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1] - 1];
            for (xk, l) in x[fi..i].iter_mut().zip(row) {
                *xk -= l * xi;
            }
        }
        let mut out = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}

/// Jacobi-preconditioned conjugate gradients.
pub fn conjugate_gradient(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.nrows();
    let diag = a.diagonal();
    if let Some((i, &d)) = diag.iter().enumerate().find(|(_, &d)| !(d > 0.0)) {
        return Err(Error::NotPositiveDefinite { pivot: i, value: d });
    }
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: it, value: pap });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if rnorm <= tol * bnorm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let residual = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
    Err(Error::NoConvergence { iterations: max_iter, residual })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    /// Direct factorization unless the envelope would be very large.
    #[default]
    Auto,
    Direct,
    Iterative,
}

/// Largest envelope (number of stored factor entries) the automatic choice factors directly.
pub const MAX_DIRECT_ENVELOPE: usize = 60_000_000;

/// A factorized or iteratively solved SPD operator.
pub enum SpdSolver<'a> {
    Direct(EnvelopeCholesky),
    Iterative(&'a CsrMatrix),
}

impl<'a> SpdSolver<'a> {
    pub fn new(a: &'a CsrMatrix, kind: SolverKind) -> Result<Self> {
        match kind {
            SolverKind::Direct => Ok(SpdSolver::Direct(EnvelopeCholesky::factor(a)?)),
            SolverKind::Iterative => Ok(SpdSolver::Iterative(a)),
            SolverKind::Auto => {
                if envelope_estimate(a) <= MAX_DIRECT_ENVELOPE {
                    Ok(SpdSolver::Direct(EnvelopeCholesky::factor(a)?))
                } else {
                    Ok(SpdSolver::Iterative(a))
                }
            }
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            SpdSolver::Direct(f) => Ok(f.solve(b)),
            SpdSolver::Iterative(a) => conjugate_gradient(a, b, 1e-13, 20 * a.nrows() + 100),
        }
    }
}

fn envelope_estimate(a: &CsrMatrix) -> usize {
    let perm = reverse_cuthill_mckee(a);
    let mut inv = vec![0usize; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    perm.iter()
        .enumerate()
        .map(|(new, &old)| {
            let f = a.row(old).0.iter().map(|&j| inv[j]).min().unwrap_or(new).min(new);
            new - f + 1
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sparse::TripletBuilder;

    fn laplacian_2d(n: usize) -> CsrMatrix {
        let idx = |i: usize, j: usize| i * n + j;
        let mut b = TripletBuilder::new(n * n, n * n);
        for i in 0..n {
            for j in 0..n {
                b.push(idx(i, j), idx(i, j), 4.0 + 0.01 * (i + j) as f64);
                if i > 0 {
                    b.push(idx(i, j), idx(i - 1, j), -1.0);
                }
                if i + 1 < n {
                    b.push(idx(i, j), idx(i + 1, j), -1.0);
                }
                if j > 0 {
                    b.push(idx(i, j), idx(i, j - 1), -1.0);
                }
                if j + 1 < n {
                    b.push(idx(i, j), idx(i, j + 1), -1.0);
                }
            }
        }
        b.build()
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_2d(7);
        let mut p = reverse_cuthill_mckee(&a);
        p.sort();
        assert_eq!(p, (0..49).collect::<Vec<_>>());
    }

    #[test]
    fn direct_matches_dense_cholesky() {
        let a = laplacian_2d(9);
        let b: Vec<f64> = (0..81).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let x = EnvelopeCholesky::factor(&a).unwrap().solve(&b);
        let dense = a.to_dense().cholesky().unwrap();
        let xd = dense.solve(&nalgebra::DVector::from_vec(b.clone()));
        for i in 0..81 {
            assert!((x[i] - xd[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cg_matches_direct() {
        let a = laplacian_2d(12);
        let b: Vec<f64> = (0..144).map(|i| (i as f64).sin()).collect();
        let x = EnvelopeCholesky::factor(&a).unwrap().solve(&b);
        let y = conjugate_gradient(&a, &b, 1e-14, 1000).unwrap();
        for i in 0..144 {
            assert!((x[i] - y[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let mut b = TripletBuilder::new(2, 2);
        b.push(0, 0, 1.0);
        b.push(0, 1, 2.0);
        b.push(1, 0, 2.0);
        b.push(1, 1, 1.0);
        let a = b.build();
        assert!(matches!(EnvelopeCholesky::factor(&a), Err(Error::NotPositiveDefinite { .. })));
    }
}
