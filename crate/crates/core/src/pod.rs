//! Proper orthogonal decomposition by the method of snapshots.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{Field, InnerProduct, InnerProductKind, Model, Rank};
use crate::geometry::ParameterTuple;

/// Eigenvalues below this fraction of the largest are treated as rank deficiency.
pub const RANK_TOLERANCE: f64 = 1e-13;

/// Default admissibility threshold `θ_N / θ_1`.
pub const DEFAULT_RATIO: f64 = 1e-4;

/// Reference-mesh solutions of one model at a set of parameter tuples.
#[derive(Clone, Debug)]
pub struct SnapshotSet {
    pub model: Model,
    pub rank: Rank,
    pub snapshots: Vec<Vec<f64>>,
    pub tuples: Vec<ParameterTuple>,
}

impl SnapshotSet {
    pub fn new(model: Model, rank: Rank) -> Self {
        SnapshotSet { model, rank, snapshots: Vec::new(), tuples: Vec::new() }
    }

    pub fn push(&mut self, field: Field, tuple: ParameterTuple) -> Result<()> {
        if field.rank != self.rank {
            return Err(Error::InvalidData("snapshot rank differs from the set".into()));
        }
        if let Some(first) = self.snapshots.first() {
            if first.len() != field.len() {
                return Err(Error::DimensionMismatch { expected: first.len(), found: field.len() });
            }
        }
        self.snapshots.push(field.values);
        self.tuples.push(tuple);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.snapshots.first().map_or(0, Vec::len)
    }
}

fn check_dim(ip: &InnerProduct, n: usize) -> Result<()> {
    if ip.matrix.nrows() != n {
        return Err(Error::DimensionMismatch { expected: ip.matrix.nrows(), found: n });
    }
    Ok(())
}

/// `C_kl = <s_k, s_l>`, computed on the upper triangle and mirrored.
pub fn gram_matrix(snapshots: &[Vec<f64>], ip: &InnerProduct) -> Result<DMatrix<f64>> {
    let n = snapshots.len();
    for s in snapshots {
        check_dim(ip, s.len())?;
    }
    let xs: Vec<Vec<f64>> = snapshots.par_iter().map(|s| ip.matrix.mul_vec(s)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|k| (k..n).map(|l| dot(&xs[k], &snapshots[l])).collect())
        .collect();
    let mut c = DMatrix::zeros(n, n);
    for (k, row) in rows.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            c[(k, k + off)] = v;
            c[(k + off, k)] = v;
        }
    }
    Ok(c)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigenpairs of a symmetric matrix, sorted by descending eigenvalue.
pub fn sorted_eigen(c: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(c.clone());
    let mut order: Vec<usize> = (0..c.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(c.nrows(), c.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "value")]
pub enum Truncation {
    /// Exactly this many modes (capped at the numerical rank).
    Fixed(usize),
    /// All modes with `θ_i / θ_1 ≥ ratio`.
    Ratio(f64),
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Ratio(DEFAULT_RATIO)
    }
}

/// What truncation asked for and what it produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationRecord {
    pub rule: Truncation,
    pub numerical_rank: usize,
    pub retained: usize,
    pub warning: Option<String>,
}

/// Orthonormal modes and the full snapshot spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedBasis {
    pub kind: InnerProductKind,
    pub modes: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub truncation: TruncationRecord,
}

/// Reduced coordinates of a field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients(pub Vec<f64>);

impl ReducedBasis {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.modes.first().map_or(0, Vec::len)
    }

    /// Basis restricted to its first `n` modes.
    pub fn truncated(&self, n: usize) -> ReducedBasis {
        let mut b = self.clone();
        b.modes.truncate(n);
        b.truncation.retained = b.modes.len();
        b
    }

    /// `ζ_i = <f, ψ_i>`.
    pub fn project(&self, ip: &InnerProduct, f: &[f64]) -> Result<Coefficients> {
        check_dim(ip, f.len())?;
        if f.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: f.len() });
        }
        let xf = ip.matrix.mul_vec(f);
        Ok(Coefficients(self.modes.iter().map(|m| dot(m, &xf)).collect()))
    }

    /// `Σ ζ_i ψ_i`.
    pub fn reconstruct(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (m, &c) in self.modes.iter().zip(z) {
            for (o, v) in out.iter_mut().zip(m) {
                *o += c * v;
            }
        }
        out
    }

    /// Largest `|<ψ_i, ψ_j> - δ_ij|`.
    pub fn orthonormality_defect(&self, ip: &InnerProduct) -> f64 {
        let xm: Vec<Vec<f64>> = self.modes.iter().map(|m| ip.matrix.mul_vec(m)).collect();
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            for j in 0..self.len() {
                let d = dot(&xm[i], &self.modes[j]) - if i == j { 1.0 } else { 0.0 };
                worst = worst.max(d.abs());
            }
        }
        worst
    }
}

/// Number of leading eigenvalues with `θ_i / θ_1 ≥ ratio` (descending input).
pub fn ratio_count(eigenvalues: &[f64], ratio: f64) -> usize {
    match eigenvalues.first() {
        Some(&top) if top > 0.0 => eigenvalues.iter().take_while(|&&t| t / top >= ratio).count(),
        _ => 0,
    }
}

/// Truncated POD basis of a snapshot set; modes are re-orthonormalized in the product.
pub fn pod_basis(snapshots: &[Vec<f64>], ip: &InnerProduct, truncation: Truncation) -> Result<ReducedBasis> {
    if snapshots.is_empty() {
        return Err(Error::InvalidData("POD needs at least one snapshot".into()));
    }
    let c = gram_matrix(snapshots, ip)?;
    let (eigenvalues, vectors) = sorted_eigen(&c);
    let top = eigenvalues[0];
    let numerical_rank = if top > 0.0 { eigenvalues.iter().take_while(|&&t| t > RANK_TOLERANCE * top).count() } else { 0 };
    let (wanted, mut warning) = match truncation {
        Truncation::Fixed(n) => (n, None),
        Truncation::Ratio(r) => (ratio_count(&eigenvalues, r), None),
    };
    let retained = wanted.min(numerical_rank);
    if wanted > numerical_rank {
        warning = Some(format!("requested {wanted} modes but the snapshots have numerical rank {numerical_rank}"));
    }
    let dim = snapshots[0].len();
    let mut modes: Vec<Vec<f64>> = (0..retained)
        .into_par_iter()
        .map(|i| {
            let scale = 1.0 / eigenvalues[i].sqrt();
            let mut m = vec![0.0; dim];
            for (k, s) in snapshots.iter().enumerate() {
                let w = vectors[(k, i)] * scale;
                for (o, v) in m.iter_mut().zip(s) {
                    *o += w * v;
                }
            }
            m
        })
        .collect();
    orthonormalize(&mut modes, ip);
    Ok(ReducedBasis {
        kind: ip.kind,
        modes,
        eigenvalues,
        truncation: TruncationRecord { rule: truncation, numerical_rank, retained, warning },
    })
}

/// Two passes of modified Gram-Schmidt in the product.
pub fn orthonormalize(modes: &mut [Vec<f64>], ip: &InnerProduct) {
    for _ in 0..2 {
        for i in 0..modes.len() {
            let (done, rest) = modes.split_at_mut(i);
            let m = &mut rest[0];
            for prev in done.iter() {
                let c = ip.inner_raw(m, prev);
                for (x, p) in m.iter_mut().zip(prev) {
                    *x -= c * p;
                }
            }
            let n = ip.inner_raw(m, m).sqrt();
            m.iter_mut().for_each(|x| *x /= n);
        }
    }
}

/// Orthonormal basis of the whole snapshot span, by Gram-Schmidt on the snapshots themselves.
///
/// Unlike POD this keeps directions far below the eigenvalue rank tolerance; only snapshots
/// whose remainder falls under `1e-12` of their norm are dropped.
pub fn snapshot_basis(snapshots: &[Vec<f64>], ip: &InnerProduct) -> Result<ReducedBasis> {
    if snapshots.is_empty() {
        return Err(Error::InvalidData("a snapshot basis needs at least one snapshot".into()));
    }
    let mut modes: Vec<Vec<f64>> = Vec::new();
    for s in snapshots {
        check_dim(ip, s.len())?;
        let norm = ip.inner_raw(s, s).sqrt();
        let mut m = s.clone();
        for _ in 0..2 {
            for prev in &modes {
                let c = ip.inner_raw(&m, prev);
                m.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
            }
        }
        let rest = ip.inner_raw(&m, &m).sqrt();
        if rest > 1e-12 * norm {
            m.iter_mut().for_each(|x| *x /= rest);
            modes.push(m);
        }
    }
    let retained = modes.len();
    Ok(ReducedBasis {
        kind: ip.kind,
        modes,
        eigenvalues: Vec::new(),
        truncation: TruncationRecord {
            rule: Truncation::Fixed(snapshots.len()),
            numerical_rank: retained,
            retained,
            warning: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::InnerProductKind;
    use crate::geometry::{MacroDecomposition, Mesh};

    fn product() -> InnerProduct {
        let mesh = Mesh::refine(&MacroDecomposition::reference(), 0, 2).unwrap();
        InnerProduct::new(&mesh, Rank::Scalar, InnerProductKind::H1r).unwrap()
    }

    fn field(ip: &InnerProduct, seed: usize) -> Vec<f64> {
        (0..ip.matrix.nrows()).map(|i| ((i * 7919 + seed * 104729) % 1000) as f64 / 1000.0 - 0.5).collect()
    }

    #[test]
    fn identical_unit_snapshots() {
        let ip = product();
        let mut s = field(&ip, 1);
        let n = ip.inner_raw(&s, &s).sqrt();
        s.iter_mut().for_each(|x| *x /= n);
        let c = gram_matrix(&[s.clone(), s.clone()], &ip).unwrap();
        for v in c.iter() {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let b = pod_basis(&[s.clone(), s], &ip, Truncation::Fixed(2)).unwrap();
        assert!((b.eigenvalues[0] - 2.0).abs() < 1e-12 && b.eigenvalues[1].abs() < 1e-12);
        assert_eq!(b.len(), 1);
        assert!(b.truncation.warning.is_some());
    }

    #[test]
    fn single_snapshot_mode_is_normalized_snapshot() {
        let ip = product();
        let s = field(&ip, 3);
        let b = pod_basis(std::slice::from_ref(&s), &ip, Truncation::default()).unwrap();
        let norm2 = ip.inner_raw(&s, &s);
        assert!((b.eigenvalues[0] - norm2).abs() < 1e-12 * norm2);
        let z = b.project(&ip, &s).unwrap();
        assert!((z.0[0] - norm2.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn ratio_count_applies_threshold() {
        assert_eq!(ratio_count(&[1.0, 1e-3, 1e-5], DEFAULT_RATIO), 2);
        assert_eq!(ratio_count(&[], DEFAULT_RATIO), 0);
    }

    #[test]
    fn ratio_criterion() {
        let ip = product();
        let s: Vec<Vec<f64>> = (0..3).map(|k| field(&ip, k + 10)).collect();
        let b = pod_basis(&s, &ip, Truncation::Ratio(0.0)).unwrap();
        assert_eq!(b.len(), 3);
        assert!(b.orthonormality_defect(&ip) < 1e-10);
        // trace identity
        let total: f64 = s.iter().map(|x| ip.inner_raw(x, x)).sum();
        let sum: f64 = b.eigenvalues.iter().sum();
        assert!((total - sum).abs() < 1e-8 * total);
    }

    #[test]
    fn snapshot_basis_spans_and_drops_duplicates() {
        let ip = product();
        let a = field(&ip, 1);
        let b = field(&ip, 2);
        let c: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - y).collect();
        let near: Vec<f64> = a.iter().enumerate().map(|(i, x)| x + 1e-9 * ((i % 3) as f64 - 1.0)).collect();
        let basis = snapshot_basis(&[a.clone(), b, c, near.clone()], &ip).unwrap();
        assert_eq!(basis.len(), 3);
        assert!(basis.orthonormality_defect(&ip) < 1e-12);
        let z = basis.project(&ip, &near).unwrap();
        let back = basis.reconstruct(&z.0);
        let err: f64 = back.iter().zip(&near).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        assert!(err < 1e-12 * dot(&near, &near).sqrt());
    }
}
