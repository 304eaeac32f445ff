//! Latin hypercube sampling of parameter tuples and train/validation splits.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ActiveSet, ParamId, ParameterTuple};

/// Sampling box over the active parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterRanges {
    active: ActiveSet,
    bounds: Vec<(f64, f64)>,
}

/// Default training box of every parameter.
pub fn default_range(id: ParamId) -> (f64, f64) {
    match id {
        ParamId::T0 => (2.3, 2.4),
        ParamId::T1 => (0.5, 0.7),
        ParamId::T2 => (0.5, 0.7),
        ParamId::T3 => (0.4, 0.6),
        ParamId::T4 => (3.05, 3.35),
        ParamId::D0 => (13.5, 14.5),
        ParamId::D1 => (8.3, 8.7),
        ParamId::D2 => (8.8, 9.2),
        ParamId::D3 => (9.8, 10.2),
        ParamId::D4 => (10.4, 10.8),
        ParamId::K => (9.8, 10.2),
        ParamId::Mu => (1.9e9, 2.5e9),
        ParamId::Lambda => (1.2e9, 1.8e9),
        ParamId::Alpha => (0.8e-6, 1.2e-6),
    }
}

impl ParameterRanges {
    pub fn new(active: ActiveSet, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if active.len() != bounds.len() {
            return Err(Error::DimensionMismatch { expected: active.len(), found: bounds.len() });
        }
        for (id, &(lo, hi)) in active.ids().iter().zip(&bounds) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidParameter(format!("range of {} is [{lo}, {hi}]", id.name())));
            }
        }
        Ok(ParameterRanges { active, bounds })
    }

    /// Default box restricted to `active`.
    pub fn defaults(active: ActiveSet) -> Self {
        let bounds = active.ids().iter().map(|&id| default_range(id)).collect();
        ParameterRanges { active, bounds }
    }

    pub fn active(&self) -> &ActiveSet {
        &self.active
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn bound(&self, id: ParamId) -> Option<(f64, f64)> {
        self.active.ids().iter().position(|&a| a == id).map(|k| self.bounds[k])
    }

    pub fn contains(&self, tuple: &ParameterTuple) -> bool {
        self.active.ids().iter().zip(&self.bounds).all(|(&id, &(lo, hi))| {
            let v = tuple.get(id);
            lo <= v && v <= hi
        })
    }
}

/// `n` stratified samples: per dimension one uniform draw in each of `n` equal strata, paired by independent permutations.
pub fn lhs_sample(ranges: &ParameterRanges, n: usize, seed: u64) -> Result<Vec<ParameterTuple>> {
    if ranges.active.is_empty() {
        return Err(Error::InvalidParameter("no active parameters to sample".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = ranges.active.len();
    let mut columns = Vec::with_capacity(d);
    for &(lo, hi) in &ranges.bounds {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        let col: Vec<f64> = strata
            .iter()
            .map(|&s| {
                let u: f64 = rng.random();
                let x = lo + (hi - lo) * (s as f64 + u) / n as f64;
                x.min(hi)
            })
            .collect();
        columns.push(col);
    }
    (0..n)
        .map(|i| {
            let values: Vec<f64> = columns.iter().map(|c| c[i]).collect();
            ParameterTuple::from_active_values(ranges.active.clone(), &values)
        })
        .collect()
}

/// Training-set size `⌈fraction · n⌉`, computed without float round-up artefacts.
pub fn training_size(n: usize, fraction: f64) -> usize {
    let exact = fraction * n as f64;
    let size = (exact - 1e-9 * exact.max(1.0)).ceil() as usize;
    size.clamp(1, n - 1)
}

/// Shuffled split into training and validation indices.
pub fn split_indices(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("cannot split {n} samples")));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("split fraction {fraction} not in (0, 1)")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = training_size(n, fraction);
    let val = idx.split_off(n_train);
    Ok((idx, val))
}

pub fn split<T: Clone>(items: &[T], fraction: f64, seed: u64) -> Result<(Vec<T>, Vec<T>)> {
    let (tr, va) = split_indices(items.len(), fraction, seed)?;
    Ok((tr.iter().map(|&i| items[i].clone()).collect(), va.iter().map(|&i| items[i].clone()).collect()))
}

/// Writes tuples as CSV with one column per active parameter.
pub fn write_samples_csv(path: &Path, active: &ActiveSet, tuples: &[ParameterTuple]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(active.ids().iter().map(|id| id.name()))?;
    for t in tuples {
        w.write_record(active.ids().iter().map(|&id| format!("{:.17e}", t.get(id))))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sample CSV; the header names the active parameters.
pub fn read_samples_csv(path: &Path) -> Result<(ActiveSet, Vec<ParameterTuple>)> {
    let mut r = csv::Reader::from_path(path)?;
    let format_err = |reason: String| Error::Format { path: path.display().to_string(), reason };
    let ids = r
        .headers()?
        .iter()
        .map(|h| ParamId::from_name(h.trim()).ok_or_else(|| format_err(format!("unknown parameter {h:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let active = ActiveSet::new(ids.iter().copied());
    let mut tuples = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut t = ParameterTuple::reference(active.clone());
        for (id, field) in ids.iter().zip(rec.iter()) {
            let v: f64 = field.trim().parse().map_err(|_| format_err(format!("bad number {field:?}")))?;
            t.set(*id, v)?;
        }
        tuples.push(t);
    }
    Ok((active, tuples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_sample_per_stratum() {
        let ranges = ParameterRanges::new(ActiveSet::new([ParamId::K]), vec![(0.0, 1.0)]).unwrap();
        let s = lhs_sample(&ranges, 4, 7).unwrap();
        let mut bins: Vec<usize> = s.iter().map(|t| ((t.get(ParamId::K) * 4.0).floor() as usize).min(3)).collect();
        bins.sort();
        assert_eq!(bins, vec![0, 1, 2, 3]);
    }

    #[test]
    fn deterministic_and_in_bounds() {
        let ranges = ParameterRanges::defaults(ActiveSet::new(ParamId::ALL));
        let a = lhs_sample(&ranges, 100, 3).unwrap();
        assert_eq!(a, lhs_sample(&ranges, 100, 3).unwrap());
        assert!(a.iter().all(|t| ranges.contains(t)));
        assert!(a.iter().all(|t| (1.9e9..=2.5e9).contains(&t.get(ParamId::Mu))));
    }

    #[test]
    fn split_sizes() {
        assert_eq!(training_size(100, 0.7), 70);
        assert_eq!(training_size(4500, 0.7), 3150);
        let (tr, va) = split_indices(101, 0.7, 1).unwrap();
        assert_eq!((tr.len(), va.len()), (71, 30));
        let mut all: Vec<usize> = tr.iter().chain(&va).copied().collect();
        all.sort();
        assert_eq!(all, (0..101).collect::<Vec<_>>());
        assert!(split_indices(1, 0.7, 0).is_err());
    }

    #[test]
    fn empty_active_set_is_rejected() {
        let ranges = ParameterRanges::new(ActiveSet::new([]), vec![]).unwrap();
        assert!(lhs_sample(&ranges, 3, 0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let active = ActiveSet::new([ParamId::D0, ParamId::Alpha]);
        let s = lhs_sample(&ParameterRanges::defaults(active.clone()), 5, 11).unwrap();
        write_samples_csv(&path, &active, &s).unwrap();
        let (a2, s2) = read_samples_csv(&path).unwrap();
        assert_eq!(a2, active);
        assert_eq!(s2, s);
    }
}
