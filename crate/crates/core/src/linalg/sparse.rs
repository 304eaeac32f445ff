use nalgebra::DMatrix;

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates `(row, col, value)` entries; duplicates are summed in insertion order.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        TripletBuilder { nrows, ncols, entries: Vec::new() }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        TripletBuilder { nrows, ncols, entries: Vec::with_capacity(cap) }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.entries.push((i, j, v));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn build(mut self) -> CsrMatrix {
        // Stable sort keeps the summation order of duplicates deterministic.
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(j);
                values.push(v);
                indptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.nrows {
            indptr[i + 1] += indptr[i];
        }
        CsrMatrix { nrows: self.nrows, ncols: self.ncols, indptr, indices, values }
    }
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.nrows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                x[i] * cols.iter().zip(vals).map(|(&j, &v)| v * y[j]).sum::<f64>()
            })
            .sum()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut b = TripletBuilder::with_capacity(self.ncols, self.nrows, self.nnz());
        for (i, j, v) in self.triplets() {
            b.push(j, i, v);
        }
        b.build()
    }

    pub fn scale(&mut self, s: f64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    /// `self + s * other`, both with identical shape.
    pub fn add_scaled(&self, s: f64, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut b = TripletBuilder::with_capacity(self.nrows, self.ncols, self.nnz() + other.nnz());
        for (i, j, v) in self.triplets() {
            b.push(i, j, v);
        }
        for (i, j, v) in other.triplets() {
            b.push(i, j, s * v);
        }
        b.build()
    }

    /// Restriction to the rows and columns listed in `keep` (in that order).
    pub fn restrict(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![usize::MAX; self.ncols];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let mut b = TripletBuilder::with_capacity(keep.len(), keep.len(), self.nnz());
        for (k, &i) in keep.iter().enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if map[j] != usize::MAX {
                    b.push(k, map[j], v);
                }
            }
        }
        b.build()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        self.triplets().fold(0.0, |m, (i, j, v)| m.max((v - self.get(j, i)).abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }
}
