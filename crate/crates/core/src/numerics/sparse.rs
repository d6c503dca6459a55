use rayon::prelude::*;

use super::DenseMatrix;
use crate::error::{IgtError, Result};

/// Symmetric, nonnegative operator in compressed sparse row form.
///
/// Built once and applied by [`spmm`]; never densified.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    /// Builds from CSR arrays, checking structure, sign and symmetry.
    ///
    /// Column indices within a row must be strictly increasing.
    pub fn from_csr(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n + 1 || row_ptr[0] != 0 || row_ptr[n] != col_idx.len() {
            return Err(IgtError::InvalidArgument("malformed row pointer".into()));
        }
        if col_idx.len() != values.len() {
            return Err(IgtError::InvalidArgument(
                "column index and value arrays differ in length".into(),
            ));
        }
        for r in 0..n {
            let (lo, hi) = (row_ptr[r], row_ptr[r + 1]);
            if lo > hi {
                return Err(IgtError::InvalidArgument("row pointer decreases".into()));
            }
            let cols = &col_idx[lo..hi];
            if cols.iter().any(|&c| c >= n) || cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(IgtError::InvalidArgument(format!(
                    "row {r} has out-of-range or unsorted columns"
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(IgtError::InvalidArgument(
                "operator values must be finite and nonnegative".into(),
            ));
        }
        let op = Self {
            n,
            row_ptr,
            col_idx,
            values,
        };
        op.check_symmetric()?;
        Ok(op)
    }

    /// Builds from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Result<Self> {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if r >= n || c >= n {
                return Err(IgtError::InvalidArgument(format!(
                    "triplet ({r}, {c}) out of range for n={n}"
                )));
            }
            if last == Some((r, c)) {
                *values.last_mut().expect("nonempty") += v;
                continue;
            }
            col_idx.push(c);
            values.push(v);
            row_ptr[r + 1] += 1;
            last = Some((r, c));
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self::from_csr(n, row_ptr, col_idx, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    fn check_symmetric(&self) -> Result<()> {
        for r in 0..self.n {
            for (c, v) in self.row_entries(r) {
                match self.entry(c, r) {
                    Some(t) if t == v => {}
                    _ => {
                        return Err(IgtError::InvalidArgument(format!(
                            "operator not symmetric at ({r}, {c})"
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_entries(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn entry(&self, r: usize, c: usize) -> Option<f64> {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[lo..hi]
            .binary_search(&c)
            .ok()
            .map(|k| self.values[lo + k])
    }

    /// Returns a copy with every value multiplied by `factor` (must be ≥ 0).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(IgtError::InvalidArgument(format!(
                "scale factor {factor} must be finite and nonnegative"
            )));
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        Ok(out)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row_entries(r) {
                d.set(r, c, v);
            }
        }
        d
    }

    /// Applies the operator to a single vector.
    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| self.row_entries(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }
}

/// Sparse-dense product `A · X`.
///
/// Rows are computed in parallel; within a row, contributions are
/// accumulated in increasing column order so results are bit-reproducible.
pub fn spmm(a: &SparseOperator, x: &DenseMatrix) -> Result<DenseMatrix> {
    if a.n != x.rows() {
        return Err(IgtError::DimensionMismatch {
            op: "spmm",
            left_rows: a.n,
            left_cols: a.n,
            right_rows: x.rows(),
            right_cols: x.cols(),
        });
    }
    let p = x.cols();
    let mut out = DenseMatrix::zeros(a.n, p);
    if p == 0 {
        return Ok(out);
    }
    out.values_mut()
        .par_chunks_mut(p)
        .enumerate()
        .for_each(|(r, acc)| {
            for (c, v) in a.row_entries(r) {
                for (o, &xv) in acc.iter_mut().zip(x.row(c)) {
                    *o += v * xv;
                }
            }
        });
    Ok(out)
}
