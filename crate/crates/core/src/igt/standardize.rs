use crate::numerics::{DenseMatrix, FeatureMatrix};

use super::IgtFeatures;

/// Columns whose population std falls below this are mapped to zero.
pub const CONSTANT_COLUMN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnStats {
    pub means: Vec<f64>,
    /// population standard deviations; `0` marks a constant column
    pub stds: Vec<f64>,
}

impl ColumnStats {
    pub fn of(m: &DenseMatrix) -> Self {
        let n = m.rows() as f64;
        let means: Vec<f64> = m.column_sums(0..m.rows()).iter().map(|s| s / n).collect();
        let mut sq = vec![0.0; m.cols()];
        for r in 0..m.rows() {
            for ((acc, &v), &mu) in sq.iter_mut().zip(m.row(r)).zip(&means) {
                *acc += (v - mu) * (v - mu);
            }
        }
        let stds = sq
            .iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd < CONSTANT_COLUMN_EPS {
                    0.0
                } else {
                    sd
                }
            })
            .collect();
        Self { means, stds }
    }

    pub fn apply(&self, m: &DenseMatrix) -> FeatureMatrix {
        let mut out = m.clone();
        for r in 0..out.rows() {
            for ((v, &mu), &sd) in out.row_mut(r).iter_mut().zip(&self.means).zip(&self.stds) {
                *v = if sd == 0.0 { 0.0 } else { (*v - mu) / sd };
            }
        }
        out
    }
}

/// Column-wise standardization over all nodes (transductive).
pub fn standardize_matrix(m: &DenseMatrix) -> (FeatureMatrix, ColumnStats) {
    let stats = ColumnStats::of(m);
    (stats.apply(m), stats)
}

/// Standardizes the concatenated IGT blocks.
pub fn standardize(f: &IgtFeatures) -> (FeatureMatrix, ColumnStats) {
    standardize_matrix(&f.concatenated())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_column_maps_to_zero() {
        let m = DenseMatrix::from_rows(&[vec![4.0, 1.0], vec![4.0, 2.0], vec![4.0, 3.0]]);
        let (s, stats) = standardize_matrix(&m);
        assert!(s.column(0).iter().all(|&v| v == 0.0));
        assert_eq!(stats.stds[0], 0.0);
    }

    #[test]
    fn one_two_three() {
        let m = DenseMatrix::from_rows(&[vec![1.0], vec![2.0], vec![3.0]]);
        let (s, _) = standardize_matrix(&m);
        let r = 1.5f64.sqrt();
        for (got, want) in s.values().iter().zip([-r, 0.0, r]) {
            assert!((got - want).abs() < 1e-9);
        }
    }

    #[test]
    fn idempotent() {
        let m = DenseMatrix::from_fn(7, 3, |r, c| ((r * 7 + c * 3) % 5) as f64 * 1.3 - c as f64);
        let (once, _) = standardize_matrix(&m);
        let (twice, _) = standardize_matrix(&once);
        assert!(once.sub(&twice).unwrap().values().iter().all(|d| d.abs() < 1e-9));
    }
}
