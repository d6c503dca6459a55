use crate::error::{IgtError, Result};
use crate::graph::{apply_smoothing, high_pass, SmoothingScale};
use crate::numerics::{DenseMatrix, FeatureMatrix, SparseOperator};

use super::IgtModel;

/// IGT representation: one low-pass block `A_J U_m` per order `m = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct IgtFeatures {
    pub blocks: Vec<DenseMatrix>,
}

impl IgtFeatures {
    pub fn n(&self) -> usize {
        self.blocks.first().map_or(0, DenseMatrix::rows)
    }

    pub fn block_widths(&self) -> Vec<usize> {
        self.blocks.iter().map(DenseMatrix::cols).collect()
    }

    /// Blocks side by side, width `P + N·k`.
    pub fn concatenated(&self) -> DenseMatrix {
        let refs: Vec<&DenseMatrix> = self.blocks.iter().collect();
        DenseMatrix::hconcat(&refs).expect("blocks share row count")
    }

    /// `‖S X‖`, the Frobenius norm over all blocks.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(DenseMatrix::sum_squares).sum::<f64>().sqrt()
    }

    /// `‖S X − S Y‖`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.blocks.len() != other.blocks.len() {
            return Err(IgtError::InvalidArgument("representations differ in order".into()));
        }
        let mut total = 0.0;
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            total += a.sub(b)?.sum_squares();
        }
        Ok(total.sqrt())
    }
}

/// The modulus cascade `U_0 = X`, `U_{n+1} = |(I − A_J) U_n W_n|`.
pub fn cascade(
    a: &SparseOperator,
    x: &FeatureMatrix,
    isometries: &[DenseMatrix],
    scale: SmoothingScale,
) -> Result<Vec<DenseMatrix>> {
    let mut layers = Vec::with_capacity(isometries.len() + 1);
    layers.push(x.clone());
    for w in isometries {
        let u = layers.last().expect("nonempty");
        let next = high_pass(a, u, scale)?.matmul(w)?.abs();
        layers.push(next);
    }
    Ok(layers)
}

/// Forward pass with explicit isometries (trained or not).
pub fn igt_forward_with(
    a: &SparseOperator,
    x: &FeatureMatrix,
    isometries: &[DenseMatrix],
    scale: SmoothingScale,
) -> Result<IgtFeatures> {
    let blocks = cascade(a, x, isometries, scale)?
        .iter()
        .map(|u| apply_smoothing(a, u, scale))
        .collect::<Result<Vec<_>>>()?;
    Ok(IgtFeatures { blocks })
}

pub fn igt_forward(model: &IgtModel, x: &FeatureMatrix, a: &SparseOperator) -> Result<IgtFeatures> {
    if x.cols() != model.input_dim {
        return Err(IgtError::DimensionMismatch {
            op: "igt_forward",
            left_rows: x.rows(),
            left_cols: x.cols(),
            right_rows: model.input_dim,
            right_cols: model.config.rank,
        });
    }
    igt_forward_with(a, x, &model.isometries, model.scale())
}
