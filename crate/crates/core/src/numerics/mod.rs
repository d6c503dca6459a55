//! Dense and sparse kernels, norms and projections.

mod dense;
mod linalg;
mod sparse;

pub use dense::{DenseMatrix, FeatureMatrix};
pub use linalg::{
    power_iteration, project_spectral_ball, semi_orthogonal_init, singular_values, spectral_ball_maximizer, spectral_norm,
    SpectralEstimate, DEFAULT_POWER_MAX_ITER, DEFAULT_POWER_TOL,
};
pub use sparse::{spmm, SparseOperator};

pub fn frobenius_norm(m: &DenseMatrix) -> f64 {
    m.frobenius_norm()
}
