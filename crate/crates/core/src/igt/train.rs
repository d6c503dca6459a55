use crate::error::{IgtError, Result};
use crate::graph::{apply_smoothing, high_pass, SmoothingScale};
use crate::numerics::{
    project_spectral_ball, semi_orthogonal_init, spectral_ball_maximizer, DenseMatrix,
    FeatureMatrix, SparseOperator,
};
use crate::optim::{Adam, AdamConfig};
use crate::rng;

use super::{IgtConfig, IgtModel, IsometryOptimizer};

/// Objective values per layer: entry `e` is the value before update `e`,
/// the last entry is the value after the final update.
pub type ObjectiveTrace = Vec<Vec<f64>>;

/// `‖A_J |H W|‖` and its gradient with respect to `W`, where `H` is the
/// high-passed layer input `(I − A_J) U_n`.
///
/// The modulus is differentiated with `sign(0) = 0`; the gradient is zero
/// when the objective vanishes.
pub fn isometry_objective(
    a: &SparseOperator,
    high: &DenseMatrix,
    w: &DenseMatrix,
    scale: SmoothingScale,
) -> Result<(f64, DenseMatrix)> {
    let z = high.matmul(w)?;
    let y = apply_smoothing(a, &z.abs(), scale)?;
    let value = y.frobenius_norm();
    if value == 0.0 {
        return Ok((0.0, DenseMatrix::zeros(w.rows(), w.cols())));
    }
    let g_v = apply_smoothing(a, &y.scale(1.0 / value), scale)?;
    let mut g_z = g_v;
    for (g, &zv) in g_z.values_mut().iter_mut().zip(z.values()) {
        *g *= if zv > 0.0 {
            1.0
        } else if zv < 0.0 {
            -1.0
        } else {
            0.0
        };
    }
    Ok((value, high.t_matmul(&g_z)?))
}

/// Greedy layer-wise training of the isometries.
///
/// Layer `n` maximizes `‖A_J |(I − A_J) U_n W|‖` over `‖W‖₂ ≤ 1` for
/// `epochs` full-batch steps of the configured update rule, each landing in
/// the spectral ball. `W_n` is then frozen and `U_{n+1}` computed from it.
pub fn train_isometries(
    x: &FeatureMatrix,
    a: &SparseOperator,
    config: &IgtConfig,
) -> Result<IgtModel> {
    train_isometries_traced(x, a, config).map(|(m, _)| m)
}

pub fn train_isometries_traced(
    x: &FeatureMatrix,
    a: &SparseOperator,
    config: &IgtConfig,
) -> Result<(IgtModel, ObjectiveTrace)> {
    if a.n() != x.rows() {
        return Err(x.mismatch(&DenseMatrix::zeros(a.n(), a.n()), "train_isometries"));
    }
    config.validate(x.cols())?;
    let scale = config.scale;
    let mut isometries = Vec::with_capacity(config.order);
    let mut trace = Vec::with_capacity(config.order);
    let mut u = x.clone();
    for layer in 0..config.order {
        let high = high_pass(a, &u, scale)?;
        let mut w = semi_orthogonal_init(u.cols(), config.rank, rng::derive(config.seed, layer as u64))?;
        let mut adam = Adam::new(AdamConfig::with_learning_rate(config.learning_rate), w.values().len());
        let mut values = Vec::with_capacity(config.epochs + 1);
        for epoch in 0..config.epochs {
            let (value, grad) = isometry_objective(a, &high, &w, scale)?;
            if !value.is_finite() || !grad.is_finite() {
                return Err(IgtError::NonFiniteGradient { layer, epoch });
            }
            values.push(value);
            match config.optimizer {
                IsometryOptimizer::ProjectedAscent => {
                    if let Some(next) = spectral_ball_maximizer(&grad)? {
                        w = next;
                    }
                }
                IsometryOptimizer::Adam => {
                    let descent: Vec<f64> = grad.values().iter().map(|g| -g).collect();
                    adam.step(w.values_mut(), &descent);
                    w = project_spectral_ball(&w)?;
                }
            }
        }
        let (final_value, _) = isometry_objective(a, &high, &w, scale)?;
        values.push(final_value);
        log::debug!(
            "layer {layer}: objective {:.6e} -> {:.6e}",
            values.first().copied().unwrap_or(0.0),
            final_value
        );
        u = high.matmul(&w)?.abs();
        isometries.push(w);
        trace.push(values);
    }
    let model = IgtModel::new(config.clone(), x.cols(), isometries)?;
    Ok((model, trace))
}
