use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::DenseMatrix;
use crate::error::{IgtError, Result};
use crate::rng;

pub const DEFAULT_POWER_TOL: f64 = 1e-8;
pub const DEFAULT_POWER_MAX_ITER: usize = 10_000;
const POWER_SEED: u64 = 0x005e_ed0f_90e5;
const SVD_MAX_ITER: usize = 10_000;

/// Outcome of a power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest singular value of an implicit operator, given the action of its
/// Gram matrix `v ↦ MᵀM v` on vectors of length `dim`.
///
/// Stops once the extrapolated error of the estimate falls below
/// `tol · estimate`. The contraction ratio is estimated from successive
/// changes so that slowly converging iterations are not stopped early.
pub fn power_iteration(
    dim: usize,
    mut apply_gram: impl FnMut(&[f64]) -> Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<SpectralEstimate> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(IgtError::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    if dim == 0 {
        return Ok(SpectralEstimate { value: 0.0, iterations: 0, converged: true });
    }
    let mut rng = rng::seeded(POWER_SEED);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    normalize(&mut v);

    let mut lambda = 0.0f64;
    let mut prev_change = f64::INFINITY;
    for it in 1..=max_iter {
        let mut w = apply_gram(&v);
        if w.iter().any(|x| !x.is_finite()) {
            return Err(IgtError::NonFinite("power_iteration"));
        }
        let next: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().max(0.0);
        let norm = normalize(&mut w);
        if norm == 0.0 {
            return Ok(SpectralEstimate { value: 0.0, iterations: it, converged: true });
        }
        v = w;
        let change = (next - lambda).abs();
        lambda = next;
        if it > 2 {
            let ratio = (change / prev_change).min(0.999_999);
            let bound = if ratio.is_finite() { change * ratio / (1.0 - ratio) } else { change };
            // relative error in sigma is half the relative error in lambda
            if bound.max(change) <= 2.0 * tol * lambda {
                return Ok(SpectralEstimate {
                    value: lambda.sqrt(),
                    iterations: it,
                    converged: true,
                });
            }
        }
        prev_change = change;
    }
    Ok(SpectralEstimate {
        value: lambda.sqrt(),
        iterations: max_iter,
        converged: false,
    })
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Largest singular value of `m` by power iteration on `mᵀm`.
pub fn spectral_norm(m: &DenseMatrix, tol: f64, max_iter: usize) -> Result<SpectralEstimate> {
    if !m.is_finite() {
        return Err(IgtError::NonFinite("spectral_norm"));
    }
    let (rows, cols) = m.shape();
    power_iteration(
        cols,
        |v| {
            let mut mv = vec![0.0; rows];
            for (r, out) in mv.iter_mut().enumerate() {
                *out = m.row(r).iter().zip(v).map(|(a, b)| a * b).sum();
            }
            let mut g = vec![0.0; cols];
            for (r, &s) in mv.iter().enumerate() {
                for (gc, &a) in g.iter_mut().zip(m.row(r)) {
                    *gc += a * s;
                }
            }
            g
        },
        tol,
        max_iter,
    )
}

fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.values())
}

fn from_nalgebra(m: &DMatrix<f64>) -> DenseMatrix {
    DenseMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
}

/// Singular values of `m`, unordered.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    let svd = to_nalgebra(m)
        .try_svd(false, false, f64::EPSILON, SVD_MAX_ITER)
        .ok_or(IgtError::SvdNoConvergence { iterations: SVD_MAX_ITER })?;
    Ok(svd.singular_values.iter().copied().collect())
}

/// Euclidean projection onto the spectral-norm unit ball: singular values
/// above one are clipped to one. Matrices already inside the ball are
/// returned unchanged.
pub fn project_spectral_ball(w: &DenseMatrix) -> Result<DenseMatrix> {
    if !w.is_finite() {
        return Err(IgtError::NonFinite("project_spectral_ball"));
    }
    if w.rows() == 0 || w.cols() == 0 {
        return Ok(w.clone());
    }
    let svd = to_nalgebra(w)
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or(IgtError::SvdNoConvergence { iterations: SVD_MAX_ITER })?;
    if svd.singular_values.iter().all(|&s| s <= 1.0) {
        return Ok(w.clone());
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut clipped = u.clone();
    for (j, &s) in svd.singular_values.iter().enumerate() {
        let s = s.min(1.0);
        clipped.column_mut(j).scale_mut(s);
    }
    Ok(from_nalgebra(&(clipped * v_t)))
}

/// Maximizer of `⟨G, W⟩` over the spectral-norm unit ball: the polar factor
/// `U Vᵀ` of `G = U Σ Vᵀ`. Directions with singular value below
/// `1e-12 · σ_max` are dropped. Returns `None` for a zero matrix.
pub fn spectral_ball_maximizer(g: &DenseMatrix) -> Result<Option<DenseMatrix>> {
    if !g.is_finite() {
        return Err(IgtError::NonFinite("spectral_ball_maximizer"));
    }
    if g.rows() == 0 || g.cols() == 0 {
        return Ok(None);
    }
    let svd = to_nalgebra(g)
        .try_svd(true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or(IgtError::SvdNoConvergence { iterations: SVD_MAX_ITER })?;
    let top = svd.singular_values.max();
    if top == 0.0 {
        return Ok(None);
    }
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut polar = u.clone();
    for (j, &s) in svd.singular_values.iter().enumerate() {
        let keep = if s > 1e-12 * top { 1.0 } else { 0.0 };
        polar.column_mut(j).scale_mut(keep);
    }
    Ok(Some(from_nalgebra(&(polar * v_t))))
}

/// Matrix with orthonormal columns from modified Gram-Schmidt on a seeded
/// Gaussian draw.
pub fn semi_orthogonal_init(rows: usize, cols: usize, seed: u64) -> Result<DenseMatrix> {
    if cols > rows {
        return Err(IgtError::InvalidArgument(format!(
            "semi-orthogonal matrix needs cols <= rows, got {rows}x{cols}"
        )));
    }
    let mut rng = rng::seeded(seed);
    // column-major working copy
    let mut q: Vec<Vec<f64>> = (0..cols)
        .map(|_| (0..rows).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    for j in 0..cols {
        // two passes of MGS restore orthogonality lost to cancellation
        for _ in 0..2 {
            for i in 0..j {
                let (done, rest) = q.split_at_mut(j);
                let proj: f64 = done[i].iter().zip(&rest[0]).map(|(a, b)| a * b).sum();
                for (x, &b) in rest[0].iter_mut().zip(&done[i]) {
                    *x -= proj * b;
                }
            }
        }
        if normalize(&mut q[j]) < 1e-12 {
            return Err(IgtError::InvalidArgument(
                "degenerate Gaussian draw in semi-orthogonal init".into(),
            ));
        }
    }
    Ok(DenseMatrix::from_fn(rows, cols, |r, c| q[c][r]))
}
