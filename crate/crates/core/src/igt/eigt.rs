//! Monte-Carlo estimate of the expected cascade, per community:
//! `Ū_0 = X`, `Ū_{n+1} = |(Ū_n − E Ū_n) W_n|`, with the expectations
//! `μ_m = E Ū_m` estimated from i.i.d. feature draws.
//!
//! Two passes keep the centering independent of the reported means: pass 1
//! estimates the centering vectors layer by layer, pass 2 draws a fresh
//! sample, pushes it through the cascade with those centers frozen, and
//! reports means and standard errors.

use rayon::prelude::*;

use crate::error::{IgtError, Result};
use crate::numerics::{DenseMatrix, FeatureMatrix};
use crate::rng;
use crate::sbm::CommunityFeatureSpec;

use super::IgtModel;

const BATCH: usize = 4096;
pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct EigtFeatures {
    /// `means[c][m]` is `μ_m` for community `c`
    pub means: [Vec<Vec<f64>>; 2],
    /// coordinate-wise standard errors of `means`
    pub std_errors: [Vec<Vec<f64>>; 2],
    /// frozen centering vectors from pass 1, same layout as `means`
    pub centers: [Vec<Vec<f64>>; 2],
    pub samples: usize,
}

impl EigtFeatures {
    pub fn order(&self) -> usize {
        self.means[0].len() - 1
    }

    pub fn block_widths(&self) -> Vec<usize> {
        self.means[0].iter().map(Vec::len).collect()
    }

    /// `E Ū_m` stacked as `[μ¹_m 𝟏_{n1}ᵀ, μ²_m 𝟏_{n2}ᵀ]ᵀ`.
    pub fn expected_block(&self, m: usize, n1: usize, n2: usize) -> DenseMatrix {
        replicate(&self.means, m, n1, n2)
    }

    /// Standard errors laid out like [`Self::expected_block`].
    pub fn error_block(&self, m: usize, n1: usize, n2: usize) -> DenseMatrix {
        replicate(&self.std_errors, m, n1, n2)
    }

    /// Frozen pass-1 centers laid out like [`Self::expected_block`]; the
    /// recursion of [`Self::realized_cascade`] subtracts exactly these.
    pub fn center_block(&self, m: usize, n1: usize, n2: usize) -> DenseMatrix {
        replicate(&self.centers, m, n1, n2)
    }

    /// The expected representation `S̄ = {E Ū_0, …, E Ū_N}` on `n1 + n2` nodes.
    pub fn expected_blocks(&self, n1: usize, n2: usize) -> Vec<DenseMatrix> {
        (0..=self.order()).map(|m| self.expected_block(m, n1, n2)).collect()
    }

    /// Pushes a realized signal through the expected recursion with the
    /// frozen centers: row `i` is centered by its community's vector.
    pub fn realized_cascade(&self, model: &IgtModel, x: &FeatureMatrix, n1: usize) -> Result<Vec<DenseMatrix>> {
        if x.cols() != model.input_dim || model.order() != self.order() {
            return Err(IgtError::InvalidArgument(
                "signal, model and expected cascade disagree in shape".into(),
            ));
        }
        if n1 > x.rows() {
            return Err(IgtError::InvalidArgument(format!(
                "community split {n1} exceeds node count {}",
                x.rows()
            )));
        }
        let mut layers = vec![x.clone()];
        for (m, w) in model.isometries.iter().enumerate() {
            let u = layers.last().expect("nonempty");
            let mut centered = u.clone();
            for r in 0..centered.rows() {
                let c = &self.centers[usize::from(r >= n1)][m];
                for (v, &mu) in centered.row_mut(r).iter_mut().zip(c) {
                    *v -= mu;
                }
            }
            layers.push(centered.matmul(w)?.abs());
        }
        Ok(layers)
    }
}

fn replicate(src: &[Vec<Vec<f64>>; 2], m: usize, n1: usize, n2: usize) -> DenseMatrix {
    let width = src[0][m].len();
    DenseMatrix::from_fn(n1 + n2, width, |r, c| src[usize::from(r >= n1)][m][c])
}

/// Per-batch moment sums for every order.
struct Moments {
    sums: Vec<Vec<f64>>,
    squares: Vec<Vec<f64>>,
}

/// Draws `rows` samples of community `c` and returns `Ū_0..=Ū_depth` computed
/// with the given centers (only `centers[..depth]` are used).
fn propagate(
    spec: &CommunityFeatureSpec,
    community: usize,
    model: &IgtModel,
    centers: &[Vec<f64>],
    depth: usize,
    rows: usize,
    seed: u64,
) -> Result<Vec<DenseMatrix>> {
    let mut rng = rng::seeded(seed);
    let mut x = DenseMatrix::zeros(rows, spec.dim());
    for r in 0..rows {
        spec.sample_row(community, &mut rng, x.row_mut(r));
    }
    let mut layers = vec![x];
    for (m, w) in model.isometries.iter().take(depth).enumerate() {
        let mut centered = layers[m].clone();
        for r in 0..rows {
            for (v, &mu) in centered.row_mut(r).iter_mut().zip(&centers[m]) {
                *v -= mu;
            }
        }
        layers.push(centered.matmul(w)?.abs());
    }
    Ok(layers)
}

fn batch_seed(seed: u64, pass: u64, community: usize, layer: usize, batch: usize) -> u64 {
    let stream = (pass << 56) | ((community as u64) << 48) | ((layer as u64) << 32) | batch as u64;
    rng::derive(seed, stream)
}

fn batches(total: usize) -> Vec<(usize, usize)> {
    (0..total.div_ceil(BATCH))
        .map(|b| (b, BATCH.min(total - b * BATCH)))
        .collect()
}

fn moments(
    spec: &CommunityFeatureSpec,
    community: usize,
    model: &IgtModel,
    centers: &[Vec<f64>],
    depth: usize,
    samples: usize,
    seed_of: impl Fn(usize) -> u64 + Sync,
) -> Result<Moments> {
    let parts: Vec<Moments> = batches(samples)
        .into_par_iter()
        .map(|(b, rows)| {
            let layers = propagate(spec, community, model, centers, depth, rows, seed_of(b))?;
            let sums = layers.iter().map(|u| u.column_sums(0..rows)).collect();
            let squares = layers
                .iter()
                .map(|u| u.map(|v| v * v).column_sums(0..rows))
                .collect();
            Ok(Moments { sums, squares })
        })
        .collect::<Result<_>>()?;
    // fixed-order reduction
    let mut acc = Moments {
        sums: parts[0].sums.iter().map(|v| vec![0.0; v.len()]).collect(),
        squares: parts[0].squares.iter().map(|v| vec![0.0; v.len()]).collect(),
    };
    for part in &parts {
        for (a, s) in acc.sums.iter_mut().zip(&part.sums) {
            a.iter_mut().zip(s).for_each(|(x, y)| *x += y);
        }
        for (a, s) in acc.squares.iter_mut().zip(&part.squares) {
            a.iter_mut().zip(s).for_each(|(x, y)| *x += y);
        }
    }
    Ok(acc)
}

/// Monte-Carlo expected cascade with `samples` draws per community and pass.
pub fn eigt_forward(
    model: &IgtModel,
    spec: &CommunityFeatureSpec,
    samples: usize,
    seed: u64,
) -> Result<EigtFeatures> {
    if samples < MIN_SAMPLES {
        return Err(IgtError::InvalidArgument(format!(
            "expected cascade needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    if spec.dim() != model.input_dim {
        return Err(IgtError::InvalidArgument(format!(
            "feature law has dimension {}, model expects {}",
            spec.dim(),
            model.input_dim
        )));
    }
    spec.validate()?;
    let order = model.order();
    let mut means: [Vec<Vec<f64>>; 2] = Default::default();
    let mut std_errors: [Vec<Vec<f64>>; 2] = Default::default();
    let mut centers: [Vec<Vec<f64>>; 2] = Default::default();
    let m_f = samples as f64;
    for c in 0..2 {
        // pass 1: centers, one layer at a time
        let mut cs: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
        for layer in 0..=order {
            let mom = moments(spec, c, model, &cs, layer, samples, |b| batch_seed(seed, 1, c, layer, b))?;
            cs.push(mom.sums[layer].iter().map(|s| s / m_f).collect());
        }
        // pass 2: fresh draws through the frozen centers
        let mom = moments(spec, c, model, &cs, order, samples, |b| batch_seed(seed, 2, c, 0, b))?;
        let mut mu = Vec::with_capacity(order + 1);
        let mut se = Vec::with_capacity(order + 1);
        for (sums, squares) in mom.sums.iter().zip(&mom.squares) {
            let mean: Vec<f64> = sums.iter().map(|s| s / m_f).collect();
            let err = squares
                .iter()
                .zip(&mean)
                .map(|(sq, mu)| {
                    let var = ((sq - m_f * mu * mu) / (m_f - 1.0)).max(0.0);
                    (var / m_f).sqrt()
                })
                .collect();
            mu.push(mean);
            se.push(err);
        }
        means[c] = mu;
        std_errors[c] = se;
        centers[c] = cs;
    }
    Ok(EigtFeatures {
        means,
        std_errors,
        centers,
        samples,
    })
}
