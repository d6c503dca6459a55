//! Two-community stochastic block model: graph and feature sampling, and
//! the closed-form normalized expected adjacency.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{IgtError, Result};
use crate::graph::Graph;
use crate::numerics::{power_iteration, DenseMatrix, FeatureMatrix, SparseOperator};
use crate::rng;

/// Above this node count edges are drawn by geometric skipping instead of
/// one Bernoulli draw per pair.
pub const PAIRWISE_SAMPLING_LIMIT: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmSpec {
    pub n1: usize,
    pub n2: usize,
    /// intra-community edge probability
    pub p: f64,
    /// inter-community probability is `tau * p`
    pub tau: f64,
    pub seed: u64,
}

impl SbmSpec {
    pub fn new(n1: usize, n2: usize, p: f64, tau: f64, seed: u64) -> Result<Self> {
        let spec = Self { n1, n2, p, tau, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 || self.n2 == 0 {
            return Err(IgtError::InvalidArgument("both communities need at least one node".into()));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(IgtError::InvalidArgument(format!("p={} outside [0, 1]", self.p)));
        }
        if self.tau.is_nan() || self.tau < 0.0 || !(0.0..=1.0).contains(&self.q()) {
            return Err(IgtError::InvalidArgument(format!(
                "tau={} gives q={} outside [0, 1]",
                self.tau,
                self.q()
            )));
        }
        Ok(())
    }

    pub fn q(&self) -> f64 {
        self.tau * self.p
    }

    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    pub fn community(&self, node: usize) -> usize {
        usize::from(node >= self.n1)
    }

    pub fn labels(&self) -> Vec<usize> {
        (0..self.n()).map(|i| self.community(i)).collect()
    }

    pub fn expected_operator(&self) -> Result<ExpectedOperator> {
        expected_normalized_adjacency(self.n1, self.n2, self.p, self.q())
    }
}

/// Samples the graph. Nodes `0..n1` form community 0, the rest community 1.
///
/// For `n <= 5000` the pairs `(i, j)`, `i < j`, are visited in row-major
/// order with one uniform draw each. Larger graphs visit the three blocks
/// (intra-0, intra-1, inter) in that order and jump between successes with
/// geometric gaps; both schemes draw from a ChaCha8 stream seeded by `seed`.
pub fn sample_sbm(spec: &SbmSpec) -> Result<Graph> {
    spec.validate()?;
    let n = spec.n();
    let (p, q) = (spec.p, spec.q());
    let mut rng = rng::seeded(spec.seed);
    let mut edges = Vec::new();
    if n <= PAIRWISE_SAMPLING_LIMIT {
        for i in 0..n {
            for j in i + 1..n {
                let prob = if spec.community(i) == spec.community(j) { p } else { q };
                if rng.random::<f64>() < prob {
                    edges.push((i, j));
                }
            }
        }
    } else {
        let (n1, n2) = (spec.n1, spec.n2);
        skip_sample(&mut rng, p, triangle_len(n1), |k| {
            let (i, j) = triangle_pair(n1, k);
            edges.push((i, j));
        });
        skip_sample(&mut rng, p, triangle_len(n2), |k| {
            let (i, j) = triangle_pair(n2, k);
            edges.push((n1 + i, n1 + j));
        });
        skip_sample(&mut rng, q, (n1 * n2) as u64, |k| {
            let k = k as usize;
            edges.push((k / n2, n1 + k % n2));
        });
    }
    Graph::new(n, edges)
}

fn triangle_len(m: usize) -> u64 {
    (m as u64) * (m as u64).saturating_sub(1) / 2
}

/// Inverse of the row-major enumeration of `{(i, j) : i < j < m}`.
fn triangle_pair(m: usize, k: u64) -> (usize, usize) {
    // rows before i hold i*m - i(i+1)/2 pairs
    let mf = m as f64;
    let kf = k as f64;
    let disc = (2.0 * mf - 1.0) * (2.0 * mf - 1.0) - 8.0 * kf;
    let mut i = (((2.0 * mf - 1.0) - disc.max(0.0).sqrt()) / 2.0).floor() as u64;
    let start = |i: u64| i * m as u64 - i * (i + 1) / 2;
    while i > 0 && start(i) > k {
        i -= 1;
    }
    while start(i + 1) <= k {
        i += 1;
    }
    let j = i + 1 + (k - start(i));
    (i as usize, j as usize)
}

fn skip_sample(rng: &mut rng::Rng, prob: f64, total: u64, mut emit: impl FnMut(u64)) {
    if prob <= 0.0 || total == 0 {
        return;
    }
    if prob >= 1.0 {
        (0..total).for_each(emit);
        return;
    }
    let log_q = (1.0 - prob).ln();
    let mut idx: u64 = 0;
    loop {
        let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
        let gap = (u.ln() / log_q).floor();
        if !gap.is_finite() || gap >= (total - idx) as f64 {
            return;
        }
        idx += gap as u64;
        emit(idx);
        idx += 1;
        if idx >= total {
            return;
        }
    }
}

/// Per-community Gaussian feature law: row `i` of community `c` is
/// `mean_c + sigma_c · N(0, I_P)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityFeatureSpec {
    pub means: [Vec<f64>; 2],
    pub sigmas: [f64; 2],
}

impl CommunityFeatureSpec {
    pub fn new(mean1: Vec<f64>, mean2: Vec<f64>, sigma1: f64, sigma2: f64) -> Result<Self> {
        let spec = Self {
            means: [mean1, mean2],
            sigmas: [sigma1, sigma2],
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Zero-mean features, std `sigma1` and `sigma1 + delta_sigma`.
    pub fn centered(dim: usize, sigma1: f64, delta_sigma: f64) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![0.0; dim], sigma1, sigma1 + delta_sigma)
    }

    pub fn validate(&self) -> Result<()> {
        if self.means[0].len() != self.means[1].len() {
            return Err(IgtError::InvalidArgument(
                "community mean vectors differ in dimension".into(),
            ));
        }
        if self.sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite()))
            || self.means.iter().flatten().any(|m| !m.is_finite())
        {
            return Err(IgtError::InvalidArgument("invalid feature law parameters".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    /// `E‖x‖² − ‖Ex‖²` for one row of community `c`.
    pub fn row_variance(&self, c: usize) -> f64 {
        self.sigmas[c] * self.sigmas[c] * self.dim() as f64
    }

    /// Same law with every mean and std multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            means: [
                self.means[0].iter().map(|m| m * factor).collect(),
                self.means[1].iter().map(|m| m * factor).collect(),
            ],
            sigmas: [self.sigmas[0] * factor, self.sigmas[1] * factor],
        }
    }

    pub fn sample_row(&self, community: usize, rng: &mut rng::Rng, out: &mut [f64]) {
        let (mean, sigma) = (&self.means[community], self.sigmas[community]);
        for (o, &m) in out.iter_mut().zip(mean) {
            let z: f64 = rng.sample(StandardNormal);
            *o = m + sigma * z;
        }
    }

    /// Replicates the community means into an `(n1 + n2) × P` matrix.
    pub fn mean_matrix(&self, n1: usize, n2: usize) -> DenseMatrix {
        DenseMatrix::from_fn(n1 + n2, self.dim(), |r, c| self.means[usize::from(r >= n1)][c])
    }
}

/// Draws `n1` rows from community 0 then `n2` rows from community 1.
pub fn sample_features(
    spec: &CommunityFeatureSpec,
    n1: usize,
    n2: usize,
    seed: u64,
) -> Result<FeatureMatrix> {
    spec.validate()?;
    let mut rng = rng::seeded(seed);
    let mut x = DenseMatrix::zeros(n1 + n2, spec.dim());
    for r in 0..n1 + n2 {
        spec.sample_row(usize::from(r >= n1), &mut rng, x.row_mut(r));
    }
    Ok(x)
}

/// Normalized expected adjacency of the block model, kept in factored form:
/// row `i` of community 0 is `(p 𝟏_{n1}, q 𝟏_{n2}) / (n1 p + n2 q)` and row
/// `i` of community 1 is `(q 𝟏_{n1}, p 𝟏_{n2}) / (n1 q + n2 p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedOperator {
    pub n1: usize,
    pub n2: usize,
    pub p: f64,
    pub q: f64,
}

pub fn expected_normalized_adjacency(
    n1: usize,
    n2: usize,
    p: f64,
    q: f64,
) -> Result<ExpectedOperator> {
    let e = ExpectedOperator { n1, n2, p, q };
    let (z1, z2) = e.normalizers();
    if !(z1 > 0.0 && z2 > 0.0) {
        return Err(IgtError::ZeroNormalizer { n1, n2, p, q });
    }
    Ok(e)
}

impl ExpectedOperator {
    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    fn normalizers(&self) -> (f64, f64) {
        let (n1, n2) = (self.n1 as f64, self.n2 as f64);
        (n1 * self.p + n2 * self.q, n1 * self.q + n2 * self.p)
    }

    /// Block values `[(1,1), (1,2), (2,1), (2,2)]`.
    pub fn block_values(&self) -> [f64; 4] {
        let (z1, z2) = self.normalizers();
        [self.p / z1, self.q / z1, self.q / z2, self.p / z2]
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let b = self.block_values();
        let n1 = self.n1;
        DenseMatrix::from_fn(self.n(), self.n(), |r, c| {
            b[2 * usize::from(r >= n1) + usize::from(c >= n1)]
        })
    }

    fn check(&self, x: &DenseMatrix) -> Result<()> {
        if x.rows() != self.n() {
            return Err(IgtError::DimensionMismatch {
                op: "expected operator",
                left_rows: self.n(),
                left_cols: self.n(),
                right_rows: x.rows(),
                right_cols: x.cols(),
            });
        }
        Ok(())
    }

    fn combine(&self, x: &DenseMatrix, coef: [f64; 4]) -> DenseMatrix {
        let s1 = x.column_sums(0..self.n1);
        let s2 = x.column_sums(self.n1..self.n());
        let row1: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| coef[0] * a + coef[1] * b).collect();
        let row2: Vec<f64> = s1.iter().zip(&s2).map(|(a, b)| coef[2] * a + coef[3] * b).collect();
        let mut out = DenseMatrix::zeros(self.n(), x.cols());
        for r in 0..self.n() {
            out.row_mut(r)
                .copy_from_slice(if r < self.n1 { &row1 } else { &row2 });
        }
        out
    }

    /// `E X` in `O(nP)` via the two community sums.
    pub fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.check(x)?;
        Ok(self.combine(x, self.block_values()))
    }

    /// `Eᵀ X`.
    pub fn apply_transpose(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.check(x)?;
        let [b11, b12, b21, b22] = self.block_values();
        Ok(self.combine(x, [b11, b21, b12, b22]))
    }
}

pub const DEVIATION_TOL: f64 = 1e-6;

/// Spectral norm `‖A − E‖`, by power iteration on the lazily applied
/// difference.
pub fn operator_deviation(a: &SparseOperator, e: &ExpectedOperator) -> Result<f64> {
    if a.n() != e.n() {
        return Err(IgtError::DimensionMismatch {
            op: "operator_deviation",
            left_rows: a.n(),
            left_cols: a.n(),
            right_rows: e.n(),
            right_cols: e.n(),
        });
    }
    let n = a.n();
    let as_col = |v: &[f64]| DenseMatrix::new(n, 1, v.to_vec()).expect("finite vector");
    let est = power_iteration(
        n,
        |v| {
            let ev = e.apply(&as_col(v)).expect("shape checked");
            let dv: Vec<f64> = a.apply_vec(v).iter().zip(ev.values()).map(|(x, y)| x - y).collect();
            let etdv = e.apply_transpose(&as_col(&dv)).expect("shape checked");
            a.apply_vec(&dv)
                .iter()
                .zip(etdv.values())
                .map(|(x, y)| x - y)
                .collect()
        },
        DEVIATION_TOL,
        crate::numerics::DEFAULT_POWER_MAX_ITER,
    )?;
    if !est.converged {
        return Err(IgtError::PowerIterationNoConvergence {
            iterations: est.iterations,
            last_change: f64::NAN,
        });
    }
    Ok(est.value)
}
