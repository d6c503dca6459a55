use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{IgtError, Result};
use crate::graph::{apply_smoothing, normalize_adjacency, Graph, SmoothingScale};
use crate::igt::{eigt_forward, igt_forward, train_isometries, EigtFeatures, IgtConfig, IgtModel};
use crate::numerics::{DenseMatrix, FeatureMatrix, SparseOperator};
use crate::rng;
use crate::sbm::{sample_features, sample_sbm, CommunityFeatureSpec, SbmSpec};

use super::{mean_se, BoundReport, TrialMeta, ABS_SLACK, SE_MULTIPLIER};

/// Round-off allowance of exact identities, relative to the right side.
const EXACT_REL_TOL: f64 = 1e-9;

/// `‖A_J X‖² + ‖(I − A_J) X‖²` against `‖X‖²`.
pub fn check_energy_split(a: &SparseOperator, x: &FeatureMatrix, scale: SmoothingScale) -> Result<BoundReport> {
    let low = apply_smoothing(a, x, scale)?;
    let high = x.sub(&low)?;
    let lhs = low.sum_squares() + high.sum_squares();
    let rhs = x.sum_squares();
    Ok(BoundReport::new("energy_split", lhs, rhs, EXACT_REL_TOL * rhs.max(1.0)).with_meta(TrialMeta {
        n: a.n(),
        scale: scale.0,
        ..Default::default()
    }))
}

/// `‖S X − S Y‖ / ‖X − Y‖`, zero when `X = Y`.
pub fn lipschitz_ratio(model: &IgtModel, a: &SparseOperator, x: &FeatureMatrix, y: &FeatureMatrix) -> Result<f64> {
    let denom = x.sub(y)?.frobenius_norm();
    if denom == 0.0 {
        return Ok(0.0);
    }
    let sx = igt_forward(model, x, a)?;
    let sy = igt_forward(model, y, a)?;
    Ok(sx.distance(&sy)? / denom)
}

/// Largest Lipschitz ratio over `trials` random pairs. Every fourth pair
/// has `Y = 0`, where the ratio is `‖S X‖ / ‖X‖`; the others perturb `X` at
/// scales spread over four decades.
pub fn check_lipschitz_pairs(model: &IgtModel, a: &SparseOperator, trials: usize, seed: u64) -> Result<BoundReport> {
    let (n, p) = (a.n(), model.input_dim);
    let ratios = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut r = rng::seeded(rng::derive(seed, t as u64));
            let amp = 10f64.powf(r.random_range(-1.0..1.0));
            let x = DenseMatrix::from_fn(n, p, |_, _| amp * r.sample::<f64, _>(StandardNormal));
            let y = if t % 4 == 0 {
                DenseMatrix::zeros(n, p)
            } else {
                let eps = 10f64.powf(r.random_range(-3.0..1.0));
                let noise = DenseMatrix::from_fn(n, p, |_, _| eps * r.sample::<f64, _>(StandardNormal));
                x.add(&noise)?
            };
            lipschitz_ratio(model, a, &x, &y)
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = ratios.into_iter().fold(0.0, f64::max);
    Ok(BoundReport::new("lipschitz", worst, 1.0, ABS_SLACK).with_meta(TrialMeta {
        n,
        order: model.order(),
        scale: model.scale().0,
        seed,
        ..Default::default()
    }))
}

/// `‖Ū_n‖ ≤ 2ⁿ` along the expected recursion, one report per order.
///
/// `draws` signals are sampled and the law is rescaled by the largest
/// observed norm, so every draw satisfies `‖X‖ ≤ 1` (and `E‖X‖ ≤ 1`).
pub fn check_bounded_cascade(
    model: &IgtModel,
    features: &CommunityFeatureSpec,
    n1: usize,
    n2: usize,
    draws: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<BoundReport>> {
    let raw = (0..draws)
        .map(|d| sample_features(features, n1, n2, rng::derive(seed, d as u64)))
        .collect::<Result<Vec<_>>>()?;
    let largest = raw.iter().map(DenseMatrix::frobenius_norm).fold(0.0, f64::max);
    let factor = if largest > 0.0 { 1.0 / largest } else { 1.0 };
    let law = features.scaled(factor);
    let eigt = eigt_forward(model, &law, samples, rng::derive(seed, u64::MAX))?;
    let norms = raw
        .par_iter()
        .map(|x| {
            let layers = eigt.realized_cascade(model, &x.scale(factor), n1)?;
            Ok(layers.iter().map(DenseMatrix::frobenius_norm).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut reports = Vec::with_capacity(model.order() + 1);
    let mut center_se = 0.0;
    for m in 0..=model.order() {
        let worst = norms.iter().map(|v| v[m]).fold(0.0, f64::max);
        reports.push(
            BoundReport::statistical("bounded_cascade", worst, 2f64.powi(m as i32), center_se).with_meta(TrialMeta {
                n: n1 + n2,
                order: m,
                seed,
                ..Default::default()
            }),
        );
        center_se += eigt.error_block(m, n1, n2).frobenius_norm();
    }
    Ok(reports)
}

/// Tree bound `‖S X − S̄ X‖ ≤ √2 Σ_m ‖A_J Ū_m − E Ū_m‖`.
///
/// `E Ū_m` is the frozen Monte-Carlo center of each community, replicated
/// over its rows (nodes `0..n1` are community 0), and `Ū_m` is the expected
/// recursion run on the realized `X` with those centers.
pub fn check_tree_bound(
    model: &IgtModel,
    x: &FeatureMatrix,
    a: &SparseOperator,
    eigt: &EigtFeatures,
    n1: usize,
) -> Result<BoundReport> {
    if n1 > x.rows() || eigt.order() != model.order() || eigt.block_widths()[0] != x.cols() {
        return Err(IgtError::InvalidArgument(format!(
            "community split {n1} of {} nodes, order {} and width {} disagree with the expected cascade",
            x.rows(),
            model.order(),
            x.cols()
        )));
    }
    let n2 = x.rows() - n1;
    let s = igt_forward(model, x, a)?;
    let bar = eigt.realized_cascade(model, x, n1)?;
    let (mut lhs2, mut rhs, mut se2, mut se_sum) = (0.0, 0.0, 0.0, 0.0);
    for (m, (block, realized)) in s.blocks.iter().zip(&bar).enumerate() {
        let center = eigt.center_block(m, n1, n2);
        lhs2 += block.sub(&center)?.sum_squares();
        rhs += apply_smoothing(a, realized, model.scale())?.sub(&center)?.frobenius_norm();
        let se = eigt.error_block(m, n1, n2).frobenius_norm();
        se2 += se * se;
        se_sum += se;
    }
    let sqrt2 = std::f64::consts::SQRT_2;
    Ok(BoundReport::statistical("tree_bound", lhs2.sqrt(), sqrt2 * rhs, se2.sqrt() + sqrt2 * se_sum)
        .with_meta(TrialMeta {
            n: x.rows(),
            order: model.order(),
            scale: model.scale().0,
            ..Default::default()
        }))
}

/// A two-community block model with Gaussian features, plus the cascade
/// hyperparameters used on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmFamily {
    pub n1: usize,
    pub n2: usize,
    pub p: f64,
    pub tau: f64,
    pub features: CommunityFeatureSpec,
    pub scale: SmoothingScale,
    /// isometry rank `k`
    pub rank: usize,
    /// Monte-Carlo draws per community for the expected cascade
    pub eigt_samples: usize,
}

impl SbmFamily {
    pub fn n(&self) -> usize {
        self.n1 + self.n2
    }

    /// Graph of trial seed `seed`; features use an independent stream.
    pub fn operator(&self, seed: u64) -> Result<SparseOperator> {
        let spec = SbmSpec::new(self.n1, self.n2, self.p, self.tau, rng::derive(seed, 0))?;
        Ok(normalize_adjacency(&sample_sbm(&spec)?))
    }

    pub fn signal(&self, seed: u64) -> Result<FeatureMatrix> {
        sample_features(&self.features, self.n1, self.n2, rng::derive(seed, 1))
    }

    /// `E‖X‖²` under the feature law.
    pub fn expected_energy(&self) -> f64 {
        let rows = [self.n1 as f64, self.n2 as f64];
        (0..2)
            .map(|c| {
                let mu2: f64 = self.features.means[c].iter().map(|m| m * m).sum();
                rows[c] * (mu2 + self.features.row_variance(c))
            })
            .sum()
    }

    /// The same family with features rescaled to `E‖X‖² = 1`.
    pub fn normalized(&self) -> Self {
        let e = self.expected_energy();
        let mut out = self.clone();
        if e > 0.0 {
            out.features = self.features.scaled(1.0 / e.sqrt());
        }
        out
    }

    pub fn meta(&self, order: usize, seed: u64) -> TrialMeta {
        TrialMeta {
            n: self.n(),
            p: self.p,
            tau: self.tau,
            order,
            scale: self.scale.0,
            seed,
        }
    }

    /// Isometries trained on a calibration draw that no trial reuses.
    pub fn calibrated_model(&self, order: usize, seed: u64) -> Result<IgtModel> {
        let cal = rng::derive(seed, 0xCA11);
        let config = IgtConfig::new(self.scale.0, order, self.rank, seed);
        train_isometries(&self.signal(cal)?, &self.operator(cal)?, &config)
    }

    pub fn expected_cascade(&self, model: &IgtModel, seed: u64) -> Result<EigtFeatures> {
        eigt_forward(model, &self.features, self.eigt_samples, rng::derive(seed, 0xE16))
    }
}

/// Averaged `E‖S X − S̄ X‖` against `2^{N+2} E‖A_J X − E X‖` for each order,
/// with features normalized to `E‖X‖² = 1`. Trial `t` uses seed `seed + t`.
pub fn check_corollary_scaling(
    family: &SbmFamily,
    orders: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<BoundReport>> {
    if trials < 10 {
        return Err(IgtError::InvalidArgument(format!("scaling check needs at least 10 trials, got {trials}")));
    }
    let fam = family.normalized();
    let (n1, n2) = (fam.n1, fam.n2);
    let mut reports = Vec::with_capacity(orders.len());
    for &order in orders {
        let model = fam.calibrated_model(order, seed)?;
        let eigt = fam.expected_cascade(&model, seed)?;
        let centers: Vec<DenseMatrix> = (0..=order).map(|m| eigt.center_block(m, n1, n2)).collect();
        let pairs = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let a = fam.operator(seed + t)?;
                let x = fam.signal(seed + t)?;
                let s = igt_forward(&model, &x, &a)?;
                let mut lhs2 = 0.0;
                for (block, c) in s.blocks.iter().zip(&centers) {
                    lhs2 += block.sub(c)?.sum_squares();
                }
                let ergodic = s.blocks[0].sub(&centers[0])?.frobenius_norm();
                Ok((lhs2.sqrt(), ergodic))
            })
            .collect::<Result<Vec<_>>>()?;
        let (lhs, se_l) = mean_se(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
        let (erg, se_e) = mean_se(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
        let factor = 2f64.powi(order as i32 + 2);
        let se = (se_l * se_l + (factor * se_e).powi(2)).sqrt();
        reports.push(BoundReport::statistical("corollary_scaling", lhs, factor * erg, se).with_meta(fam.meta(order, seed)));
    }
    Ok(reports)
}

/// Operator, feature law and community split for the exact-ergodicity
/// bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicSetup {
    pub operator: SparseOperator,
    pub features: CommunityFeatureSpec,
    pub n1: usize,
    pub eigt_samples: usize,
}

impl ErgodicSetup {
    /// Complete-graph averaging `𝟏𝟏ᵀ/n` with one feature law on every node.
    pub fn complete_graph(n: usize, mean: Vec<f64>, sigma: f64, eigt_samples: usize) -> Result<Self> {
        Ok(Self {
            operator: normalize_adjacency(&Graph::complete(n)),
            features: CommunityFeatureSpec::new(mean.clone(), mean, sigma, sigma)?,
            n1: n,
            eigt_samples,
        })
    }

    pub fn n(&self) -> usize {
        self.operator.n()
    }

    /// `σ² = E‖X‖² − ‖EX‖²`, summed over all rows.
    pub fn sigma2(&self) -> f64 {
        let n2 = self.n() - self.n1;
        self.n1 as f64 * self.features.row_variance(0) + n2 as f64 * self.features.row_variance(1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceBound {
    /// averaged `‖S X − S̄ X‖²` against `2σ²`
    pub mean: BoundReport,
    /// the same comparison per trial
    pub trials: Vec<BoundReport>,
    pub sigma2: f64,
}

/// Draws used to test the premise `E[A_J X] = E X`.
const PREMISE_DRAWS: u64 = 32;

/// Second-moment bound `E‖S X − S̄ X‖² ≤ 2σ²` under exact ergodicity.
///
/// The premise is tested first: the Monte-Carlo mean of `A_J X − E X` over
/// independent draws must lie within three standard errors of zero.
pub fn check_variance_bound(setup: &ErgodicSetup, model: &IgtModel, trials: usize, seed: u64) -> Result<VarianceBound> {
    let (n, n1) = (setup.n(), setup.n1);
    if n1 > n || setup.features.dim() != model.input_dim {
        return Err(IgtError::InvalidArgument("ergodic setup disagrees with the model".into()));
    }
    let n2 = n - n1;
    let scale = model.scale();
    let mean_x = setup.features.mean_matrix(n1, n2);

    let draws = (0..PREMISE_DRAWS)
        .into_par_iter()
        .map(|d| {
            let x = sample_features(&setup.features, n1, n2, rng::derive(seed, (1 << 40) + d))?;
            apply_smoothing(&setup.operator, &x, scale)?.sub(&mean_x)
        })
        .collect::<Result<Vec<_>>>()?;
    let count = PREMISE_DRAWS as f64;
    let mut sum = DenseMatrix::zeros(n, mean_x.cols());
    let mut sq = DenseMatrix::zeros(n, mean_x.cols());
    for d in &draws {
        sum.axpy(1.0, d)?;
        sq.axpy(1.0, &d.map(|v| v * v))?;
    }
    let avg = sum.scale(1.0 / count);
    let var_total: f64 = sq
        .values()
        .iter()
        .zip(avg.values())
        .map(|(s, m)| ((s - count * m * m) / (count - 1.0)).max(0.0))
        .sum();
    let deviation = avg.frobenius_norm();
    let standard_error = (var_total / count).sqrt();
    if deviation > SE_MULTIPLIER * standard_error + ABS_SLACK {
        return Err(IgtError::ErgodicityViolated { deviation, standard_error });
    }

    let eigt = eigt_forward(model, &setup.features, setup.eigt_samples, rng::derive(seed, 0xE16))?;
    let centers: Vec<DenseMatrix> = (0..=model.order()).map(|m| eigt.center_block(m, n1, n2)).collect();
    let center_se = (0..=model.order())
        .map(|m| eigt.error_block(m, n1, n2).sum_squares())
        .sum::<f64>()
        .sqrt();
    let sigma2 = setup.sigma2();
    let meta = |s| TrialMeta {
        n,
        order: model.order(),
        scale: scale.0,
        seed: s,
        ..Default::default()
    };
    let values = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let x = sample_features(&setup.features, n1, n2, seed + t)?;
            let s = igt_forward(model, &x, &setup.operator)?;
            let mut total = 0.0;
            for (block, c) in s.blocks.iter().zip(&centers) {
                total += block.sub(c)?.sum_squares();
            }
            Ok(total)
        })
        .collect::<Result<Vec<f64>>>()?;
    let per_trial = values
        .iter()
        .enumerate()
        .map(|(t, &v)| {
            // first-order effect of the center error on ‖·‖²
            let se = 2.0 * v.sqrt() * center_se;
            BoundReport::statistical("ergodic_variance_trial", v, 2.0 * sigma2, se).with_meta(meta(seed + t as u64))
        })
        .collect();
    let (mean, se) = mean_se(&values);
    let center_effect = 2.0 * mean.max(0.0).sqrt() * center_se;
    let mean_report = BoundReport::statistical(
        "ergodic_variance",
        mean,
        2.0 * sigma2,
        (se * se + center_effect * center_effect).sqrt(),
    )
    .with_meta(meta(seed));
    Ok(VarianceBound {
        mean: mean_report,
        trials: per_trial,
        sigma2,
    })
}
