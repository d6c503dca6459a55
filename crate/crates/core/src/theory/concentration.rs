use rayon::prelude::*;

use crate::error::{IgtError, Result};
use crate::graph::{normalize_adjacency, SmoothingScale};
use crate::igt::{eigt_forward, igt_forward, IgtModel};
use crate::numerics::DenseMatrix;
use crate::rng;
use crate::sbm::{operator_deviation, sample_features, sample_sbm, CommunityFeatureSpec, SbmSpec};

use super::{mean_se, BoundReport, SbmFamily, TrialMeta, ABS_SLACK, SE_MULTIPLIER};

/// Ratio allowed between measured deviations and the fitted envelope, and
/// across the rescaled operator deviations.
const BAND: f64 = 2.0;

/// Grid of block models on which `‖S_1^N X − S̄^N X‖` is recorded.
/// Intra-community probability is `ln n / n`; features are rescaled to
/// `E‖X‖² = 1` at every size.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationGrid {
    pub ns: Vec<usize>,
    pub taus: Vec<f64>,
    pub features: CommunityFeatureSpec,
    pub order: usize,
    pub rank: usize,
    pub eigt_samples: usize,
}

impl ConcentrationGrid {
    fn family(&self, n: usize, tau: f64) -> SbmFamily {
        SbmFamily {
            n1: n / 2,
            n2: n - n / 2,
            p: ((n as f64).ln() / n as f64).min(1.0),
            tau,
            features: self.features.clone(),
            scale: SmoothingScale(1),
            rank: self.rank,
            eigt_samples: self.eigt_samples,
        }
        .normalized()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationPoint {
    pub n: usize,
    pub tau: f64,
    pub p: f64,
    pub deviations: Vec<f64>,
    pub mean: f64,
    pub se: f64,
    /// mean `‖A_1 U_m − E Ū_m‖` per order
    pub per_order: Vec<f64>,
    /// `τ √n Σ_m ‖μ²_m − μ¹_m‖`
    pub separation: f64,
    /// fitted `c₁/√ln n + c₂ · separation`
    pub envelope: f64,
    /// fraction of trials above the envelope
    pub violation_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub points: Vec<ConcentrationPoint>,
    pub c1: f64,
    pub c2: f64,
    /// mean deviation against `2 ×` envelope per point, then the violation
    /// rate at the largest `n` against the smallest, per `τ`
    pub reports: Vec<BoundReport>,
}

/// Least squares `y ≈ c₁ a + c₂ b` with `c₁, c₂ ≥ 0`.
fn nonnegative_fit(a: &[f64], b: &[f64], y: &[f64]) -> (f64, f64) {
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, z)| x * z).sum::<f64>();
    let (aa, bb, ab, ay, by) = (dot(a, a), dot(b, b), dot(a, b), dot(a, y), dot(b, y));
    let det = aa * bb - ab * ab;
    if det > 1e-12 * aa * bb {
        let c1 = (ay * bb - by * ab) / det;
        let c2 = (by * aa - ay * ab) / det;
        if c1 >= 0.0 && c2 >= 0.0 {
            return (c1, c2);
        }
    }
    let residual = |c1: f64, c2: f64| y.iter().zip(a.iter().zip(b)).map(|(v, (x, z))| (v - c1 * x - c2 * z).powi(2)).sum::<f64>();
    let only_a = if aa > 0.0 { (ay / aa).max(0.0) } else { 0.0 };
    let only_b = if bb > 0.0 { (by / bb).max(0.0) } else { 0.0 };
    if residual(only_a, 0.0) <= residual(0.0, only_b) {
        (only_a, 0.0)
    } else {
        (0.0, only_b)
    }
}

/// Records the IGT–E-IGT deviation over the grid, fits the envelope
/// `c₁/√ln n + c₂ τ√n Σ_m ‖μ²_m − μ¹_m‖` and checks that every mean
/// deviation stays below twice the envelope and that the share of trials
/// above it does not grow with `n`.
pub fn check_sbm_concentration(grid: &ConcentrationGrid, trials: usize, seed: u64) -> Result<ConcentrationReport> {
    let mut ns = grid.ns.clone();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 || trials == 0 || grid.taus.is_empty() {
        return Err(IgtError::InvalidArgument(
            "concentration grid needs at least 3 sizes, one tau and one trial".into(),
        ));
    }
    let mut points = Vec::new();
    for &tau in &grid.taus {
        for &n in &ns {
            let fam = grid.family(n, tau);
            let model = fam.calibrated_model(grid.order, seed)?;
            let eigt = fam.expected_cascade(&model, seed)?;
            let centers: Vec<DenseMatrix> = (0..=grid.order).map(|m| eigt.center_block(m, fam.n1, fam.n2)).collect();
            let runs = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let s = igt_forward(&model, &fam.signal(seed + t)?, &fam.operator(seed + t)?)?;
                    s.blocks
                        .iter()
                        .zip(&centers)
                        .map(|(b, c)| b.sub(c).map(|d| d.frobenius_norm()))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let deviations: Vec<f64> = runs.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
            let per_order = (0..=grid.order)
                .map(|m| runs.iter().map(|r| r[m]).sum::<f64>() / trials as f64)
                .collect();
            let gap: f64 = (0..=grid.order)
                .map(|m| {
                    eigt.means[0][m]
                        .iter()
                        .zip(&eigt.means[1][m])
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        .sqrt()
                })
                .sum();
            let (mean, se) = mean_se(&deviations);
            points.push(ConcentrationPoint {
                n,
                tau,
                p: fam.p,
                deviations,
                mean,
                se,
                per_order,
                separation: tau * (n as f64).sqrt() * gap,
                envelope: 0.0,
                violation_rate: 0.0,
            });
        }
    }
    let xa: Vec<f64> = points.iter().map(|p| 1.0 / (p.n as f64).ln().sqrt()).collect();
    let xb: Vec<f64> = points.iter().map(|p| p.separation).collect();
    let y: Vec<f64> = points.iter().map(|p| p.mean).collect();
    let (c1, c2) = nonnegative_fit(&xa, &xb, &y);
    let mut reports = Vec::new();
    for (i, p) in points.iter_mut().enumerate() {
        p.envelope = c1 * xa[i] + c2 * xb[i];
        p.violation_rate = p.deviations.iter().filter(|&&d| d > p.envelope).count() as f64 / trials as f64;
        let meta = TrialMeta {
            n: p.n,
            p: p.p,
            tau: p.tau,
            order: grid.order,
            scale: 1,
            seed,
        };
        reports.push(BoundReport::statistical("sbm_concentration", p.mean, BAND * p.envelope, p.se).with_meta(meta));
    }
    for &tau in &grid.taus {
        let row: Vec<&ConcentrationPoint> = points.iter().filter(|p| p.tau == tau).collect();
        let (first, last) = (row[0], row[row.len() - 1]);
        let binomial = |r: f64| (r * (1.0 - r) / trials as f64).sqrt();
        let se = binomial(first.violation_rate).hypot(binomial(last.violation_rate));
        reports.push(
            BoundReport::new(
                "sbm_violation_trend",
                last.violation_rate,
                first.violation_rate,
                SE_MULTIPLIER * se + ABS_SLACK,
            )
            .with_meta(TrialMeta {
                n: last.n,
                p: last.p,
                tau,
                order: grid.order,
                scale: 1,
                seed,
            }),
        );
    }
    Ok(ConcentrationReport { points, c1, c2, reports })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationPoint {
    pub n: usize,
    pub mean: f64,
    pub se: f64,
    /// `mean · √ln n`
    pub rescaled: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationTrend {
    pub points: Vec<DeviationPoint>,
    /// largest over smallest rescaled deviation against the band factor 2
    pub report: BoundReport,
}

/// `‖A_norm − E[A]_norm‖ · √ln n` over sizes `ns`, with `p = ln n / n`
/// and `τ = 1/√n`, `trials` graphs each (trial seed `seed + t`).
pub fn check_deviation_trend(ns: &[usize], trials: usize, seed: u64) -> Result<DeviationTrend> {
    if ns.len() < 2 || trials == 0 {
        return Err(IgtError::InvalidArgument("deviation trend needs two sizes and one trial".into()));
    }
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let nf = n as f64;
        let (p, tau) = ((nf.ln() / nf).min(1.0), 1.0 / nf.sqrt());
        let devs = (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                let spec = SbmSpec::new(n / 2, n - n / 2, p, tau, seed + t)?;
                let a = normalize_adjacency(&sample_sbm(&spec)?);
                operator_deviation(&a, &spec.expected_operator()?)
            })
            .collect::<Result<Vec<f64>>>()?;
        let (mean, se) = mean_se(&devs);
        points.push(DeviationPoint {
            n,
            mean,
            se,
            rescaled: mean * nf.ln().sqrt(),
        });
    }
    let hi = points.iter().map(|p| p.rescaled).fold(f64::NEG_INFINITY, f64::max);
    let lo = points.iter().map(|p| p.rescaled).fold(f64::INFINITY, f64::min);
    let report = BoundReport::new("deviation_trend", hi / lo, BAND, ABS_SLACK).with_meta(TrialMeta {
        n: *ns.iter().max().expect("nonempty"),
        p: f64::NAN,
        tau: f64::NAN,
        seed,
        ..Default::default()
    });
    Ok(DeviationTrend { points, report })
}

/// Least-squares fit of `ln P(‖Ū_m,i − μ_m‖ > t) ≈ a − b t²` on one order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub order: usize,
    /// the coefficient of `t²`, i.e. `−b`
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

const TAIL_QUANTILES: [f64; 9] = [0.5, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995, 0.999];

/// Tail sanity of the expected recursion on Gaussian inputs: for every
/// order the empirical log-tail of centered row norms is fitted against
/// `t²` and must slope downward. No constant is asserted.
pub fn check_subgaussian_tail(
    model: &IgtModel,
    features: &CommunityFeatureSpec,
    rows: usize,
    samples: usize,
    seed: u64,
) -> Result<(Vec<TailFit>, Vec<BoundReport>)> {
    if rows < 1000 {
        return Err(IgtError::InvalidArgument(format!("tail fit needs at least 1000 rows, got {rows}")));
    }
    let eigt = eigt_forward(model, features, samples, rng::derive(seed, 0x7A11))?;
    let x = sample_features(features, rows, 0, rng::derive(seed, 1))?;
    let layers = eigt.realized_cascade(model, &x, rows)?;
    let mut fits = Vec::new();
    let mut reports = Vec::new();
    for (m, u) in layers.iter().enumerate() {
        let mu = &eigt.means[0][m];
        let mut norms: Vec<f64> = (0..rows)
            .map(|r| u.row(r).iter().zip(mu).map(|(v, c)| (v - c).powi(2)).sum::<f64>().sqrt())
            .collect();
        norms.sort_by(f64::total_cmp);
        let mut ts = Vec::new();
        let mut logs = Vec::new();
        for q in TAIL_QUANTILES {
            let t = norms[((q * rows as f64) as usize).min(rows - 1)];
            let above = norms.partition_point(|&v| v <= t);
            let frac = (rows - above) as f64 / rows as f64;
            if frac > 0.0 && t > 0.0 {
                ts.push(t * t);
                logs.push(frac.ln());
            }
        }
        let fit = if ts.len() >= 3 {
            let k = ts.len() as f64;
            let (mx, my) = (ts.iter().sum::<f64>() / k, logs.iter().sum::<f64>() / k);
            let sxy: f64 = ts.iter().zip(&logs).map(|(a, b)| (a - mx) * (b - my)).sum();
            let sxx: f64 = ts.iter().map(|a| (a - mx).powi(2)).sum();
            let syy: f64 = logs.iter().map(|b| (b - my).powi(2)).sum();
            let slope = sxy / sxx;
            TailFit {
                order: m,
                slope,
                intercept: my - slope * mx,
                r_squared: if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 },
            }
        } else {
            // degenerate (e.g. σ = 0): no tail at all
            TailFit {
                order: m,
                slope: f64::NEG_INFINITY,
                intercept: 0.0,
                r_squared: 1.0,
            }
        };
        reports.push(
            BoundReport::new("subgaussian_tail", fit.slope.max(-f64::MAX), 0.0, 0.0).with_meta(TrialMeta {
                n: rows,
                order: m,
                scale: model.scale().0,
                seed,
                ..Default::default()
            }),
        );
        fits.push(fit);
    }
    Ok((fits, reports))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::igt::IgtConfig;
    use crate::numerics::semi_orthogonal_init;

    #[test]
    fn nonnegative_fit_recovers_and_clamps() {
        let a = [1.0, 0.5, 0.25];
        let b = [0.0, 1.0, 2.0];
        let y: Vec<f64> = a.iter().zip(&b).map(|(x, z)| 2.0 * x + 0.5 * z).collect();
        let (c1, c2) = nonnegative_fit(&a, &b, &y);
        assert!((c1 - 2.0).abs() < 1e-12 && (c2 - 0.5).abs() < 1e-12);
        let y: Vec<f64> = a.iter().zip(&b).map(|(x, z)| 2.0 * x - 0.5 * z).collect();
        let (_, c2) = nonnegative_fit(&a, &b, &y);
        assert_eq!(c2, 0.0);
    }

    #[test]
    fn tail_slopes_downward() {
        let law = CommunityFeatureSpec::centered(2, 1.0, 0.0).unwrap();
        let model = IgtModel::new(
            IgtConfig::new(1, 2, 2, 0),
            2,
            vec![semi_orthogonal_init(2, 2, 1).unwrap(), semi_orthogonal_init(2, 2, 2).unwrap()],
        )
        .unwrap();
        let (fits, reports) = check_subgaussian_tail(&model, &law, 20_000, 2000, 3).unwrap();
        assert_eq!(fits.len(), 3);
        for (f, r) in fits.iter().zip(&reports) {
            assert!(r.satisfied && f.r_squared > 0.9, "{f:?}");
        }
    }

    #[test]
    fn deviation_trend_small() {
        let trend = check_deviation_trend(&[200, 400], 3, 1).unwrap();
        assert_eq!(trend.points.len(), 2);
        assert!(trend.points.iter().all(|p| p.mean > 0.0 && p.mean < 2.0));
    }

    #[test]
    fn concentration_grid_small() {
        let grid = ConcentrationGrid {
            ns: vec![200, 400, 800],
            taus: vec![0.0],
            features: CommunityFeatureSpec::centered(2, 1.0, 0.0).unwrap(),
            order: 1,
            rank: 2,
            eigt_samples: 2000,
        };
        let rep = check_sbm_concentration(&grid, 5, 2).unwrap();
        assert_eq!(rep.points.len(), 3);
        assert_eq!(rep.c2, 0.0);
        assert!(rep.reports.iter().filter(|r| r.name == "sbm_concentration").all(|r| r.satisfied));
        let mut short = grid.clone();
        short.ns.truncate(2);
        assert!(check_sbm_concentration(&short, 5, 2).is_err());
    }
}
