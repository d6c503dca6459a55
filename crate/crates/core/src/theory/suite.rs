use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::Result;
use crate::graph::{normalize_adjacency, Graph, SmoothingScale};
use crate::igt::{IgtConfig, IgtModel};
use crate::numerics::DenseMatrix;
use crate::rng;
use crate::sbm::CommunityFeatureSpec;

use super::{
    check_bounded_cascade, check_corollary_scaling, check_deviation_trend, check_energy_split, check_lipschitz_pairs,
    check_sbm_concentration, check_subgaussian_tail, check_tree_bound, check_variance_bound, sort_reports, BoundReport,
    ConcentrationGrid, ErgodicSetup, SbmFamily,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    /// trials per check; checks with a statistical minimum use at least that
    pub trials: usize,
    pub seed: u64,
    /// multiplies every energy-split operator, to exercise failure paths
    pub fault_scale: Option<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            trials: 20,
            seed: 0,
            fault_scale: None,
        }
    }
}

/// Erdős–Rényi graph with expected degree 3 on 10–59 nodes.
pub(crate) fn random_graph(seed: u64) -> Graph {
    let mut r = rng::seeded(seed);
    let n = r.random_range(10..60);
    let p = 3.0 / n as f64;
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if r.random::<f64>() < p {
                pairs.push((i, j));
            }
        }
    }
    Graph::new(n, pairs).expect("pairs in range")
}

pub(crate) fn random_model(input_dim: usize, order: usize, rank: usize, scale: u32, seed: u64) -> Result<IgtModel> {
    IgtModel::random(IgtConfig::new(scale, order, rank, seed), input_dim)
}

/// Runs every check at modest sizes and returns all reports ordered by
/// `(name, seed)`.
///
/// Energy split and Lipschitz instances use even scales `J`, for which
/// `0 ≼ A_J ≼ I` holds on every graph; at odd `J` the normalized adjacency
/// may have negative eigenvalues and neither bound is guaranteed.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<BoundReport>> {
    let trials = config.trials.max(1);
    let seed = config.seed;
    let mut reports = Vec::new();

    let energy = (0..trials * 10)
        .into_par_iter()
        .map(|t| {
            let s = rng::derive(seed, t as u64);
            let g = random_graph(s);
            let mut a = normalize_adjacency(&g);
            if let Some(f) = config.fault_scale {
                a = a.scaled(f)?;
            }
            let mut r = rng::seeded(rng::derive(s, 1));
            let scale = SmoothingScale(2 * r.random_range(1..3));
            // half of the signals are nonnegative, loading the top eigenvector
            let nonneg = t % 2 == 0;
            let x = DenseMatrix::from_fn(g.n(), 3, |_, _| {
                let z: f64 = r.sample(StandardNormal);
                if nonneg { z.abs() } else { z }
            });
            let mut rep = check_energy_split(&a, &x, scale)?;
            rep.meta.seed = s;
            Ok(rep)
        })
        .collect::<Result<Vec<_>>>()?;
    reports.extend(energy);

    let g = random_graph(rng::derive(seed, 77));
    let lip_model = random_model(3, 2, 2, 2, seed)?;
    reports.push(check_lipschitz_pairs(&lip_model, &normalize_adjacency(&g), (trials * 10).max(20), seed)?);

    let law = CommunityFeatureSpec::new(vec![0.5, -0.5], vec![-1.0, 1.0], 1.0, 2.0)?;
    reports.extend(check_bounded_cascade(&random_model(2, 4, 2, 1, seed)?, &law, 100, 100, trials.max(5), 5000, seed)?);

    let n = 1000;
    let tree_family = SbmFamily {
        n1: n / 2,
        n2: n / 2,
        p: (n as f64).ln() / n as f64,
        tau: 0.0,
        features: CommunityFeatureSpec::new(vec![0.0, 1.0], vec![1.0, 0.0], 1.0, 2.0)?,
        scale: SmoothingScale(1),
        rank: 2,
        eigt_samples: 20_000,
    };
    let tree_model = tree_family.calibrated_model(2, seed)?;
    let tree_eigt = tree_family.expected_cascade(&tree_model, seed)?;
    let tree = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = seed + t;
            let x = tree_family.signal(s)?;
            let a = tree_family.operator(s)?;
            Ok(check_tree_bound(&tree_model, &x, &a, &tree_eigt, tree_family.n1)?.with_meta(tree_family.meta(2, s)))
        })
        .collect::<Result<Vec<_>>>()?;
    reports.extend(tree);

    let corollary_family = SbmFamily {
        n1: 250,
        n2: 250,
        p: 500f64.ln() / 500.0,
        tau: 0.05,
        scale: SmoothingScale(1),
        eigt_samples: 10_000,
        ..tree_family.clone()
    };
    reports.extend(check_corollary_scaling(&corollary_family, &[0, 1, 2, 3], trials.max(10), seed)?);

    let ergodic = ErgodicSetup::complete_graph(500, vec![0.0], 1.0, 20_000)?;
    let v = check_variance_bound(&ergodic, &random_model(1, 2, 1, 1, seed)?, trials.max(2), seed)?;
    reports.push(v.mean);
    reports.extend(v.trials);

    reports.push(check_deviation_trend(&[500, 1000, 2000, 4000], trials, seed)?.report);

    let grid = ConcentrationGrid {
        ns: vec![500, 1000, 2000],
        taus: vec![0.0, 0.05],
        features: CommunityFeatureSpec::new(vec![0.0, 1.0], vec![1.0, 0.0], 1.0, 1.0)?,
        order: 2,
        rank: 2,
        eigt_samples: 10_000,
    };
    reports.extend(check_sbm_concentration(&grid, trials.max(3), seed)?.reports);

    let (_, tail) = check_subgaussian_tail(&random_model(2, 2, 2, 1, seed)?, &law, 20_000, 5000, seed)?;
    reports.extend(tail);

    sort_reports(&mut reports);
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_graph_is_deterministic() {
        assert_eq!(random_graph(4), random_graph(4));
        let g = random_graph(4);
        assert!((10..60).contains(&g.n()));
    }
}
