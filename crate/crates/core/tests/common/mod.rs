//! Fixtures shared by the integration tests.
#![allow(dead_code)]

use igt_core::graph::{normalize_adjacency, Graph, SmoothingScale};
use igt_core::igt::isometry_objective;
use igt_core::numerics::DenseMatrix;
use igt_core::rng;
use igt_core::sbm::{sample_features, sample_sbm, CommunityFeatureSpec, SbmSpec};
use igt_core::SparseOperator;
use rand::Rng as _;
use rand_distr::StandardNormal;

/// Best objective over 720 evenly spaced unit directions of the plane.
pub fn grid_optimum(a: &SparseOperator, high: &DenseMatrix, scale: SmoothingScale) -> f64 {
    (0..720)
        .map(|i| {
            let theta = i as f64 * std::f64::consts::PI / 360.0;
            let w = DenseMatrix::from_rows(&[vec![theta.cos()], vec![theta.sin()]]);
            isometry_objective(a, high, &w, scale).unwrap().0
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Two-dimensional features on a 50-node block model.
pub fn isometry_instance(seed: u64) -> (DenseMatrix, SparseOperator) {
    let spec = SbmSpec::new(25, 25, 0.2, 0.2, seed).unwrap();
    let a = normalize_adjacency(&sample_sbm(&spec).unwrap());
    let law = CommunityFeatureSpec::new(vec![0.0, 1.0], vec![1.0, -0.5], 1.0, 2.0).unwrap();
    (sample_features(&law, 25, 25, 100 + seed).unwrap(), a)
}

/// Erdős–Rényi graph with expected degree 3 on 10–59 nodes.
pub fn random_graph(seed: u64) -> Graph {
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
    Graph::new(n, pairs).unwrap()
}

pub fn gaussian(rows: usize, cols: usize, scale: f64, seed: u64) -> DenseMatrix {
    let mut r = rng::seeded(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| scale * r.sample::<f64, _>(StandardNormal))
}

/// Inverted-dropout style mask with entries 0 or 2.
pub fn random_mask(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut r = rng::seeded(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| if r.random::<f64>() < 0.5 { 0.0 } else { 2.0 })
}

pub fn random_labels(n: usize, classes: usize, seed: u64) -> Vec<usize> {
    let mut r = rng::seeded(seed);
    (0..n).map(|_| r.random_range(0..classes)).collect()
}

/// `‖g − fd‖ / max(‖g‖, ‖fd‖)` with `fd` the central difference of `f`
/// at `params` with step `h`.
pub fn gradient_error(params: &[f64], grad: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let mut p = params.to_vec();
    let mut diff2 = 0.0;
    let (mut g2, mut fd2) = (0.0, 0.0);
    for i in 0..p.len() {
        let orig = p[i];
        p[i] = orig + h;
        let up = f(&p);
        p[i] = orig - h;
        let down = f(&p);
        p[i] = orig;
        let fd = (up - down) / (2.0 * h);
        diff2 += (fd - grad[i]).powi(2);
        g2 += grad[i] * grad[i];
        fd2 += fd * fd;
    }
    diff2.sqrt() / g2.sqrt().max(fd2.sqrt()).max(1e-300)
}
