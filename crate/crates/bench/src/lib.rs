//! Fixtures for the criterion benchmarks in `benches/`.

use igt_core::graph::{normalize_adjacency, Graph};
use igt_core::sbm::{sample_features, sample_sbm, CommunityFeatureSpec, SbmSpec};
use igt_core::{FeatureMatrix, SparseOperator};

pub struct Instance {
    pub graph: Graph,
    pub operator: SparseOperator,
    pub features: FeatureMatrix,
    pub labels: Vec<usize>,
}

/// Two-community block model of `n` nodes with expected degree `degree`
/// and `dim`-dimensional Gaussian features.
pub fn sbm_instance(n: usize, degree: f64, dim: usize, seed: u64) -> Instance {
    let p = degree / n as f64;
    let spec = SbmSpec::new(n / 2, n - n / 2, p, 0.2, seed).expect("valid block model");
    let graph = sample_sbm(&spec).expect("sampled graph");
    let mut m1 = vec![0.0; dim];
    m1[0] = 1.0;
    let law = CommunityFeatureSpec::new(m1, vec![0.0; dim], 1.0, 1.5).expect("valid feature law");
    Instance {
        operator: normalize_adjacency(&graph),
        features: sample_features(&law, spec.n1, spec.n2, seed + 1).expect("sampled features"),
        labels: spec.labels(),
        graph,
    }
}
