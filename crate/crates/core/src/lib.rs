//! Interferometric graph transform (IGT): unsupervised node representations
//! built from a cascade of graph low-pass / high-pass splits, learned
//! spectral-ball-constrained linear maps and pointwise moduli.
//!
//! The crate also carries the stochastic block model used to study how the
//! representation concentrates, a harness that evaluates both sides of the
//! associated bounds on concrete instances, shallow supervised heads, and the
//! experiment drivers behind the `igt-lab` binary.

pub mod error;
pub mod graph;
pub mod igt;
pub mod numerics;
pub mod optim;
pub mod report;
pub mod rng;
pub mod sbm;
pub mod classify;
pub mod experiments;
pub mod theory;

pub use error::{IgtError, Result};
pub use graph::{apply_smoothing, high_pass, normalize_adjacency, Graph, SmoothingScale};
pub use numerics::{DenseMatrix, FeatureMatrix, SparseOperator};
