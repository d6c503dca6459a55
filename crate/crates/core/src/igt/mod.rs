//! The IGT engine: greedy isometry training, the forward cascade, the
//! Monte-Carlo expected cascade and feature standardization.

mod eigt;
mod forward;
mod model;
mod standardize;
mod train;

pub use eigt::{eigt_forward, EigtFeatures, MIN_SAMPLES};
pub use forward::{cascade, igt_forward, igt_forward_with, IgtFeatures};
pub use model::{IgtConfig, IgtModel, IsometryOptimizer};
pub use standardize::{standardize, standardize_matrix, ColumnStats, CONSTANT_COLUMN_EPS};
pub use train::{isometry_objective, train_isometries, train_isometries_traced, ObjectiveTrace};
