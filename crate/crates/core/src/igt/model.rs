use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{IgtError, Result};
use crate::graph::SmoothingScale;
use crate::numerics::{semi_orthogonal_init, DenseMatrix};
use crate::rng;

const FORMAT: &str = "igt-model";
const FORMAT_VERSION: u32 = 1;

/// Update rule for the isometry objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsometryOptimizer {
    /// Projected gradient ascent with unbounded step: `W ← polar(∇f(W))`,
    /// the maximizer of the linearized objective over the spectral ball.
    /// Monotone for this convex objective; `learning_rate` is unused.
    ProjectedAscent,
    /// Adam on the negated objective followed by projection.
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgtConfig {
    pub scale: SmoothingScale,
    /// number of demodulation layers `N`
    pub order: usize,
    /// output width `k` of every isometry
    pub rank: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: IsometryOptimizer,
    pub seed: u64,
}

impl IgtConfig {
    pub fn new(scale: u32, order: usize, rank: usize, seed: u64) -> Self {
        Self {
            scale: SmoothingScale(scale),
            order,
            rank,
            epochs: 50,
            learning_rate: 0.01,
            optimizer: IsometryOptimizer::ProjectedAscent,
            seed,
        }
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn with_optimizer(mut self, optimizer: IsometryOptimizer) -> Self {
        self.optimizer = optimizer;
        self
    }

    pub fn validate(&self, input_dim: usize) -> Result<()> {
        if self.order > 0 {
            if self.rank == 0 {
                return Err(IgtError::InvalidArgument("isometry rank k must be >= 1".into()));
            }
            if self.rank > input_dim {
                return Err(IgtError::InvalidArgument(format!(
                    "isometry rank k={} exceeds input feature dimension {input_dim}",
                    self.rank
                )));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(IgtError::InvalidArgument(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Trained cascade: `W_0` is `P × k`, every later `W_n` is `k × k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IgtModel {
    pub config: IgtConfig,
    pub input_dim: usize,
    pub isometries: Vec<DenseMatrix>,
}

#[derive(Serialize, Deserialize)]
struct Container {
    format: String,
    version: u32,
    model: IgtModel,
}

impl IgtModel {
    pub fn new(config: IgtConfig, input_dim: usize, isometries: Vec<DenseMatrix>) -> Result<Self> {
        let model = Self {
            config,
            input_dim,
            isometries,
        };
        model.validate()?;
        Ok(model)
    }

    /// Untrained model: random semi-orthogonal isometries, the same draws
    /// the trainer starts from.
    pub fn random(config: IgtConfig, input_dim: usize) -> Result<Self> {
        config.validate(input_dim)?;
        let mut isometries = Vec::with_capacity(config.order);
        let mut width = input_dim;
        for layer in 0..config.order {
            isometries.push(semi_orthogonal_init(width, config.rank, rng::derive(config.seed, layer as u64))?);
            width = config.rank;
        }
        Self::new(config, input_dim, isometries)
    }

    pub fn order(&self) -> usize {
        self.isometries.len()
    }

    pub fn scale(&self) -> SmoothingScale {
        self.config.scale
    }

    /// Widths of the output blocks `(P, k, …, k)`.
    pub fn block_widths(&self) -> Vec<usize> {
        std::iter::once(self.input_dim)
            .chain(self.isometries.iter().map(DenseMatrix::cols))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.isometries.len() != self.config.order {
            return Err(IgtError::ModelFormat(format!(
                "{} isometries for order {}",
                self.isometries.len(),
                self.config.order
            )));
        }
        let mut width = self.input_dim;
        for (i, w) in self.isometries.iter().enumerate() {
            if w.rows() != width || w.cols() != self.config.rank {
                return Err(IgtError::ModelFormat(format!(
                    "isometry {i} is {}x{}, expected {width}x{}",
                    w.rows(),
                    w.cols(),
                    self.config.rank
                )));
            }
            if !w.is_finite() {
                return Err(IgtError::ModelFormat(format!("isometry {i} is not finite")));
            }
            width = w.cols();
        }
        Ok(())
    }

    /// Self-describing JSON container. `f64` values are written in shortest
    /// round-trip form, so save/load is bit-exact.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&Container {
            format: FORMAT.into(),
            version: FORMAT_VERSION,
            model: self.clone(),
        })
        .expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Container =
            serde_json::from_str(text).map_err(|e| IgtError::ModelFormat(e.to_string()))?;
        if c.format != FORMAT || c.version != FORMAT_VERSION {
            return Err(IgtError::ModelFormat(format!(
                "unsupported container {} v{}",
                c.format, c.version
            )));
        }
        c.model.validate()?;
        Ok(c.model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
