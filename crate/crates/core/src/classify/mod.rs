//! Supervised heads on frozen features (linear, one-hidden-layer MLP) and
//! a two-layer GCN baseline, all trained full-batch with Adam and early
//! stopping on validation accuracy. Gradients are derived by hand.

mod gcn;
mod head;
mod split;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{IgtError, Result};
use crate::numerics::DenseMatrix;
use crate::optim::{Adam, AdamConfig};
use crate::rng;

pub use gcn::{gcn_baseline, gcn_loss_grad, GcnModel};
pub use head::{head_loss_grad, predict, train_head, HeadKind, HeadModel};
pub use split::{
    make_splits, make_splits_sized, num_classes, uniform_split, SplitMode, SplitSizes, SplitSpec, TEST_SIZE, TRAIN_PER_CLASS, VAL_SIZE,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSpec {
    pub adam: AdamConfig,
    pub max_epochs: usize,
    /// epochs without validation improvement before stopping
    pub patience: usize,
    /// drop probability on the hidden layer
    pub dropout: f64,
    /// ℓ² coefficient on linear-head weights: the loss gains `l2/2 ‖W‖²`
    pub l2: f64,
    pub hidden_width: usize,
    pub seed: u64,
}

impl Default for TrainSpec {
    fn default() -> Self {
        Self {
            adam: AdamConfig::default(),
            max_epochs: 200,
            patience: 30,
            dropout: 0.0,
            l2: 0.0,
            hidden_width: 128,
            seed: 0,
        }
    }
}

impl TrainSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(IgtError::InvalidArgument(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return Err(IgtError::InvalidArgument(format!("l2 {} must be nonnegative", self.l2)));
        }
        if self.hidden_width == 0 || self.max_epochs == 0 {
            return Err(IgtError::InvalidArgument("hidden width and epoch budget must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub train_acc: f64,
    /// `NaN` when the split has no validation nodes
    pub val_acc: f64,
    pub val_loss: f64,
    pub test_acc: f64,
    pub epochs_ran: usize,
    /// epoch whose parameters were kept (0 = initialization)
    pub best_epoch: usize,
    /// full-batch training loss before each update
    pub train_loss: Vec<f64>,
}

/// Row-wise argmax; ties go to the smaller class index.
pub fn argmax_rows(logits: &DenseMatrix) -> Vec<usize> {
    (0..logits.rows())
        .map(|r| {
            let row = logits.row(r);
            let mut best = 0;
            for (c, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Fraction of `idx` whose prediction matches the label; `NaN` if empty.
pub fn accuracy(pred: &[usize], labels: &[usize], idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return f64::NAN;
    }
    idx.iter().filter(|&&i| pred[i] == labels[i]).count() as f64 / idx.len() as f64
}

/// Mean softmax cross-entropy over `rows` of `logits` and its gradient with
/// respect to every logit (zero outside `rows`).
pub(crate) fn softmax_xent(logits: &DenseMatrix, rows: &[usize], labels: &[usize]) -> Result<(f64, DenseMatrix)> {
    let classes = logits.cols();
    let mut grad = DenseMatrix::zeros(logits.rows(), classes);
    if rows.is_empty() {
        return Ok((0.0, grad));
    }
    let scale = 1.0 / rows.len() as f64;
    let mut loss = 0.0;
    for &r in rows {
        let y = labels[r];
        if y >= classes {
            return Err(IgtError::LabelOutOfRange { label: y, classes });
        }
        let row = logits.row(r);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = row.iter().map(|v| (v - max).exp()).sum();
        let log_z = max + z.ln();
        loss += log_z - row[y];
        let g = grad.row_mut(r);
        for (c, gv) in g.iter_mut().enumerate() {
            *gv = scale * ((row[c] - log_z).exp() - if c == y { 1.0 } else { 0.0 });
        }
    }
    Ok((loss * scale, grad))
}

/// Inverted-dropout multipliers: `0` with probability `rate`, else `1/(1−rate)`.
pub(crate) fn dropout_mask(rows: usize, cols: usize, rate: f64, seed: u64) -> DenseMatrix {
    let mut r = rng::seeded(seed);
    let keep = 1.0 / (1.0 - rate);
    DenseMatrix::from_fn(rows, cols, |_, _| if r.random::<f64>() < rate { 0.0 } else { keep })
}

/// Gaussian matrix with standard deviation `std`.
pub(crate) fn gaussian(rows: usize, cols: usize, std: f64, r: &mut rng::Rng) -> Vec<f64> {
    (0..rows * cols)
        .map(|_| std * r.sample::<f64, _>(rand_distr::StandardNormal))
        .collect()
}

pub(crate) struct FitTrace {
    pub epochs_ran: usize,
    pub best_epoch: usize,
    pub train_loss: Vec<f64>,
}

/// Full-batch Adam with early stopping on validation accuracy (ties to the
/// lower validation loss); the best parameters are restored.
///
/// `loss_grad(params, epoch)` returns the training loss and gradient;
/// `evaluate(params)` returns validation `(accuracy, loss)`, `NaN` when there
/// is no validation set, in which case the last parameters are kept.
pub(crate) fn fit(
    params: &mut Vec<f64>,
    spec: &TrainSpec,
    mut loss_grad: impl FnMut(&[f64], usize) -> Result<(f64, Vec<f64>)>,
    evaluate: impl Fn(&[f64]) -> Result<(f64, f64)>,
) -> Result<FitTrace> {
    let mut adam = Adam::new(spec.adam, params.len());
    let (mut best_acc, mut best_loss) = evaluate(params)?;
    let mut best = params.clone();
    let mut best_epoch = 0;
    let mut since = 0;
    let mut train_loss = Vec::with_capacity(spec.max_epochs);
    let mut epochs_ran = 0;
    for epoch in 1..=spec.max_epochs {
        let (loss, grad) = loss_grad(params, epoch)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(IgtError::NonFinite("classifier gradient"));
        }
        train_loss.push(loss);
        adam.step(params, &grad);
        epochs_ran = epoch;
        let (acc, vloss) = evaluate(params)?;
        if acc.is_nan() {
            continue;
        }
        if best_acc.is_nan() || acc > best_acc || (acc == best_acc && vloss < best_loss) {
            best_acc = acc;
            best_loss = vloss;
            best.clone_from(params);
            best_epoch = epoch;
            since = 0;
        } else {
            since += 1;
            if since >= spec.patience {
                break;
            }
        }
    }
    if !best_acc.is_nan() {
        *params = best;
    } else {
        best_epoch = epochs_ran;
    }
    Ok(FitTrace {
        epochs_ran,
        best_epoch,
        train_loss,
    })
}
