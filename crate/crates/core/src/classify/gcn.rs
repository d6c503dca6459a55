use serde::{Deserialize, Serialize};

use crate::error::{IgtError, Result};
use crate::graph::{normalize_adjacency, Graph};
use crate::numerics::{spmm, DenseMatrix, FeatureMatrix, SparseOperator};
use crate::rng;

use super::head::{add_bias, relu, unpack};
use super::{accuracy, argmax_rows, dropout_mask, fit, gaussian, num_classes, softmax_xent, Metrics, SplitSpec, TrainSpec};

/// Two propagation layers: `logits = Â ReLU(Â X W1 + b1) W2 + b2`, with `Â`
/// the self-connected normalized adjacency. Parameters are flat:
/// `[W1, b1, W2, b2]`, weights row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GcnModel {
    pub input_dim: usize,
    pub hidden: usize,
    pub classes: usize,
    pub params: Vec<f64>,
}

impl GcnModel {
    pub fn init(input_dim: usize, hidden: usize, classes: usize, seed: u64) -> Self {
        let mut r = rng::seeded(seed);
        let mut params = gaussian(input_dim, hidden, (2.0 / input_dim.max(1) as f64).sqrt(), &mut r);
        params.extend(std::iter::repeat_n(0.0, hidden));
        params.extend(gaussian(hidden, classes, (1.0 / hidden as f64).sqrt(), &mut r));
        params.extend(std::iter::repeat_n(0.0, classes));
        Self {
            input_dim,
            hidden,
            classes,
            params,
        }
    }

    fn dims(&self) -> [(usize, usize); 2] {
        [(self.input_dim, self.hidden), (self.hidden, self.classes)]
    }

    pub fn logits(&self, a: &SparseOperator, x: &FeatureMatrix) -> Result<DenseMatrix> {
        self.check(a, x)?;
        Ok(forward(&self.dims(), &self.params, a, &spmm(a, x)?, None)?.0)
    }

    fn check(&self, a: &SparseOperator, x: &FeatureMatrix) -> Result<()> {
        if x.cols() != self.input_dim || a.n() != x.rows() {
            return Err(IgtError::DimensionMismatch {
                op: "gcn",
                left_rows: a.n(),
                left_cols: a.n(),
                right_rows: x.rows(),
                right_cols: x.cols(),
            });
        }
        Ok(())
    }
}

struct Cache {
    pre: DenseMatrix,
    propagated: DenseMatrix,
}

fn forward(
    dims: &[(usize, usize)],
    params: &[f64],
    a: &SparseOperator,
    ax: &DenseMatrix,
    mask: Option<&DenseMatrix>,
) -> Result<(DenseMatrix, Cache)> {
    let layers = unpack(dims, params);
    let mut pre = ax.matmul(&layers[0].0)?;
    add_bias(&mut pre, layers[0].1);
    let mut h = relu(&pre);
    if let Some(m) = mask {
        h.values_mut().iter_mut().zip(m.values()).for_each(|(v, k)| *v *= k);
    }
    let propagated = spmm(a, &h)?;
    let mut logits = propagated.matmul(&layers[1].0)?;
    add_bias(&mut logits, layers[1].1);
    Ok((logits, Cache { pre, propagated }))
}

fn loss_grad(
    dims: &[(usize, usize)],
    params: &[f64],
    a: &SparseOperator,
    ax: &DenseMatrix,
    labels: &[usize],
    idx: &[usize],
    mask: Option<&DenseMatrix>,
) -> Result<(f64, Vec<f64>)> {
    let (logits, cache) = forward(dims, params, a, ax, mask)?;
    let (loss, g) = softmax_xent(&logits, idx, labels)?;
    let w2 = &unpack(dims, params)[1].0;
    let dw2 = cache.propagated.t_matmul(&g)?;
    // Â is symmetric, so the adjoint of propagation is propagation
    let mut dpre = spmm(a, &g.matmul_t(w2)?)?;
    for (i, d) in dpre.values_mut().iter_mut().enumerate() {
        let keep = mask.map_or(1.0, |m| m.values()[i]);
        *d *= if cache.pre.values()[i] > 0.0 { keep } else { 0.0 };
    }
    let dw1 = ax.t_matmul(&dpre)?;
    let mut grad = Vec::with_capacity(params.len());
    grad.extend_from_slice(dw1.values());
    grad.extend(dpre.column_sums(0..dpre.rows()));
    grad.extend_from_slice(dw2.values());
    grad.extend(g.column_sums(0..g.rows()));
    Ok((loss, grad))
}

/// Mean cross-entropy over `idx` and its gradient in the layout of
/// [`GcnModel::params`]; `hidden_mask` multiplies the hidden activations.
pub fn gcn_loss_grad(
    model: &GcnModel,
    a: &SparseOperator,
    x: &FeatureMatrix,
    labels: &[usize],
    idx: &[usize],
    hidden_mask: Option<&DenseMatrix>,
) -> Result<(f64, Vec<f64>)> {
    model.check(a, x)?;
    loss_grad(&model.dims(), &model.params, a, &spmm(a, x)?, labels, idx, hidden_mask)
}

/// Trains the GCN baseline with the same optimizer, early stopping and
/// hidden-layer dropout as the MLP head.
pub fn gcn_baseline(
    g: &Graph,
    x: &FeatureMatrix,
    labels: &[usize],
    split: &SplitSpec,
    spec: &TrainSpec,
) -> Result<(GcnModel, Metrics)> {
    spec.validate()?;
    let n = x.rows();
    if g.n() != n || labels.len() != n {
        return Err(IgtError::InvalidArgument(format!(
            "graph has {} nodes, features {n} rows, labels {}",
            g.n(),
            labels.len()
        )));
    }
    split.validate(n)?;
    if split.train.is_empty() {
        return Err(IgtError::EmptyTrainSplit);
    }
    let a = normalize_adjacency(g);
    let ax = spmm(&a, x)?;
    let mut model = GcnModel::init(x.cols(), spec.hidden_width, num_classes(labels), spec.seed);
    let dims = model.dims();
    let evaluate = |p: &[f64]| -> Result<(f64, f64)> {
        if split.val.is_empty() {
            return Ok((f64::NAN, f64::NAN));
        }
        let (logits, _) = forward(&dims, p, &a, &ax, None)?;
        let (loss, _) = softmax_xent(&logits, &split.val, labels)?;
        Ok((accuracy(&argmax_rows(&logits), labels, &split.val), loss))
    };
    let trace = fit(
        &mut model.params,
        spec,
        |p, epoch| {
            let mask = (spec.dropout > 0.0)
                .then(|| dropout_mask(n, spec.hidden_width, spec.dropout, rng::derive(spec.seed, epoch as u64)));
            loss_grad(&dims, p, &a, &ax, labels, &split.train, mask.as_ref())
        },
        evaluate,
    )?;
    let (val_acc, val_loss) = evaluate(&model.params)?;
    let pred = argmax_rows(&forward(&dims, &model.params, &a, &ax, None)?.0);
    let metrics = Metrics {
        train_acc: accuracy(&pred, labels, &split.train),
        val_acc,
        val_loss,
        test_acc: accuracy(&pred, labels, &split.test),
        epochs_ran: trace.epochs_ran,
        best_epoch: trace.best_epoch,
        train_loss: trace.train_loss,
    };
    Ok((model, metrics))
}
