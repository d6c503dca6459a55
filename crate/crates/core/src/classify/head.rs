use serde::{Deserialize, Serialize};

use crate::error::{IgtError, Result};
use crate::numerics::{DenseMatrix, FeatureMatrix};
use crate::rng;

use super::{accuracy, argmax_rows, dropout_mask, fit, gaussian, num_classes, softmax_xent, Metrics, SplitSpec, TrainSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadKind {
    Linear,
    Mlp,
}

impl HeadKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Mlp => "mlp",
        }
    }
}

/// Parameters are stored flat, layer by layer, each as a row-major
/// `fan_in × fan_out` weight followed by its bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadModel {
    pub kind: HeadKind,
    pub input_dim: usize,
    pub classes: usize,
    /// hidden width of the MLP, 0 for the linear head
    pub hidden: usize,
    pub params: Vec<f64>,
}

fn layer_dims(kind: HeadKind, input: usize, classes: usize, hidden: usize) -> Vec<(usize, usize)> {
    match kind {
        HeadKind::Linear => vec![(input, classes)],
        HeadKind::Mlp => vec![(input, hidden), (hidden, classes)],
    }
}

/// Weight matrix and bias slice of each layer.
pub(crate) fn unpack<'a>(dims: &[(usize, usize)], params: &'a [f64]) -> Vec<(DenseMatrix, &'a [f64])> {
    let mut out = Vec::with_capacity(dims.len());
    let mut at = 0;
    for &(i, o) in dims {
        let w = DenseMatrix::new(i, o, params[at..at + i * o].to_vec()).expect("finite parameters");
        at += i * o;
        out.push((w, &params[at..at + o]));
        at += o;
    }
    out
}

pub(crate) fn add_bias(m: &mut DenseMatrix, b: &[f64]) {
    for r in 0..m.rows() {
        m.row_mut(r).iter_mut().zip(b).for_each(|(v, bv)| *v += bv);
    }
}

pub(crate) fn relu(m: &DenseMatrix) -> DenseMatrix {
    m.map(|v| v.max(0.0))
}

impl HeadModel {
    pub fn zeros(kind: HeadKind, input_dim: usize, classes: usize, hidden: usize) -> Self {
        let hidden = if kind == HeadKind::Linear { 0 } else { hidden };
        let count = layer_dims(kind, input_dim, classes, hidden).iter().map(|(i, o)| i * o + o).sum();
        Self {
            kind,
            input_dim,
            classes,
            hidden,
            params: vec![0.0; count],
        }
    }

    /// Gaussian weights with fan-in scaling (`√(2/fan_in)` before a ReLU,
    /// `√(1/fan_in)` otherwise), zero biases.
    pub fn init(kind: HeadKind, input_dim: usize, classes: usize, hidden: usize, seed: u64) -> Self {
        let mut m = Self::zeros(kind, input_dim, classes, hidden);
        let dims = m.dims();
        let mut r = rng::seeded(seed);
        let mut at = 0;
        for (l, &(i, o)) in dims.iter().enumerate() {
            let gain = if l + 1 < dims.len() { 2.0 } else { 1.0 };
            let w = gaussian(i, o, (gain / i.max(1) as f64).sqrt(), &mut r);
            m.params[at..at + i * o].copy_from_slice(&w);
            at += i * o + o;
        }
        m
    }

    fn dims(&self) -> Vec<(usize, usize)> {
        layer_dims(self.kind, self.input_dim, self.classes, self.hidden)
    }

    pub fn logits(&self, x: &FeatureMatrix) -> Result<DenseMatrix> {
        if x.cols() != self.input_dim {
            return Err(IgtError::DimensionMismatch {
                op: "head logits",
                left_rows: x.rows(),
                left_cols: x.cols(),
                right_rows: self.input_dim,
                right_cols: self.classes,
            });
        }
        Ok(forward(&self.dims(), &self.params, x, None)?.0)
    }
}

/// Logits and, for the MLP, the pre-activation and (masked) hidden output.
fn forward(
    dims: &[(usize, usize)],
    params: &[f64],
    x: &DenseMatrix,
    mask: Option<&DenseMatrix>,
) -> Result<(DenseMatrix, Option<(DenseMatrix, DenseMatrix)>)> {
    let layers = unpack(dims, params);
    let (w, b) = &layers[0];
    let mut z = x.matmul(w)?;
    add_bias(&mut z, b);
    if layers.len() == 1 {
        return Ok((z, None));
    }
    let mut h = relu(&z);
    if let Some(m) = mask {
        h.values_mut().iter_mut().zip(m.values()).for_each(|(v, k)| *v *= k);
    }
    let (w2, b2) = &layers[1];
    let mut out = h.matmul(w2)?;
    add_bias(&mut out, b2);
    Ok((out, Some((z, h))))
}

fn loss_grad(
    kind: HeadKind,
    dims: &[(usize, usize)],
    params: &[f64],
    x: &DenseMatrix,
    labels: &[usize],
    l2: f64,
    mask: Option<&DenseMatrix>,
) -> Result<(f64, Vec<f64>)> {
    let rows: Vec<usize> = (0..x.rows()).collect();
    let (logits, cache) = forward(dims, params, x, mask)?;
    let (mut loss, g) = softmax_xent(&logits, &rows, labels)?;
    let layers = unpack(dims, params);
    let mut grad = Vec::with_capacity(params.len());
    match (kind, cache) {
        (HeadKind::Linear, _) => {
            let w = &layers[0].0;
            let mut dw = x.t_matmul(&g)?;
            if l2 > 0.0 {
                loss += 0.5 * l2 * w.sum_squares();
                dw.axpy(l2, w)?;
            }
            grad.extend_from_slice(dw.values());
            grad.extend(g.column_sums(0..g.rows()));
        }
        (HeadKind::Mlp, Some((z, h))) => {
            let w2 = &layers[1].0;
            let dw2 = h.t_matmul(&g)?;
            let mut dz = g.matmul_t(w2)?;
            for (i, d) in dz.values_mut().iter_mut().enumerate() {
                let keep = mask.map_or(1.0, |m| m.values()[i]);
                *d *= if z.values()[i] > 0.0 { keep } else { 0.0 };
            }
            let dw1 = x.t_matmul(&dz)?;
            grad.extend_from_slice(dw1.values());
            grad.extend(dz.column_sums(0..dz.rows()));
            grad.extend_from_slice(dw2.values());
            grad.extend(g.column_sums(0..g.rows()));
        }
        (HeadKind::Mlp, None) => unreachable!("mlp forward caches its hidden layer"),
    }
    Ok((loss, grad))
}

/// Training loss over `idx` and its gradient in the layout of
/// [`HeadModel::params`]. `hidden_mask` multiplies the MLP hidden
/// activations (dropout); `l2` applies to the linear head only.
pub fn head_loss_grad(
    model: &HeadModel,
    x: &FeatureMatrix,
    labels: &[usize],
    idx: &[usize],
    l2: f64,
    hidden_mask: Option<&DenseMatrix>,
) -> Result<(f64, Vec<f64>)> {
    let xs = x.select_rows(idx);
    let ys: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
    let l2 = if model.kind == HeadKind::Linear { l2 } else { 0.0 };
    loss_grad(model.kind, &model.dims(), &model.params, &xs, &ys, l2, hidden_mask)
}

pub fn predict(model: &HeadModel, features: &FeatureMatrix) -> Result<Vec<usize>> {
    Ok(argmax_rows(&model.logits(features)?))
}

/// Trains a head on `split.train`, early-stopping on `split.val`.
pub fn train_head(
    features: &FeatureMatrix,
    labels: &[usize],
    split: &SplitSpec,
    spec: &TrainSpec,
    kind: HeadKind,
) -> Result<(HeadModel, Metrics)> {
    spec.validate()?;
    let n = features.rows();
    if labels.len() != n {
        return Err(IgtError::InvalidArgument(format!("{} labels for {n} feature rows", labels.len())));
    }
    split.validate(n)?;
    if split.train.is_empty() {
        return Err(IgtError::EmptyTrainSplit);
    }
    let classes = num_classes(labels);
    let mut model = HeadModel::init(kind, features.cols(), classes, spec.hidden_width, spec.seed);
    let dims = model.dims();
    let l2 = if kind == HeadKind::Linear { spec.l2 } else { 0.0 };
    let xt = features.select_rows(&split.train);
    let yt: Vec<usize> = split.train.iter().map(|&i| labels[i]).collect();
    let xv = features.select_rows(&split.val);
    let yv: Vec<usize> = split.val.iter().map(|&i| labels[i]).collect();
    let val_rows: Vec<usize> = (0..split.val.len()).collect();
    let dropout = if kind == HeadKind::Mlp { spec.dropout } else { 0.0 };

    let evaluate = |p: &[f64]| -> Result<(f64, f64)> {
        if split.val.is_empty() {
            return Ok((f64::NAN, f64::NAN));
        }
        let (logits, _) = forward(&dims, p, &xv, None)?;
        let (loss, _) = softmax_xent(&logits, &val_rows, &yv)?;
        let pred = argmax_rows(&logits);
        let acc = pred.iter().zip(&yv).filter(|(a, b)| a == b).count() as f64 / yv.len() as f64;
        Ok((acc, loss))
    };
    let trace = fit(
        &mut model.params,
        spec,
        |p, epoch| {
            let mask = (dropout > 0.0)
                .then(|| dropout_mask(xt.rows(), spec.hidden_width, dropout, rng::derive(spec.seed, epoch as u64)));
            loss_grad(kind, &dims, p, &xt, &yt, l2, mask.as_ref())
        },
        evaluate,
    )?;
    let (val_acc, val_loss) = evaluate(&model.params)?;
    let pred = predict(&model, features)?;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::uniform_split;
    use rand::Rng as _;
    use rand_distr::StandardNormal;

    fn clouds(n: usize, seed: u64) -> (DenseMatrix, Vec<usize>) {
        let mut r = rng::seeded(seed);
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let x = DenseMatrix::from_fn(n, 2, |i, _| {
            let shift = if labels[i] == 0 { -3.0 } else { 3.0 };
            shift + 0.5 * r.sample::<f64, _>(StandardNormal)
        });
        (x, labels)
    }

    fn xor(n: usize, seed: u64) -> (DenseMatrix, Vec<usize>) {
        let mut r = rng::seeded(seed);
        let mut labels = Vec::with_capacity(n);
        let mut vals = Vec::with_capacity(2 * n);
        for i in 0..n {
            let (sx, sy) = ([-1.0, 1.0][i % 2], [-1.0, 1.0][(i / 2) % 2]);
            vals.push(2.0 * sx + 0.3 * r.sample::<f64, _>(StandardNormal));
            vals.push(2.0 * sy + 0.3 * r.sample::<f64, _>(StandardNormal));
            labels.push(usize::from(sx * sy > 0.0));
        }
        (DenseMatrix::new(n, 2, vals).unwrap(), labels)
    }

    #[test]
    fn separable_clouds_linear() {
        let (x, y) = clouds(400, 1);
        let split = uniform_split(400, 40, 60, 2).unwrap();
        let (model, m) = train_head(&x, &y, &split, &TrainSpec::default(), HeadKind::Linear).unwrap();
        assert!(m.test_acc >= 0.99, "{m:?}");
        let pred = predict(&model, &x).unwrap();
        assert_eq!(accuracy(&pred, &y, &split.test), m.test_acc);
    }

    #[test]
    fn xor_needs_hidden_layer() {
        let (x, y) = xor(800, 3);
        let split = uniform_split(800, 200, 200, 4).unwrap();
        let (_, lin) = train_head(&x, &y, &split, &TrainSpec::default(), HeadKind::Linear).unwrap();
        let (_, mlp) = train_head(&x, &y, &split, &TrainSpec::default(), HeadKind::Mlp).unwrap();
        // a line separates at most three of the four clusters
        assert!(lin.test_acc <= 0.8, "{}", lin.test_acc);
        assert!(mlp.test_acc >= 0.95, "{}", mlp.test_acc);
    }

    #[test]
    fn single_class_training() {
        let (x, _) = clouds(100, 5);
        let y: Vec<usize> = (0..100).map(|i| usize::from(i >= 90)).collect();
        let split = SplitSpec::predefined(100, (0..20).collect(), (20..40).collect(), (40..100).collect()).unwrap();
        let (model, m) = train_head(&x, &y, &split, &TrainSpec::default(), HeadKind::Linear).unwrap();
        assert!(predict(&model, &x).unwrap().iter().all(|&p| p == 0));
        assert!((m.test_acc - 50.0 / 60.0).abs() < 1e-12);
    }

    #[test]
    fn zero_model_predicts_class_zero() {
        let m = HeadModel::zeros(HeadKind::Linear, 3, 4, 0);
        let x = DenseMatrix::from_fn(5, 3, |r, c| (r * c) as f64);
        assert_eq!(predict(&m, &x).unwrap(), vec![0; 5]);
        assert!(predict(&m, &DenseMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn errors() {
        let (x, y) = clouds(50, 1);
        let empty = SplitSpec::predefined(50, vec![], vec![1], vec![2]).unwrap();
        assert!(matches!(
            train_head(&x, &y, &empty, &TrainSpec::default(), HeadKind::Mlp),
            Err(IgtError::EmptyTrainSplit)
        ));
    }

    #[test]
    fn early_stopping_restores_best() {
        let (x, y) = xor(200, 9);
        let split = uniform_split(200, 30, 50, 1).unwrap();
        let spec = TrainSpec { patience: 5, ..Default::default() };
        let (_, m) = train_head(&x, &y, &split, &spec, HeadKind::Mlp).unwrap();
        assert!(m.epochs_ran <= m.best_epoch + 5);
        assert!(m.best_epoch <= m.epochs_ran);
    }
}
