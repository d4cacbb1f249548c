use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::loss::{cross_entropy_loss, dmon_loss};
use super::model::{forward_from_propagated, gcn_backward, ForwardTrace, GcnModel};
use crate::error::{Error, Result};
use crate::graph::{Graph, LabelVector, NormalizedAdjacency};
use crate::metrics::accuracy;

/// Optimisation settings shared by both training loops.
///
/// `max_epochs = 0` skips weight initialisation entirely: the network is left
/// with zero weights and reduces to its skip path, `Ẑ = Z⁽⁰⁾`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Epochs without improvement before stopping.
    pub patience: usize,
    /// Minimum loss decrease that counts as an improvement (clustering).
    pub loss_tolerance: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub weight_decay: f64,
    /// Drop probability applied to each layer's input during training.
    pub dropout: f64,
}

impl TrainConfig {
    pub fn clustering() -> Self {
        Self {
            learning_rate: 1e-3,
            max_epochs: 10_000,
            patience: 500,
            loss_tolerance: 1e-6,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            weight_decay: 0.0,
            dropout: 0.0,
        }
    }

    pub fn classification() -> Self {
        Self {
            max_epochs: 2_000,
            patience: 200,
            ..Self::clustering()
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
            weight_decay: self.weight_decay,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config("dropout must be in [0, 1)".into()));
        }
        if self.loss_tolerance < 0.0 || self.weight_decay < 0.0 {
            return Err(Error::Config("loss_tolerance and weight_decay must be non-negative".into()));
        }
        Ok(())
    }
}

/// Deserialises a partial table onto `base`, so an override of one field
/// keeps the task's own defaults for the rest.
pub(crate) fn overlay<'de, D>(d: D, base: TrainConfig) -> std::result::Result<TrainConfig, D::Error>
where
    D: serde::Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Partial {
        learning_rate: Option<f64>,
        max_epochs: Option<usize>,
        patience: Option<usize>,
        loss_tolerance: Option<f64>,
        adam_beta1: Option<f64>,
        adam_beta2: Option<f64>,
        adam_epsilon: Option<f64>,
        weight_decay: Option<f64>,
        dropout: Option<f64>,
    }
    let p = Partial::deserialize(d)?;
    Ok(TrainConfig {
        learning_rate: p.learning_rate.unwrap_or(base.learning_rate),
        max_epochs: p.max_epochs.unwrap_or(base.max_epochs),
        patience: p.patience.unwrap_or(base.patience),
        loss_tolerance: p.loss_tolerance.unwrap_or(base.loss_tolerance),
        adam_beta1: p.adam_beta1.unwrap_or(base.adam_beta1),
        adam_beta2: p.adam_beta2.unwrap_or(base.adam_beta2),
        adam_epsilon: p.adam_epsilon.unwrap_or(base.adam_epsilon),
        weight_decay: p.weight_decay.unwrap_or(base.weight_decay),
        dropout: p.dropout.unwrap_or(base.dropout),
    })
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::clustering()
    }
}

/// One row of a training trace. Values refer to the parameters at the start
/// of the epoch, before that epoch's update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub val_accuracy: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct UnsupervisedOutcome {
    pub labels: LabelVector,
    /// `Ẑ` of the restored best-loss parameters.
    pub zhat: Array2<f64>,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_loss: f64,
    pub model: GcnModel,
    pub trace: Vec<EpochRecord>,
}

#[derive(Clone, Debug)]
pub struct SupervisedOutcome {
    pub predictions: LabelVector,
    /// `Ẑ` of the restored best-validation parameters.
    pub zhat: Array2<f64>,
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub model: GcnModel,
    pub trace: Vec<EpochRecord>,
}

/// Row-wise argmax, ties to the lowest column.
pub fn argmax_rows(z: ArrayView2<'_, f64>) -> Vec<usize> {
    z.outer_iter()
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn keep_mask<R: Rng + ?Sized>(dim: (usize, usize), p: f64, rng: &mut R) -> Array2<f64> {
    let scale = 1.0 / (1.0 - p);
    Array2::from_shape_simple_fn(dim, || if rng.random::<f64>() < p { 0.0 } else { scale })
}

/// Holds the graph operator, the fixed input and its propagation.
struct Network<'a> {
    s: NormalizedAdjacency<'a>,
    z0: ArrayView2<'a, f64>,
    h0: Array2<f64>,
    dropout: f64,
}

impl<'a> Network<'a> {
    fn new(g: &'a Graph, z0: ArrayView2<'a, f64>, dropout: f64) -> Result<Self> {
        let s = g.normalized_adjacency();
        let h0 = s.apply(z0)?;
        Ok(Self { s, z0, h0, dropout })
    }

    fn eval(&self, model: &GcnModel) -> Result<ForwardTrace> {
        forward_from_propagated(&self.s, self.z0, self.h0.clone(), model, None)
    }

    fn train_pass<R: Rng + ?Sized>(&self, model: &GcnModel, rng: &mut R) -> Result<ForwardTrace> {
        if self.dropout == 0.0 {
            return self.eval(model);
        }
        let input_mask = keep_mask(self.z0.dim(), self.dropout, rng);
        let h0 = self.s.apply((&self.z0 * &input_mask).view())?;
        let hidden_mask = keep_mask(self.z0.dim(), self.dropout, rng);
        forward_from_propagated(&self.s, self.z0, h0, model, Some(hidden_mask))
    }
}

fn check_input(g: &Graph, z0: ArrayView2<'_, f64>) -> Result<usize> {
    let (n, k) = z0.dim();
    if n != g.n() {
        return Err(Error::shape("GCN input", format!("{} rows", g.n()), format!("{n} rows")));
    }
    if k == 0 {
        return Err(Error::shape("GCN input", "at least one column", "0 columns"));
    }
    Ok(k)
}

fn initial_model<R: Rng + ?Sized>(k: usize, cfg: &TrainConfig, rng: &mut R) -> GcnModel {
    if cfg.max_epochs == 0 {
        GcnModel::zeros(k)
    } else {
        GcnModel::xavier(k, rng)
    }
}

/// Full-batch DMoN training from input features `z0`.
///
/// Stops after `max_epochs` or once the best loss has not dropped by
/// `loss_tolerance` for `patience` epochs, then restores the lowest-loss
/// parameters. Labels are the row argmax of `Ẑ`.
pub fn train_unsupervised<R: Rng + ?Sized>(
    g: &Graph,
    z0: ArrayView2<'_, f64>,
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<UnsupervisedOutcome> {
    cfg.validate()?;
    if g.m() == 0 {
        return Err(Error::DegenerateGraph("DMoN training"));
    }
    let k = check_input(g, z0)?;
    let net = Network::new(g, z0, cfg.dropout)?;
    let mut model = initial_model(k, cfg, rng);
    let adam = cfg.adam();
    let mut state = AdamState::new(&model);

    let mut best_model = model.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_epoch = 0;
    let mut reference = f64::INFINITY;
    let mut stale = 0;
    let mut trace = Vec::new();
    let mut epochs_run = 0;

    for epoch in 0..cfg.max_epochs {
        let fwd = net.train_pass(&model, rng)?;
        let (loss, grad) = dmon_loss(g, fwd.zhat.view())?;
        if !loss.is_finite() {
            break;
        }
        trace.push(EpochRecord {
            epoch,
            loss,
            val_accuracy: None,
        });
        if loss < best_loss {
            best_loss = loss;
            best_model = model.clone();
            best_epoch = epoch;
        }
        if loss < reference - cfg.loss_tolerance {
            reference = loss;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
        let grads = gcn_backward(&net.s, &fwd, &model, grad.view())?;
        state.step(&mut model, &grads, &adam);
        epochs_run += 1;
    }

    let final_pass = net.eval(&best_model)?;
    let labels = argmax_rows(final_pass.zhat.view());
    if trace.is_empty() {
        best_loss = dmon_loss(g, final_pass.zhat.view())?.0;
    }
    Ok(UnsupervisedOutcome {
        labels: LabelVector::from_usize(&labels, k)?,
        zhat: final_pass.zhat,
        epochs_run,
        best_epoch,
        best_loss,
        model: best_model,
        trace,
    })
}

fn check_masks(n: usize, y: &LabelVector, train: &[usize], val: &[usize]) -> Result<()> {
    if train.is_empty() {
        return Err(Error::EmptyMask("training set"));
    }
    if val.is_empty() {
        return Err(Error::EmptyMask("validation set"));
    }
    if y.len() != n {
        return Err(Error::LengthMismatch { left: y.len(), right: n });
    }
    let mut seen = vec![false; n];
    for &i in train {
        if i >= n {
            return Err(Error::NodeOutOfRange { index: i, n });
        }
        seen[i] = true;
    }
    for &i in val {
        if i >= n {
            return Err(Error::NodeOutOfRange { index: i, n });
        }
        if seen[i] {
            return Err(Error::Config(format!("node {i} is in both the training and validation sets")));
        }
    }
    for &i in train.iter().chain(val) {
        if y.is_masked(i) {
            return Err(Error::MaskedLabel { node: i });
        }
    }
    Ok(())
}

/// Full-batch cross-entropy training on `train`, keeping the parameters with
/// the best accuracy on `val` (earliest on ties). Stops after `patience`
/// epochs without a new best. Only labels of `train` and `val` nodes are read.
pub fn train_supervised<R: Rng + ?Sized>(
    g: &Graph,
    z0: ArrayView2<'_, f64>,
    y: &LabelVector,
    train: &[usize],
    val: &[usize],
    cfg: &TrainConfig,
    rng: &mut R,
) -> Result<SupervisedOutcome> {
    cfg.validate()?;
    let k = check_input(g, z0)?;
    check_masks(g.n(), y, train, val)?;
    let net = Network::new(g, z0, cfg.dropout)?;
    let mut model = initial_model(k, cfg, rng);
    let adam = cfg.adam();
    let mut state = AdamState::new(&model);
    let val_truth = y.keep_only(val);

    let val_acc = |zhat: &Array2<f64>| -> Result<f64> {
        let pred = LabelVector::from_usize(&argmax_rows(zhat.view()), k.max(y.k()))?;
        accuracy(&pred, &val_truth, val)
    };

    let mut best_model = model.clone();
    let mut best_acc = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut stale = 0;
    let mut trace = Vec::new();
    let mut epochs_run = 0;

    for epoch in 0..cfg.max_epochs {
        let fwd = net.train_pass(&model, rng)?;
        let acc = if cfg.dropout == 0.0 {
            val_acc(&fwd.zhat)?
        } else {
            val_acc(&net.eval(&model)?.zhat)?
        };
        let (loss, grad) = cross_entropy_loss(fwd.zhat.view(), y, train)?;
        trace.push(EpochRecord {
            epoch,
            loss,
            val_accuracy: Some(acc),
        });
        if acc > best_acc {
            best_acc = acc;
            best_model = model.clone();
            best_epoch = epoch;
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
        if !loss.is_finite() {
            break;
        }
        let grads = gcn_backward(&net.s, &fwd, &model, grad.view())?;
        state.step(&mut model, &grads, &adam);
        epochs_run += 1;
    }

    let final_pass = net.eval(&best_model)?;
    if trace.is_empty() {
        best_acc = val_acc(&final_pass.zhat)?;
    }
    let predictions = LabelVector::from_usize(&argmax_rows(final_pass.zhat.view()), k.max(y.k()))?;
    Ok(SupervisedOutcome {
        predictions,
        zhat: final_pass.zhat,
        epochs_run,
        best_epoch,
        best_val_accuracy: best_acc,
        model: best_model,
        trace,
    })
}

/// Writes `epoch,loss,val_accuracy` rows.
pub fn write_trace_csv(trace: &[EpochRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("epoch,loss,val_accuracy\n");
    for r in trace {
        let acc = r.val_accuracy.map(|a| a.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", r.epoch, r.loss, acc));
    }
    std::fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| Error::io(path, e))
}
