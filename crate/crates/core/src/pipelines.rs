//! The compared methods (GEE, GNN, GG, GG-C) and the train/val/test split.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use ndarray::{concatenate, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{lda_fit, lda_predict, DEFAULT_SHRINKAGE};
use crate::error::{Error, Result};
use crate::gcn::{overlay, train_supervised, train_unsupervised, xavier_init, TrainConfig};
use crate::gee::{supervised_gee, unsupervised_gee_with, DEFAULT_MAX_ITER};
use crate::graph::{Graph, LabelVector};
use crate::metrics::{accuracy, ari};
use crate::rng::{stage_rng, Stage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "gee")]
    Gee,
    #[serde(rename = "gnn")]
    Gnn,
    #[serde(rename = "gg")]
    Gg,
    #[serde(rename = "gg-c")]
    GgC,
}

impl Method {
    pub const CLUSTERING: [Method; 3] = [Method::Gee, Method::Gnn, Method::Gg];
    pub const CLASSIFICATION: [Method; 4] = [Method::Gee, Method::Gnn, Method::Gg, Method::GgC];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gee => "gee",
            Method::Gnn => "gnn",
            Method::Gg => "gg",
            Method::GgC => "gg-c",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gee" => Ok(Method::Gee),
            "gnn" => Ok(Method::Gnn),
            "gg" => Ok(Method::Gg),
            "gg-c" | "ggc" | "gg_c" => Ok(Method::GgC),
            other => Err(Error::Config(format!("unknown method {other:?}"))),
        }
    }
}

/// Share of nodes placed in the combined train/val pool, in percent.
/// 5/10/20/50 correspond to test:pool ratios of 19:1, 9:1, 4:1 and 1:1.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SplitRatio(pub f64);

impl SplitRatio {
    pub const STANDARD: [SplitRatio; 4] = [SplitRatio(5.0), SplitRatio(10.0), SplitRatio(20.0), SplitRatio(50.0)];

    pub fn percent(self) -> f64 {
        self.0
    }

    /// `"5%"`, `"50%"`, …
    pub fn tag(self) -> String {
        format!("{}%", self.0)
    }
}

/// Disjoint train/val/test node sets covering every node, each sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMasks {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitMasks {
    pub fn pool_size(&self) -> usize {
        self.train.len() + self.val.len()
    }
}

/// Sizes of the pool and its validation share for `n` nodes and `k` classes.
///
/// The per-class minimum of two train and one val node takes precedence over
/// both the pool fraction and the 90/10 split.
pub fn split_sizes(n: usize, k: usize, ratio: SplitRatio) -> (usize, usize) {
    let pool = ((n as f64 * ratio.percent() / 100.0).round() as usize).max(3 * k).min(n);
    let val = ((pool as f64 / 10.0).round() as usize).max(k);
    (pool, val)
}

/// Stratified split: two train and one val node per class first, then the
/// rest of the pool is filled uniformly at random. Everything else is test.
pub fn split_nodes<R: Rng + ?Sized>(y: &LabelVector, ratio: SplitRatio, rng: &mut R) -> Result<SplitMasks> {
    if !(ratio.percent() > 0.0 && ratio.percent() <= 100.0) {
        return Err(Error::Config(format!("split ratio {}% outside (0, 100]", ratio.percent())));
    }
    let n = y.len();
    let k = y.k();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for i in 0..n {
        let c = y.get(i).ok_or(Error::MaskedLabel { node: i })?;
        members[c].push(i);
    }
    if let Some((class, m)) = members.iter().enumerate().find(|(_, m)| m.len() < 3) {
        return Err(Error::InfeasibleSplit { class, size: m.len() });
    }
    let (pool, val_size) = split_sizes(n, k, ratio);
    let train_size = pool - val_size;

    let mut train = Vec::with_capacity(train_size);
    let mut val = Vec::with_capacity(val_size);
    let mut rest = Vec::with_capacity(n);
    for m in &mut members {
        m.shuffle(rng);
        train.extend_from_slice(&m[..2]);
        val.push(m[2]);
        rest.extend_from_slice(&m[3..]);
    }
    rest.sort_unstable();
    rest.shuffle(rng);
    let extra_val = val_size - val.len();
    let extra_train = train_size - train.len();
    val.extend_from_slice(&rest[..extra_val]);
    train.extend_from_slice(&rest[extra_val..extra_val + extra_train]);
    let mut test = rest[extra_val + extra_train..].to_vec();
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok(SplitMasks { train, val, test })
}

/// Settings for every method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodConfig {
    #[serde(deserialize_with = "clustering_overlay")]
    pub clustering: TrainConfig,
    #[serde(deserialize_with = "classification_overlay")]
    pub classification: TrainConfig,
    /// Iteration cap for unsupervised GEE.
    pub gee_max_iter: usize,
    /// Scale GEE rows to unit norm before k-means and LDA. The network
    /// always receives the raw embedding.
    pub gee_row_normalize: bool,
    pub lda_shrinkage: f64,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            clustering: TrainConfig::clustering(),
            classification: TrainConfig::classification(),
            gee_max_iter: DEFAULT_MAX_ITER,
            gee_row_normalize: true,
            lda_shrinkage: DEFAULT_SHRINKAGE,
        }
    }
}

fn clustering_overlay<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<TrainConfig, D::Error> {
    overlay(d, TrainConfig::clustering())
}

fn classification_overlay<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<TrainConfig, D::Error> {
    overlay(d, TrainConfig::classification())
}

type RunParts = (LabelVector, Option<usize>, Option<Array2<f64>>, Array2<f64>);

#[derive(Clone, Debug)]
pub struct MethodResult {
    pub method: Method,
    pub predictions: LabelVector,
    /// ARI (clustering, when ground truth is given) or test accuracy.
    pub metric: Option<f64>,
    pub wall_time: f64,
    pub seed: u64,
    pub epochs_run: Option<usize>,
    /// Features fed to the network (GNN, GG, GG-C).
    pub input_features: Option<Array2<f64>>,
    /// The representation the predictions were read from.
    pub embedding: Array2<f64>,
}

/// Node clustering with GEE, GNN or GG. `seed` keys every random stage, so
/// GG's GEE step is exactly the GEE method's run under the same seed.
pub fn cluster(
    method: Method,
    g: &Graph,
    k: usize,
    truth: Option<&LabelVector>,
    cfg: &MethodConfig,
    seed: u64,
) -> Result<MethodResult> {
    let start = Instant::now();
    if g.m() == 0 {
        return Err(Error::DegenerateGraph("clustering").in_method(method.name()));
    }
    if k < 2 {
        return Err(Error::Config("clustering needs K >= 2".into()));
    }
    let run = || -> Result<RunParts> {
        match method {
            Method::Gee => {
                let out = unsupervised_gee_with(g, k, cfg.gee_max_iter, cfg.gee_row_normalize, &mut stage_rng(seed, Stage::Gee))?;
                Ok((out.labels, None, None, out.embedding.into_inner()))
            }
            Method::Gnn | Method::Gg => {
                let z0 = if method == Method::Gnn {
                    xavier_init(g.n(), k, &mut stage_rng(seed, Stage::Features))
                } else {
                    unsupervised_gee_with(g, k, cfg.gee_max_iter, cfg.gee_row_normalize, &mut stage_rng(seed, Stage::Gee))?
                        .embedding
                        .into_inner()
                };
                let out = train_unsupervised(g, z0.view(), &cfg.clustering, &mut stage_rng(seed, Stage::Weights))?;
                Ok((out.labels, Some(out.epochs_run), Some(z0), out.zhat))
            }
            Method::GgC => Err(Error::Config("GG-C is a classification method".into())),
        }
    };
    let (predictions, epochs_run, input_features, embedding) = run().map_err(|e| e.in_method(method.name()))?;
    let metric = truth.map(|t| ari(&predictions, t)).transpose()?;
    Ok(MethodResult {
        method,
        predictions,
        metric,
        wall_time: start.elapsed().as_secs_f64(),
        seed,
        epochs_run,
        input_features,
        embedding,
    })
}

/// GEE from train labels: the raw embedding and the features the LDA head sees.
fn masked_gee(g: &Graph, train_labels: &LabelVector, cfg: &MethodConfig) -> Result<(Array2<f64>, Array2<f64>)> {
    let z = supervised_gee(g, train_labels)?;
    let head = if cfg.gee_row_normalize { z.clone().row_normalized() } else { z.clone() };
    Ok((z.into_inner(), head.into_inner()))
}

/// Node classification. Only the labels of `masks.train` feed GEE and LDA,
/// and only train plus val labels reach the network; test labels are read
/// solely to score the predictions.
pub fn classify(
    method: Method,
    g: &Graph,
    y: &LabelVector,
    masks: &SplitMasks,
    cfg: &MethodConfig,
    seed: u64,
) -> Result<MethodResult> {
    let start = Instant::now();
    if y.len() != g.n() {
        return Err(Error::LengthMismatch { left: y.len(), right: g.n() });
    }
    let k = y.k();
    let train_labels = y.keep_only(&masks.train);
    let known: Vec<usize> = masks.train.iter().chain(&masks.val).copied().collect();
    let visible = y.keep_only(&known);

    let run = || -> Result<RunParts> {
        match method {
            Method::Gee => {
                let (_, z) = masked_gee(g, &train_labels, cfg)?;
                let model = lda_fit(z.view(), &train_labels, cfg.lda_shrinkage)?;
                Ok((lda_predict(&model, z.view())?, None, None, z))
            }
            Method::Gnn => {
                let z0 = xavier_init(g.n(), k, &mut stage_rng(seed, Stage::Features));
                let out = train_supervised(
                    g,
                    z0.view(),
                    &visible,
                    &masks.train,
                    &masks.val,
                    &cfg.classification,
                    &mut stage_rng(seed, Stage::Weights),
                )?;
                Ok((out.predictions, Some(out.epochs_run), Some(z0), out.zhat))
            }
            Method::Gg | Method::GgC => {
                let (z_gee, z_head) = masked_gee(g, &train_labels, cfg)?;
                let out = train_supervised(
                    g,
                    z_gee.view(),
                    &visible,
                    &masks.train,
                    &masks.val,
                    &cfg.classification,
                    &mut stage_rng(seed, Stage::Weights),
                )?;
                if method == Method::Gg {
                    return Ok((out.predictions, Some(out.epochs_run), Some(z_gee), out.zhat));
                }
                let features = concatenate(Axis(1), &[out.zhat.view(), z_head.view()])
                    .expect("row counts agree");
                let model = lda_fit(features.view(), &train_labels, cfg.lda_shrinkage)?;
                let pred = lda_predict(&model, features.view())?;
                Ok((pred, Some(out.epochs_run), Some(z_gee), features))
            }
        }
    };
    let (predictions, epochs_run, input_features, embedding) = run().map_err(|e| e.in_method(method.name()))?;
    let metric = if masks.test.is_empty() {
        None
    } else {
        Some(accuracy(&predictions, y, &masks.test)?)
    };
    Ok(MethodResult {
        method,
        predictions,
        metric,
        wall_time: start.elapsed().as_secs_f64(),
        seed,
        epochs_run,
        input_features,
        embedding,
    })
}
