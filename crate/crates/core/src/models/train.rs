//! Mini-batch training loop shared by the neural models.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lstm::{LstmClassifier, LstmConfig};
use super::path_attention::{IndexedCommit, PathAttentionModel, PathDims};
use super::{check_binary, ModelError, TrainConfig};
use crate::neural::{adam_step, AdamConfig, AdamState, NeuralError, Parameter};
use crate::scalar::Scalar;

pub(crate) trait Trainable<S: Scalar>: Clone + Send + Sync {
    type Input: Sync;
    type Target: Copy + Send + Sync;
    type Grads: Send;
    /// Per-batch state derived from the parameters (e.g. packed weights).
    type Shared: Sync;

    fn shared(&self) -> Self::Shared;
    fn loss(&self, shared: &Self::Shared, x: &Self::Input, y: Self::Target) -> Result<S, ModelError>;
    fn loss_and_grads(
        &self,
        shared: &Self::Shared,
        x: &Self::Input,
        y: Self::Target,
    ) -> Result<(S, Self::Grads), ModelError>;
    fn accumulate(&mut self, grads: &Self::Grads) -> Result<(), ModelError>;
    fn parameters_mut(&mut self) -> Vec<&mut Parameter<S>>;
}

/// Adds sparse embedding-row gradients into a dense parameter gradient.
pub(crate) fn add_rows<S: Scalar>(p: &mut Parameter<S>, rows: &BTreeMap<usize, Vec<S>>) {
    for (&i, row) in rows {
        for (a, &v) in p.grad.row_mut(i).iter_mut().zip(row) {
            *a += v;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// Entry 0 is the loss before the first update; entry `e` is the mean
    /// batch loss seen during epoch `e`.
    pub train_loss: Vec<f64>,
    /// Held-out loss after each epoch (entry 0 before training); empty when
    /// nothing was held out.
    pub val_loss: Vec<f64>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    pub epochs_run: usize,
}

/// Deterministic per-class hold-out: each class contributes
/// `floor(count · fraction)` examples.
pub(crate) fn holdout_split(strata: &[usize], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0f_ba1d);
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in strata.iter().enumerate() {
        by_class.entry(c).or_default().push(i);
    }
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for mut idx in by_class.into_values() {
        idx.shuffle(&mut rng);
        let k = (idx.len() as f64 * fraction).floor() as usize;
        let k = k.min(idx.len().saturating_sub(1));
        val.extend_from_slice(&idx[..k]);
        train.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

fn mean_loss<S: Scalar, M: Trainable<S>>(
    model: &M,
    xs: &[M::Input],
    ys: &[M::Target],
    idx: &[usize],
) -> Result<f64, ModelError> {
    let shared = model.shared();
    let losses: Result<Vec<S>, ModelError> = idx.par_iter().map(|&i| model.loss(&shared, &xs[i], ys[i])).collect();
    let total: f64 = losses?.iter().map(|l| l.f64()).sum();
    Ok(total / idx.len().max(1) as f64)
}

pub(crate) fn fit<S: Scalar, M: Trainable<S>>(
    model: &mut M,
    xs: &[M::Input],
    ys: &[M::Target],
    strata: &[usize],
    cfg: &TrainConfig,
) -> Result<TrainReport, ModelError> {
    cfg.validate()?;
    if xs.len() != ys.len() {
        return Err(ModelError::LengthMismatch { inputs: xs.len(), labels: ys.len() });
    }
    let (train_idx, val_idx) = holdout_split(strata, cfg.validation_fraction, cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let adam_cfg = AdamConfig { lr: cfg.learning_rate, ..AdamConfig::default() };
    let mut adam = {
        let params = model.parameters_mut();
        let refs: Vec<&Parameter<S>> = params.iter().map(|p| &**p).collect();
        AdamState::new(adam_cfg, &refs)
    };
    let mut report = TrainReport {
        train_loss: vec![mean_loss(model, xs, ys, &train_idx)?],
        val_loss: Vec::new(),
        best_epoch: 0,
        epochs_run: 0,
    };
    let mut best: Option<(f64, M)> = None;
    if !val_idx.is_empty() {
        let v = mean_loss(model, xs, ys, &val_idx)?;
        report.val_loss.push(v);
        best = Some((v, model.clone()));
    }
    let mut since_best = 0;
    let mut order = train_idx.clone();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let shared = model.shared();
            let results: Vec<Result<(S, M::Grads), ModelError>> =
                batch.par_iter().map(|&i| model.loss_and_grads(&shared, &xs[i], ys[i])).collect();
            drop(shared);
            for p in model.parameters_mut() {
                p.zero_grad();
            }
            for r in results {
                let (loss, g) = r?;
                if !loss.is_finite() {
                    return Err(NeuralError::NonFinite { op: "training loss", index: epoch }.into());
                }
                epoch_loss += loss.f64();
                model.accumulate(&g)?;
            }
            let scale = S::one() / S::of(batch.len() as f64);
            let mut params = model.parameters_mut();
            for p in params.iter_mut() {
                p.grad.data_mut().iter_mut().for_each(|g| *g *= scale);
            }
            adam_step(&mut params, &mut adam)?;
        }
        report.train_loss.push(epoch_loss / order.len().max(1) as f64);
        report.epochs_run = epoch;
        log::debug!("epoch {epoch}: train loss {:.6}", report.train_loss[epoch]);
        if let Some((best_loss, best_model)) = best.as_mut() {
            let v = mean_loss(model, xs, ys, &val_idx)?;
            report.val_loss.push(v);
            if v < *best_loss {
                *best_loss = v;
                *best_model = model.clone();
                report.best_epoch = epoch;
                since_best = 0;
            } else {
                since_best += 1;
                if cfg.patience > 0 && since_best >= cfg.patience {
                    break;
                }
            }
        } else {
            report.best_epoch = epoch;
        }
    }
    if let Some((_, m)) = best {
        *model = m;
    }
    Ok(report)
}

/// Trains the token-sequence LSTM on sequences already encoded at
/// `cfg.max_len`.
pub fn train_lstm<S: Scalar>(
    seqs: &[Vec<usize>],
    y: &[bool],
    vocab_size: usize,
    cfg: &TrainConfig,
) -> Result<(LstmClassifier<S>, TrainReport), ModelError> {
    check_binary(y)?;
    let mut model = LstmClassifier::new(LstmConfig::new(vocab_size, cfg.max_len), cfg.seed);
    let strata: Vec<usize> = y.iter().map(|&v| usize::from(v)).collect();
    let report = fit(&mut model, seqs, y, &strata, cfg)?;
    Ok((model, report))
}

/// Starting point for [`train_path_attention`].
#[derive(Debug, Clone)]
pub enum Init<S> {
    Fresh {
        terminal_vocab: usize,
        path_vocab: usize,
        dims: PathDims,
        terminal_fingerprint: String,
        path_fingerprint: String,
    },
    /// Continue from an existing model. If its head has a different class
    /// count the head is replaced; every other weight keeps training.
    Model(PathAttentionModel<S>),
}

pub fn train_path_attention<S: Scalar>(
    corpus: &[IndexedCommit],
    labels: &[usize],
    k: usize,
    cfg: &TrainConfig,
    init: Init<S>,
) -> Result<(PathAttentionModel<S>, TrainReport), ModelError> {
    if k < 2 {
        return Err(ModelError::Config("need at least 2 classes".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(NeuralError::LabelOutOfRange { label: bad, classes: k }.into());
    }
    if labels.len() < 2 {
        return Err(ModelError::TooFewExamples { needed: 2, got: labels.len() });
    }
    if labels.iter().all(|&l| l == labels[0]) {
        return Err(ModelError::DegenerateLabels);
    }
    let mut model = match init {
        Init::Fresh { terminal_vocab, path_vocab, dims, terminal_fingerprint, path_fingerprint } => {
            let mut m = PathAttentionModel::new(terminal_vocab, path_vocab, k, dims, cfg.fc_activation, cfg.seed);
            m.terminal_fingerprint = terminal_fingerprint;
            m.path_fingerprint = path_fingerprint;
            m
        }
        Init::Model(m) if m.k != k => m.swap_head(k, cfg.seed),
        Init::Model(m) => m,
    };
    let report = fit(&mut model, corpus, labels, labels, cfg)?;
    Ok((model, report))
}
