use std::marker::PhantomData;

use super::{EvalError, Experiment};
use crate::models::{
    train_lstm, train_path_attention, train_svm, IndexedCommit, Init, LstmClassifier, SparseVec, SvmConfig, TrainConfig,
};
use crate::scalar::Scalar;

fn pick<T: Clone>(items: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| items[i].clone()).collect()
}

/// Linear SVM over bag-of-words vectors. Training ignores the seed.
pub struct SvmExperiment {
    pub x: Vec<SparseVec>,
    pub y: Vec<bool>,
    pub dim: usize,
    pub config: SvmConfig,
}

impl Experiment for SvmExperiment {
    fn name(&self) -> &str {
        "bow-svm"
    }

    fn fit_predict(&self, train: &[usize], test: &[usize], _seed: u64) -> Result<Vec<f64>, EvalError> {
        let m = train_svm(&pick(&self.x, train), &pick(&self.y, train), self.dim, &self.config)?;
        Ok(test.iter().map(|&i| m.probability(&self.x[i])).collect())
    }
}

/// Token-sequence LSTM; the seed drives initialization and batch order.
pub struct LstmExperiment<S> {
    pub seqs: Vec<Vec<usize>>,
    pub y: Vec<bool>,
    pub vocab_size: usize,
    pub config: TrainConfig,
    pub _scalar: PhantomData<fn() -> S>,
}

impl<S> LstmExperiment<S> {
    pub fn new(seqs: Vec<Vec<usize>>, y: Vec<bool>, vocab_size: usize, config: TrainConfig) -> Self {
        Self { seqs, y, vocab_size, config, _scalar: PhantomData }
    }
}

impl<S: Scalar> Experiment for LstmExperiment<S> {
    fn name(&self) -> &str {
        "token-lstm"
    }

    fn fit_predict(&self, train: &[usize], test: &[usize], seed: u64) -> Result<Vec<f64>, EvalError> {
        let cfg = TrainConfig { seed, ..self.config.clone() };
        let (m, _): (LstmClassifier<S>, _) =
            train_lstm(&pick(&self.seqs, train), &pick(&self.y, train), self.vocab_size, &cfg)?;
        Ok(m.predict_batch(&pick(&self.seqs, test))?.into_iter().map(Scalar::f64).collect())
    }
}

/// Path-context attention network, from scratch or fine-tuned from a
/// checkpoint held in `init`.
pub struct PathAttentionExperiment<S> {
    pub name: String,
    pub corpus: Vec<IndexedCommit>,
    pub y: Vec<bool>,
    pub config: TrainConfig,
    pub init: Init<S>,
}

impl<S: Scalar> Experiment for PathAttentionExperiment<S> {
    fn name(&self) -> &str {
        &self.name
    }

    fn fit_predict(&self, train: &[usize], test: &[usize], seed: u64) -> Result<Vec<f64>, EvalError> {
        let cfg = TrainConfig { seed, ..self.config.clone() };
        let labels: Vec<usize> = train.iter().map(|&i| usize::from(self.y[i])).collect();
        let (m, _) = train_path_attention(&pick(&self.corpus, train), &labels, 2, &cfg, self.init.clone())?;
        test.iter().map(|&i| Ok(m.commit_forward(&self.corpus[i])?.probs[1].f64())).collect()
    }
}
