//! The three classifier families: a linear SVM over bag-of-words vectors, an
//! LSTM over token sequences, and the path-context attention network.

mod lstm;
mod path_attention;
mod svm;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::neural::checkpoint::CheckpointError;
use crate::neural::{Activation, NeuralError};

pub use lstm::{load_lstm, LstmClassifier, LstmConfig};
pub use path_attention::{
    index_commit, load_path_attention, ForwardOutput, IndexedCommit, ModelManifest, PathAttentionModel, PathDims,
};
pub use svm::{platt_fit, train_svm, SparseVec, SvmConfig, SvmModel};
pub use train::{train_lstm, train_path_attention, Init, TrainReport};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training labels contain a single class")]
    DegenerateLabels,
    #[error("need at least {needed} examples, got {got}")]
    TooFewExamples { needed: usize, got: usize },
    #[error("{what} vocabulary does not match the checkpoint (expected {expected}, found {found})")]
    VocabMismatch { what: &'static str, expected: String, found: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("inputs and labels differ in length ({inputs} vs {labels})")]
    LengthMismatch { inputs: usize, labels: usize },
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Epochs without held-out improvement before stopping; 0 disables.
    pub patience: usize,
    /// Share of the training examples held out for model selection.
    pub validation_fraction: f64,
    pub max_contexts: usize,
    pub terminal_vocab_cap: usize,
    pub path_vocab_cap: usize,
    pub token_vocab_cap: usize,
    pub max_len: usize,
    pub fc_activation: Activation,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 32,
            learning_rate: 1e-3,
            seed: 0,
            patience: 5,
            validation_fraction: 0.1,
            max_contexts: 500,
            terminal_vocab_cap: 100_000,
            path_vocab_cap: 500_000,
            token_vocab_cap: 20_000,
            max_len: 500,
            fc_activation: Activation::Tanh,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("epochs", self.epochs),
            ("batch_size", self.batch_size),
            ("max_contexts", self.max_contexts),
            ("terminal_vocab_cap", self.terminal_vocab_cap),
            ("path_vocab_cap", self.path_vocab_cap),
            ("token_vocab_cap", self.token_vocab_cap),
            ("max_len", self.max_len),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(ModelError::Config(format!("{name} must be positive")));
            }
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(ModelError::Config("learning_rate must be finite and non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return Err(ModelError::Config("validation_fraction must be in [0, 1)".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_binary(y: &[bool]) -> Result<(), ModelError> {
    if y.len() < 2 {
        return Err(ModelError::TooFewExamples { needed: 2, got: y.len() });
    }
    if y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(ModelError::DegenerateLabels);
    }
    Ok(())
}
