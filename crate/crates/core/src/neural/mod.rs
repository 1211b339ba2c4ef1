//! Deterministic tensor math with hand-written backward passes.
//!
//! Every layer exposes a forward function and a matching backward function.
//! There is no autodiff graph: models chain the backward passes explicitly,
//! which keeps each gradient individually checkable against finite
//! differences (see [`gradcheck`]).

mod adam;
mod attention;
pub mod checkpoint;
mod dense;
pub mod gradcheck;
mod loss;
mod lstm;
mod param;
mod tensor;

use thiserror::Error;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use attention::{attention_backward, attention_pool, AttentionGrads, AttentionOutput};
pub use dense::{dense, dense_backward, Activation, DenseGrads};
pub use loss::{binary_xent, binary_xent_grad, softmax, softmax_xent, BCE_EPS};
pub use lstm::{lstm_backward, lstm_cell, lstm_forward, LstmCache, LstmGrads, LstmParams};
pub use param::Parameter;
pub use tensor::{dot, mat_vec_acc, outer_acc, vec_mat_acc, Tensor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("{op}: shape mismatch between {left:?} and {right:?}")]
    Shape { op: &'static str, left: Vec<usize>, right: Vec<usize> },
    #[error("{op}: expected rank {expected}, got shape {shape:?}")]
    Rank { op: &'static str, expected: usize, shape: Vec<usize> },
    #[error("{op}: non-finite value at flat index {index}")]
    NonFinite { op: &'static str, index: usize },
    #[error("attention over a commit with every slot masked")]
    AllMasked,
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("empty sequence")]
    EmptySequence,
}
