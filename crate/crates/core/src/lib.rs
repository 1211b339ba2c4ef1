//! Commit representations built from AST path contexts, and classifiers
//! that flag security-relevant commits from code changes alone.
//!
//! Numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases below fix the precision.

pub mod ast;
pub mod commit;
pub mod corpus;
pub mod eval;
pub mod mining;
pub mod models;
pub mod neural;
pub mod scalar;
pub mod tokens;
pub mod util;

pub type PathAttention = models::PathAttentionModel<f64>;
pub type PathAttention32 = models::PathAttentionModel<f32>;
pub type Lstm = models::LstmClassifier<f64>;
pub type Lstm32 = models::LstmClassifier<f32>;
pub type Tensor = neural::Tensor<f64>;
pub type Tensor32 = neural::Tensor<f32>;
