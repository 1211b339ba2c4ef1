use super::Tensor;
use crate::scalar::Scalar;

/// A named trainable tensor together with its accumulated gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameter<S> {
    pub name: String,
    pub value: Tensor<S>,
    pub grad: Tensor<S>,
}

impl<S: Scalar> Parameter<S> {
    pub fn new(name: impl Into<String>, value: Tensor<S>) -> Self {
        let grad = Tensor::zeros(value.shape().to_vec());
        Self { name: name.into(), value, grad }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill_zero();
    }

    pub fn shape(&self) -> &[usize] {
        self.value.shape()
    }
}
