use serde::{Deserialize, Serialize};

use super::{NeuralError, Parameter, Tensor};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-3, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First and second moments for an ordered list of parameters.
#[derive(Debug, Clone)]
pub struct AdamState<S> {
    pub config: AdamConfig,
    pub step: u64,
    m: Vec<Tensor<S>>,
    v: Vec<Tensor<S>>,
}

impl<S: Scalar> AdamState<S> {
    pub fn new(config: AdamConfig, params: &[&Parameter<S>]) -> Self {
        let zeros = |p: &&Parameter<S>| Tensor::zeros(p.shape().to_vec());
        Self { config, step: 0, m: params.iter().map(zeros).collect(), v: params.iter().map(zeros).collect() }
    }
}

/// One bias-corrected Adam update over `params`, which must be passed in the
/// same order the state was created with.
pub fn adam_step<S: Scalar>(params: &mut [&mut Parameter<S>], state: &mut AdamState<S>) -> Result<(), NeuralError> {
    if params.len() != state.m.len() {
        return Err(NeuralError::Shape { op: "adam_step", left: vec![params.len()], right: vec![state.m.len()] });
    }
    state.step += 1;
    let c = state.config;
    let t = state.step as i32;
    let b1 = S::of(c.beta1);
    let b2 = S::of(c.beta2);
    let one = S::one();
    let step_size = S::of(c.lr * (1.0 - c.beta2.powi(t)).sqrt() / (1.0 - c.beta1.powi(t)));
    let eps_hat = S::of(c.eps * (1.0 - c.beta2.powi(t)).sqrt());
    for ((p, m), v) in params.iter_mut().zip(&mut state.m).zip(&mut state.v) {
        p.grad.expect_shape("adam_step", m.shape())?;
        let g = p.grad.data();
        let w = p.value.data_mut();
        for (((w, &g), m), v) in w.iter_mut().zip(g).zip(m.data_mut().iter_mut()).zip(v.data_mut().iter_mut()) {
            *m = b1 * *m + (one - b1) * g;
            *v = b2 * *v + (one - b2) * g * g;
            *w -= step_size * *m / (v.sqrt() + eps_hat);
        }
        p.value.ensure_finite("adam_step")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param(values: Vec<f64>) -> Parameter<f64> {
        Parameter::new("p", Tensor::from_vec(values).unwrap())
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = param(vec![1.0, -2.0, 0.5]);
        let before = p.value.clone();
        let mut state = AdamState::new(AdamConfig::default(), &[&p]);
        for _ in 0..5 {
            adam_step(&mut [&mut p], &mut state).unwrap();
        }
        assert!(p.value.bitwise_eq(&before));
    }

    #[test]
    fn first_step_moves_by_lr_times_sign() {
        let mut p = param(vec![0.0, 0.0, 0.0]);
        p.grad = Tensor::from_vec(vec![3.0, -0.02, 1e-3]).unwrap();
        let mut state = AdamState::new(AdamConfig::default(), &[&p]);
        adam_step(&mut [&mut p], &mut state).unwrap();
        let expected = [-1e-3, 1e-3, -1e-3];
        for (&w, e) in p.value.data().iter().zip(expected) {
            assert!((w - e).abs() < 1e-7, "{w} vs {e}");
        }
    }

    #[test]
    fn quadratic_descends() {
        let mut p = param(vec![1.0]);
        let mut state = AdamState::new(AdamConfig { lr: 0.1, ..AdamConfig::default() }, &[&p]);
        let mut prev = 1.0f64;
        for _ in 0..10 {
            let w = p.value.data()[0];
            p.grad = Tensor::from_vec(vec![2.0 * w]).unwrap();
            adam_step(&mut [&mut p], &mut state).unwrap();
            let now = p.value.data()[0].abs();
            assert!(now < prev);
            prev = now;
        }
    }
}
