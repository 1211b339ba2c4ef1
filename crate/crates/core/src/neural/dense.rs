use super::tensor::{mat_vec_acc, outer_acc};
use super::{NeuralError, Tensor};
use crate::scalar::{sigmoid, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    None,
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply<S: Scalar>(self, z: S) -> S {
        match self {
            Activation::None => z,
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
        }
    }

    /// Derivative expressed through the activation's output.
    #[inline]
    pub fn derivative_from_output<S: Scalar>(self, y: S) -> S {
        match self {
            Activation::None => S::one(),
            Activation::Tanh => S::one() - y * y,
            Activation::Sigmoid => y * (S::one() - y),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DenseGrads<S> {
    pub dx: Tensor<S>,
    pub dw: Tensor<S>,
    pub db: Tensor<S>,
}

fn check_dense<S: Scalar>(x: &Tensor<S>, w: &Tensor<S>, b: &Tensor<S>) -> Result<(usize, usize, usize), NeuralError> {
    let (n, input) = x.dims2("dense")?;
    let (w_in, out) = w.dims2("dense")?;
    if w_in != input {
        return Err(NeuralError::Shape { op: "dense", left: x.shape().to_vec(), right: w.shape().to_vec() });
    }
    if b.shape() != [out] {
        return Err(NeuralError::Shape { op: "dense bias", left: w.shape().to_vec(), right: b.shape().to_vec() });
    }
    Ok((n, input, out))
}

/// `activation(x·W + b)` for `x[n, in]`, `W[in, out]`, `b[out]`.
pub fn dense<S: Scalar>(
    x: &Tensor<S>,
    w: &Tensor<S>,
    b: &Tensor<S>,
    activation: Activation,
) -> Result<Tensor<S>, NeuralError> {
    check_dense(x, w, b)?;
    let mut y = x.matmul(w)?;
    let out = b.len();
    for (i, v) in y.data_mut().iter_mut().enumerate() {
        *v = activation.apply(*v + b.data()[i % out]);
    }
    y.ensure_finite("dense")?;
    Ok(y)
}

/// Gradients of a [`dense`] call given its output `y` and upstream `dy`.
pub fn dense_backward<S: Scalar>(
    x: &Tensor<S>,
    w: &Tensor<S>,
    y: &Tensor<S>,
    activation: Activation,
    dy: &Tensor<S>,
) -> Result<DenseGrads<S>, NeuralError> {
    let (n, input) = x.dims2("dense_backward")?;
    let (_, out) = w.dims2("dense_backward")?;
    y.expect_shape("dense_backward", &[n, out])?;
    dy.expect_shape("dense_backward", &[n, out])?;

    let dz: Vec<S> =
        y.data().iter().zip(dy.data()).map(|(&yv, &g)| g * activation.derivative_from_output(yv)).collect();

    let mut dx = Tensor::zeros(vec![n, input]);
    let mut dw = Tensor::zeros(vec![input, out]);
    let mut db = Tensor::zeros(vec![out]);
    for i in 0..n {
        let dz_row = &dz[i * out..(i + 1) * out];
        mat_vec_acc(w.data(), dz_row, dx.row_mut(i));
        outer_acc(x.row(i), dz_row, dw.data_mut());
        for (acc, &g) in db.data_mut().iter_mut().zip(dz_row) {
            *acc += g;
        }
    }
    Ok(DenseGrads { dx, dw, db })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weights_pass_input_through() {
        let x = Tensor::<f64>::new(vec![2, 3], vec![1., -2., 3., 0.5, 0., -1.]).unwrap();
        let mut w = Tensor::zeros(vec![3, 3]);
        for i in 0..3 {
            w.data_mut()[i * 3 + i] = 1.0;
        }
        let b = Tensor::zeros(vec![3]);
        let y = dense(&x, &w, &b, Activation::None).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn zero_input_sigmoid_is_half() {
        let x = Tensor::<f64>::zeros(vec![4, 5]);
        let w = Tensor::new(vec![5, 2], (0..10).map(|v| v as f64 - 3.0).collect()).unwrap();
        let b = Tensor::zeros(vec![2]);
        let y = dense(&x, &w, &b, Activation::Sigmoid).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn shape_error_names_both_shapes() {
        let x = Tensor::<f64>::zeros(vec![2, 3]);
        let w = Tensor::zeros(vec![4, 2]);
        let b = Tensor::zeros(vec![2]);
        let err = dense(&x, &w, &b, Activation::None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("[2, 3]") && msg.contains("[4, 2]"), "{msg}");
    }
}
