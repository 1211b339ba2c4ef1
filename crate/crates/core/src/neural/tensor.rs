use rand::Rng;

use super::NeuralError;
use crate::scalar::Scalar;

/// Dense row-major tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<S> {
    shape: Vec<usize>,
    data: Vec<S>,
}

impl<S: Scalar> Tensor<S> {
    pub fn new(shape: Vec<usize>, data: Vec<S>) -> Result<Self, NeuralError> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(NeuralError::Shape { op: "tensor", left: shape, right: vec![data.len()] });
        }
        let t = Self { shape, data };
        t.ensure_finite("tensor")?;
        Ok(t)
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self { shape, data: vec![S::zero(); n] }
    }

    pub fn from_vec(data: Vec<S>) -> Result<Self, NeuralError> {
        Self::new(vec![data.len()], data)
    }

    /// Uniform in `[-bound, bound]`.
    pub fn uniform<R: Rng + ?Sized>(shape: Vec<usize>, bound: f64, rng: &mut R) -> Self {
        let n: usize = shape.iter().product();
        let data = (0..n).map(|_| S::of(rng.random_range(-bound..=bound))).collect();
        Self { shape, data }
    }

    /// Fan-in scaled uniform initialisation, `±0.5/sqrt(fan_in)`.
    pub fn fan_in_uniform<R: Rng + ?Sized>(shape: Vec<usize>, fan_in: usize, rng: &mut R) -> Self {
        let bound = 0.5 / (fan_in.max(1) as f64).sqrt();
        Self::uniform(shape, bound, rng)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.shape.first().copied().unwrap_or(0)
    }

    /// Product of all trailing dimensions (1 for a vector).
    pub fn cols(&self) -> usize {
        self.shape.iter().skip(1).product()
    }

    pub fn row(&self, i: usize) -> &[S] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [S] {
        let c = self.cols();
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|v| *v = S::zero());
    }

    pub fn add_assign(&mut self, other: &Tensor<S>) -> Result<(), NeuralError> {
        self.expect_shape("add", other.shape())?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b;
        }
        Ok(())
    }

    pub fn ensure_finite(&self, op: &'static str) -> Result<(), NeuralError> {
        if let Some(pos) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(NeuralError::NonFinite { op, index: pos });
        }
        Ok(())
    }

    pub fn expect_shape(&self, op: &'static str, shape: &[usize]) -> Result<(), NeuralError> {
        if self.shape != shape {
            return Err(NeuralError::Shape { op, left: self.shape.clone(), right: shape.to_vec() });
        }
        Ok(())
    }

    /// Bit-level equality, distinguishing `0.0` from `-0.0`.
    pub fn bitwise_eq(&self, other: &Tensor<S>) -> bool {
        self.shape == other.shape
            && self.data.iter().zip(&other.data).all(|(a, b)| a.f64().to_bits() == b.f64().to_bits())
    }

    pub fn cast<T: Scalar>(&self) -> Tensor<T> {
        Tensor { shape: self.shape.clone(), data: self.data.iter().map(|v| T::of(v.f64())).collect() }
    }

    /// `self[n, k] · other[k, m]`.
    pub fn matmul(&self, other: &Tensor<S>) -> Result<Tensor<S>, NeuralError> {
        let (n, k) = self.dims2("matmul")?;
        let (k2, m) = other.dims2("matmul")?;
        if k != k2 {
            return Err(NeuralError::Shape { op: "matmul", left: self.shape.clone(), right: other.shape.clone() });
        }
        let mut out = vec![S::zero(); n * m];
        for i in 0..n {
            let a_row = &self.data[i * k..(i + 1) * k];
            let o_row = &mut out[i * m..(i + 1) * m];
            for (p, &a) in a_row.iter().enumerate() {
                if a == S::zero() {
                    continue;
                }
                let b_row = &other.data[p * m..(p + 1) * m];
                for (o, &b) in o_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Tensor { shape: vec![n, m], data: out })
    }

    pub fn dims2(&self, op: &'static str) -> Result<(usize, usize), NeuralError> {
        match self.shape.as_slice() {
            [r, c] => Ok((*r, *c)),
            _ => Err(NeuralError::Rank { op, expected: 2, shape: self.shape.clone() }),
        }
    }
}

/// `out += a · M` where `a` is a row vector and `M` is `[a.len(), out.len()]`.
#[inline]
pub fn vec_mat_acc<S: Scalar>(a: &[S], m: &[S], out: &mut [S]) {
    let cols = out.len();
    for (p, &av) in a.iter().enumerate() {
        if av == S::zero() {
            continue;
        }
        let row = &m[p * cols..(p + 1) * cols];
        for (o, &mv) in out.iter_mut().zip(row) {
            *o += av * mv;
        }
    }
}

/// `out += M · g` where `M` is `[out.len(), g.len()]` (i.e. `g · Mᵀ`).
#[inline]
pub fn mat_vec_acc<S: Scalar>(m: &[S], g: &[S], out: &mut [S]) {
    let cols = g.len();
    for (p, o) in out.iter_mut().enumerate() {
        let row = &m[p * cols..(p + 1) * cols];
        let mut acc = S::zero();
        for (&mv, &gv) in row.iter().zip(g) {
            acc += mv * gv;
        }
        *o += acc;
    }
}

/// `M += a ⊗ g` where `M` is `[a.len(), g.len()]`.
#[inline]
pub fn outer_acc<S: Scalar>(a: &[S], g: &[S], m: &mut [S]) {
    let cols = g.len();
    for (p, &av) in a.iter().enumerate() {
        if av == S::zero() {
            continue;
        }
        let row = &mut m[p * cols..(p + 1) * cols];
        for (r, &gv) in row.iter_mut().zip(g) {
            *r += av * gv;
        }
    }
}

#[inline]
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = S::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}
