use super::tensor::dot;
use super::{NeuralError, Tensor};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct AttentionOutput<S> {
    /// Weighted sum of the unmasked rows.
    pub pooled: Vec<S>,
    /// One weight per row; exactly zero on masked rows.
    pub weights: Vec<S>,
}

#[derive(Debug, Clone)]
pub struct AttentionGrads<S> {
    pub d_vecs: Tensor<S>,
    pub d_attn: Vec<S>,
}

fn check<S: Scalar>(vecs: &Tensor<S>, attn: &[S], mask: &[bool]) -> Result<usize, NeuralError> {
    let (n, d) = vecs.dims2("attention_pool")?;
    if attn.len() != d || mask.len() != n {
        return Err(NeuralError::Shape {
            op: "attention_pool",
            left: vecs.shape().to_vec(),
            right: vec![attn.len(), mask.len()],
        });
    }
    Ok(d)
}

/// Softmax attention over the rows of `vecs` where `mask[i]` is true.
///
/// Rows are visited in index order, so the reduction order is fixed.
pub fn attention_pool<S: Scalar>(
    vecs: &Tensor<S>,
    attn: &[S],
    mask: &[bool],
) -> Result<AttentionOutput<S>, NeuralError> {
    let d = check(vecs, attn, mask)?;
    let n = mask.len();
    let scores: Vec<Option<S>> = (0..n).map(|i| mask[i].then(|| dot(vecs.row(i), attn))).collect();
    let max = scores
        .iter()
        .flatten()
        .copied()
        .fold(None, |acc: Option<S>, s| Some(acc.map_or(s, |m| m.max(s))))
        .ok_or(NeuralError::AllMasked)?;
    let mut weights = vec![S::zero(); n];
    let mut total = S::zero();
    for (w, s) in weights.iter_mut().zip(&scores) {
        if let Some(s) = s {
            *w = (*s - max).exp();
            total += *w;
        }
    }
    let mut pooled = vec![S::zero(); d];
    for (i, w) in weights.iter_mut().enumerate() {
        if !mask[i] {
            continue;
        }
        *w /= total;
        for (p, &v) in pooled.iter_mut().zip(vecs.row(i)) {
            *p += *w * v;
        }
    }
    if pooled.iter().any(|v| !v.is_finite()) {
        return Err(NeuralError::NonFinite { op: "attention_pool", index: 0 });
    }
    Ok(AttentionOutput { pooled, weights })
}

/// Gradients of [`attention_pool`] given `d_pooled`.
pub fn attention_backward<S: Scalar>(
    vecs: &Tensor<S>,
    attn: &[S],
    mask: &[bool],
    out: &AttentionOutput<S>,
    d_pooled: &[S],
) -> Result<AttentionGrads<S>, NeuralError> {
    let d = check(vecs, attn, mask)?;
    if d_pooled.len() != d {
        return Err(NeuralError::Shape { op: "attention_backward", left: vec![d], right: vec![d_pooled.len()] });
    }
    let n = mask.len();
    // dL/dw_i = v_i · d_pooled
    let dw: Vec<S> = (0..n).map(|i| if mask[i] { dot(vecs.row(i), d_pooled) } else { S::zero() }).collect();
    let mean: S = out.weights.iter().zip(&dw).map(|(&w, &g)| w * g).fold(S::zero(), |a, b| a + b);

    let mut d_vecs = Tensor::zeros(vec![n, d]);
    let mut d_attn = vec![S::zero(); d];
    for i in 0..n {
        if !mask[i] {
            continue;
        }
        let w = out.weights[i];
        let ds = w * (dw[i] - mean);
        let row = vecs.row(i);
        for ((dv, &p), &a) in d_vecs.row_mut(i).iter_mut().zip(d_pooled).zip(attn) {
            *dv = w * p + ds * a;
        }
        for (da, &v) in d_attn.iter_mut().zip(row) {
            *da += ds * v;
        }
    }
    Ok(AttentionGrads { d_vecs, d_attn })
}
