use super::{NeuralError, Tensor};
use crate::scalar::Scalar;

/// Probability clamp used by [`binary_xent`].
pub const BCE_EPS: f64 = 1e-12;

/// Max-subtracted softmax of one row.
pub fn softmax<S: Scalar>(logits: &[S]) -> Vec<S> {
    let max = logits.iter().copied().fold(S::neg_infinity(), S::max);
    let exps: Vec<S> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: S = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Mean softmax cross-entropy over `logits[n, K]`, with its gradient
/// `(softmax - onehot) / n`.
pub fn softmax_xent<S: Scalar>(logits: &Tensor<S>, labels: &[usize]) -> Result<(S, Tensor<S>), NeuralError> {
    let (n, k) = logits.dims2("softmax_xent")?;
    if labels.len() != n {
        return Err(NeuralError::Shape {
            op: "softmax_xent",
            left: logits.shape().to_vec(),
            right: vec![labels.len()],
        });
    }
    let scale = S::one() / S::of(n as f64);
    let mut loss = S::zero();
    let mut grad = Tensor::zeros(vec![n, k]);
    for (i, &label) in labels.iter().enumerate() {
        if label >= k {
            return Err(NeuralError::LabelOutOfRange { label, classes: k });
        }
        let row = logits.row(i);
        let max = row.iter().copied().fold(S::neg_infinity(), S::max);
        let log_total = row.iter().map(|&z| (z - max).exp()).sum::<S>().ln();
        loss += -(row[label] - max - log_total);
        let probs = softmax(row);
        for (j, (g, p)) in grad.row_mut(i).iter_mut().zip(probs).enumerate() {
            let target = if j == label { S::one() } else { S::zero() };
            *g = (p - target) * scale;
        }
    }
    Ok((loss * scale, grad))
}

fn clamp<S: Scalar>(p: S) -> S {
    let eps = S::of(BCE_EPS);
    p.max(eps).min(S::one() - eps)
}

/// Mean binary cross-entropy with probabilities clamped to `[ε, 1-ε]`.
pub fn binary_xent<S: Scalar>(p: &[S], y: &[bool]) -> S {
    let n = S::of(p.len().max(1) as f64);
    let total: S = p
        .iter()
        .zip(y)
        .map(|(&p, &y)| {
            let p = clamp(p);
            if y {
                -p.ln()
            } else {
                -(S::one() - p).ln()
            }
        })
        .sum();
    total / n
}

/// `d binary_xent / d p`, zero where the clamp is active.
pub fn binary_xent_grad<S: Scalar>(p: &[S], y: &[bool]) -> Vec<S> {
    let n = S::of(p.len().max(1) as f64);
    let eps = S::of(BCE_EPS);
    p.iter()
        .zip(y)
        .map(|(&p, &y)| {
            if p < eps || p > S::one() - eps {
                return S::zero();
            }
            if y {
                -S::one() / (p * n)
            } else {
                S::one() / ((S::one() - p) * n)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::sigmoid;

    #[test]
    fn uniform_logits_six_classes() {
        let logits = Tensor::<f64>::new(vec![3, 6], vec![0.7; 18]).unwrap();
        let (loss, _) = softmax_xent(&logits, &[0, 3, 5]).unwrap();
        assert!((loss - 6f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn two_classes_reduce_to_binary_xent() {
        let raw = [(0.3, -1.2, true), (2.0, 0.5, false), (-0.4, 0.4, true)];
        let logits = Tensor::<f64>::new(vec![3, 2], raw.iter().flat_map(|r| [r.0, r.1]).collect()).unwrap();
        let labels: Vec<usize> = raw.iter().map(|r| r.2 as usize).collect();
        let (loss, _) = softmax_xent(&logits, &labels).unwrap();
        let p: Vec<f64> = raw.iter().map(|r| sigmoid(r.1 - r.0)).collect();
        let y: Vec<bool> = raw.iter().map(|r| r.2).collect();
        assert!((loss - binary_xent(&p, &y)).abs() < 1e-14);
    }

    #[test]
    fn label_out_of_range() {
        let logits = Tensor::<f64>::zeros(vec![1, 2]);
        assert_eq!(softmax_xent(&logits, &[2]).unwrap_err(), NeuralError::LabelOutOfRange { label: 2, classes: 2 });
    }

    #[test]
    fn bce_half_is_ln2() {
        let l = binary_xent(&[0.5f64; 4], &[true, false, true, false]);
        assert!((l - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn bce_exact_predictions_are_near_zero() {
        let l = binary_xent(&[1.0f64, 0.0, 1.0], &[true, false, true]);
        assert!(l >= 0.0 && l < 1e-11);
    }

    #[test]
    fn bce_matches_scalar_loop() {
        let p = [0.1f64, 0.8, 0.35, 0.999, 0.02];
        let y = [false, true, true, false, true];
        let mut acc = 0.0;
        for i in 0..p.len() {
            acc += if y[i] { -(p[i]).ln() } else { -(1.0 - p[i]).ln() };
        }
        assert!((binary_xent(&p, &y) - acc / 5.0).abs() < 1e-14);
    }
}
