//! Linear SVM trained by dual coordinate descent, with Platt scaling for
//! probabilities.
//!
//! Objective: `λ/2 (‖w‖² + b²) + 1/n Σ max(0, 1 − yᵢ(w·xᵢ + b))`. The bias
//! is folded in as a constant feature, and the dual of that problem is
//! a box-constrained QP with `0 ≤ αᵢ ≤ C`, `C = 1/(λn)`, solved one
//! coordinate at a time in a fixed cyclic order.

use serde::{Deserialize, Serialize};

use super::{check_binary, ModelError};
use crate::tokens::BowVector;

/// Sparse feature vector: `(index, value)` pairs with increasing indices.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SparseVec(pub Vec<(usize, f64)>);

impl SparseVec {
    pub fn from_dense(v: &[f64]) -> Self {
        Self(v.iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(i, &x)| (i, x)).collect())
    }

    pub fn dot(&self, w: &[f64]) -> f64 {
        self.0.iter().map(|&(i, x)| x * w[i]).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.iter().map(|&(_, x)| x * x).sum()
    }

    fn max_index(&self) -> Option<usize> {
        self.0.last().map(|&(i, _)| i)
    }
}

impl From<&BowVector> for SparseVec {
    fn from(b: &BowVector) -> Self {
        Self(b.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i, f64::from(c))).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    /// Regularization strength; `None` means `1/n`.
    pub lambda: Option<f64>,
    pub epochs: usize,
    /// Stop once the largest projected-gradient magnitude in an epoch falls
    /// below this value.
    pub tol: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { lambda: None, epochs: 200, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub w: Vec<f64>,
    pub b: f64,
    /// Platt coefficients: `P(y=1|f) = 1 / (1 + exp(A f + B))`.
    pub calib: (f64, f64),
}

impl SvmModel {
    pub fn decision(&self, x: &SparseVec) -> f64 {
        x.0.iter().filter(|(i, _)| *i < self.w.len()).map(|&(i, v)| v * self.w[i]).sum::<f64>() + self.b
    }

    pub fn probability(&self, x: &SparseVec) -> f64 {
        platt_probability(self.calib, self.decision(x))
    }
}

fn platt_probability((a, b): (f64, f64), f: f64) -> f64 {
    let z = a * f + b;
    if z >= 0.0 {
        (-z).exp() / (1.0 + (-z).exp())
    } else {
        1.0 / (1.0 + z.exp())
    }
}

pub fn train_svm(x: &[SparseVec], y: &[bool], dim: usize, cfg: &SvmConfig) -> Result<SvmModel, ModelError> {
    if x.len() != y.len() {
        return Err(ModelError::LengthMismatch { inputs: x.len(), labels: y.len() });
    }
    check_binary(y)?;
    if let Some(m) = x.iter().filter_map(SparseVec::max_index).max() {
        if m >= dim {
            return Err(ModelError::Config(format!("feature index {m} exceeds dimension {dim}")));
        }
    }
    let n = x.len();
    let lambda = cfg.lambda.unwrap_or(1.0 / n as f64);
    if !(lambda > 0.0) {
        return Err(ModelError::Config("lambda must be positive".into()));
    }
    let c = 1.0 / (lambda * n as f64);
    let ys: Vec<f64> = y.iter().map(|&v| if v { 1.0 } else { -1.0 }).collect();
    // augmented squared norms (bias feature = 1)
    let q: Vec<f64> = x.iter().map(|v| v.norm_sq() + 1.0).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    for _ in 0..cfg.epochs {
        let mut max_pg: f64 = 0.0;
        for i in 0..n {
            let g = ys[i] * (x[i].dot(&w) + b) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            max_pg = max_pg.max(pg.abs());
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / q[i]).clamp(0.0, c);
                let delta = (alpha[i] - old) * ys[i];
                for &(j, v) in &x[i].0 {
                    w[j] += delta * v;
                }
                b += delta;
            }
        }
        if max_pg < cfg.tol {
            break;
        }
    }
    let decisions: Vec<f64> = x.iter().map(|v| v.dot(&w) + b).collect();
    let calib = platt_fit(&decisions, y);
    Ok(SvmModel { w, b, calib })
}

/// Fits Platt's sigmoid to decision values by Newton's method with
/// backtracking, using the smoothed targets `(N₊+1)/(N₊+2)` and
/// `1/(N₋+2)`.
pub fn platt_fit(f: &[f64], y: &[bool]) -> (f64, f64) {
    let prior1 = y.iter().filter(|&&v| v).count() as f64;
    let prior0 = y.len() as f64 - prior1;
    let hi = (prior1 + 1.0) / (prior1 + 2.0);
    let lo = 1.0 / (prior0 + 2.0);
    let t: Vec<f64> = y.iter().map(|&v| if v { hi } else { lo }).collect();
    let objective = |a: f64, b: f64| -> f64 {
        f.iter()
            .zip(&t)
            .map(|(&fi, &ti)| {
                let z = fi * a + b;
                if z >= 0.0 {
                    ti * z + (1.0 + (-z).exp()).ln()
                } else {
                    (ti - 1.0) * z + (1.0 + z.exp()).ln()
                }
            })
            .sum()
    };
    let (mut a, mut b) = (0.0, ((prior0 + 1.0) / (prior1 + 1.0)).ln());
    let mut fval = objective(a, b);
    let sigma = 1e-12;
    for _ in 0..100 {
        let (mut h11, mut h22, mut h21, mut g1, mut g2) = (sigma, sigma, 0.0, 0.0, 0.0);
        for (&fi, &ti) in f.iter().zip(&t) {
            let z = fi * a + b;
            let (p, q) = if z >= 0.0 {
                let e = (-z).exp();
                (e / (1.0 + e), 1.0 / (1.0 + e))
            } else {
                let e = z.exp();
                (1.0 / (1.0 + e), e / (1.0 + e))
            };
            let d2 = p * q;
            h11 += fi * fi * d2;
            h22 += d2;
            h21 += fi * d2;
            let d1 = ti - p;
            g1 += fi * d1;
            g2 += d1;
        }
        if g1.abs() < 1e-5 && g2.abs() < 1e-5 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0;
        let mut moved = false;
        while step >= 1e-10 {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf < fval + 1e-4 * step * gd {
                a = na;
                b = nb;
                fval = nf;
                moved = true;
                break;
            }
            step /= 2.0;
        }
        if !moved {
            break;
        }
    }
    (a, b)
}
