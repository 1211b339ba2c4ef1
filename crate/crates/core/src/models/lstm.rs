use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::train::{add_rows, Trainable};
use super::ModelError;
use crate::neural::checkpoint::{read_checkpoint, write_checkpoint};
use crate::neural::{binary_xent, dot, lstm_backward, lstm_forward, LstmParams, NeuralError, Parameter, Tensor};
use crate::scalar::{sigmoid, Dtype, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LstmConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub hidden: usize,
    pub max_len: usize,
}

impl LstmConfig {
    pub fn new(vocab_size: usize, max_len: usize) -> Self {
        Self { vocab_size, embed_dim: 32, hidden: 100, max_len }
    }
}

/// Embedding → LSTM over the full sequence → flatten → dense(1, sigmoid).
#[derive(Debug, Clone, PartialEq)]
pub struct LstmClassifier<S> {
    pub config: LstmConfig,
    pub embed: Parameter<S>,
    pub w_x: Parameter<S>,
    pub w_h: Parameter<S>,
    pub b: Parameter<S>,
    pub out_w: Parameter<S>,
    pub out_b: Parameter<S>,
}

pub struct LstmGradients<S> {
    embed: BTreeMap<usize, Vec<S>>,
    w_x: Tensor<S>,
    w_h: Tensor<S>,
    b: Tensor<S>,
    out_w: Vec<S>,
    out_b: S,
}

impl<S: Scalar> LstmClassifier<S> {
    pub fn new(config: LstmConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let LstmConfig { vocab_size, embed_dim, hidden, max_len } = config;
        let lstm = LstmParams::init(embed_dim, hidden, &mut rng);
        let flat = max_len * hidden;
        Self {
            config,
            embed: Parameter::new(
                "lstm/embed",
                Tensor::fan_in_uniform(vec![vocab_size, embed_dim], embed_dim, &mut rng),
            ),
            w_x: Parameter::new("lstm/w_x", lstm.w_x),
            w_h: Parameter::new("lstm/w_h", lstm.w_h),
            b: Parameter::new("lstm/b", lstm.b),
            out_w: Parameter::new("lstm/out_w", Tensor::fan_in_uniform(vec![flat, 1], flat, &mut rng)),
            out_b: Parameter::new("lstm/out_b", Tensor::zeros(vec![1])),
        }
    }

    fn lstm_params(&self) -> LstmParams<S> {
        LstmParams { w_x: self.w_x.value.clone(), w_h: self.w_h.value.clone(), b: self.b.value.clone() }
    }

    fn embed_seq(&self, seq: &[usize]) -> Result<Tensor<S>, ModelError> {
        let c = self.config;
        if seq.len() != c.max_len {
            return Err(NeuralError::Shape { op: "lstm input", left: vec![seq.len()], right: vec![c.max_len] }.into());
        }
        let mut data = Vec::with_capacity(seq.len() * c.embed_dim);
        for &t in seq {
            if t >= c.vocab_size {
                return Err(ModelError::Config(format!("token index {t} outside vocabulary of {}", c.vocab_size)));
            }
            data.extend_from_slice(self.embed.value.row(t));
        }
        Ok(Tensor::new(vec![seq.len(), c.embed_dim], data)?)
    }

    fn forward_with(
        &self,
        params: &LstmParams<S>,
        seq: &[usize],
    ) -> Result<(S, Tensor<S>, crate::neural::LstmCache<S>), ModelError> {
        let emb = self.embed_seq(seq)?;
        let (hs, cache) = lstm_forward(&emb, params)?;
        let logit = dot(hs.data(), self.out_w.value.data()) + self.out_b.value.data()[0];
        Ok((sigmoid(logit), hs, cache))
    }

    /// Probability of the positive class for one encoded sequence.
    pub fn predict(&self, seq: &[usize]) -> Result<S, ModelError> {
        Ok(self.forward_with(&self.lstm_params(), seq)?.0)
    }

    pub fn predict_batch(&self, seqs: &[Vec<usize>]) -> Result<Vec<S>, ModelError> {
        let params = self.lstm_params();
        seqs.iter().map(|s| Ok(self.forward_with(&params, s)?.0)).collect()
    }

    pub fn parameters(&self) -> [&Parameter<S>; 6] {
        [&self.embed, &self.w_x, &self.w_h, &self.b, &self.out_w, &self.out_b]
    }

    pub fn save<W: Write>(&self, out: W, dtype: Dtype) -> Result<(), ModelError> {
        let meta = serde_json::json!({ "model": "lstm", "config": self.config });
        write_checkpoint(out, &self.parameters(), dtype, meta)?;
        Ok(())
    }
}

#[derive(Deserialize)]
struct Meta {
    model: String,
    config: LstmConfig,
}

pub fn load_lstm<S: Scalar, R: BufRead>(input: R) -> Result<LstmClassifier<S>, ModelError> {
    let ckpt = read_checkpoint(input)?;
    let meta: Meta = serde_json::from_value(ckpt.meta().clone())
        .map_err(|e| ModelError::Config(format!("checkpoint metadata: {e}")))?;
    if meta.model != "lstm" {
        return Err(ModelError::Config(format!("checkpoint holds a {:?} model", meta.model)));
    }
    let c = meta.config;
    let shapes: [(&str, Vec<usize>); 6] = [
        ("lstm/embed", vec![c.vocab_size, c.embed_dim]),
        ("lstm/w_x", vec![c.embed_dim, 4 * c.hidden]),
        ("lstm/w_h", vec![c.hidden, 4 * c.hidden]),
        ("lstm/b", vec![4 * c.hidden]),
        ("lstm/out_w", vec![c.max_len * c.hidden, 1]),
        ("lstm/out_b", vec![1]),
    ];
    let mut params = Vec::with_capacity(6);
    for (name, shape) in shapes {
        let t = ckpt.tensor::<S>(name)?;
        t.expect_shape("checkpoint", &shape)?;
        params.push(Parameter::new(name, t));
    }
    let mut it = params.into_iter();
    let mut next = || it.next().expect("six tensors");
    Ok(LstmClassifier { config: c, embed: next(), w_x: next(), w_h: next(), b: next(), out_w: next(), out_b: next() })
}

pub struct LstmShared<S>(LstmParams<S>);

impl<S: Scalar> Trainable<S> for LstmClassifier<S> {
    type Input = Vec<usize>;
    type Target = bool;
    type Grads = LstmGradients<S>;
    type Shared = LstmShared<S>;

    fn shared(&self) -> Self::Shared {
        LstmShared(self.lstm_params())
    }

    fn loss(&self, shared: &Self::Shared, x: &Vec<usize>, y: bool) -> Result<S, ModelError> {
        let (p, _, _) = self.forward_with(&shared.0, x)?;
        Ok(binary_xent(&[p], &[y]))
    }

    fn loss_and_grads(&self, shared: &Self::Shared, x: &Vec<usize>, y: bool) -> Result<(S, Self::Grads), ModelError> {
        let (p, hs, cache) = self.forward_with(&shared.0, x)?;
        let loss = binary_xent(&[p], &[y]);
        let target = if y { S::one() } else { S::zero() };
        let dlogit = p - target;
        let out_w: Vec<S> = hs.data().iter().map(|&h| h * dlogit).collect();
        let d_hs: Vec<S> = self.out_w.value.data().iter().map(|&w| w * dlogit).collect();
        let d_hs = Tensor::new(hs.shape().to_vec(), d_hs)?;
        let g = lstm_backward(&shared.0, &cache, &d_hs)?;
        let mut embed: BTreeMap<usize, Vec<S>> = BTreeMap::new();
        for (t, &tok) in x.iter().enumerate() {
            let row = embed.entry(tok).or_insert_with(|| vec![S::zero(); self.config.embed_dim]);
            for (r, &d) in row.iter_mut().zip(g.d_input.row(t)) {
                *r += d;
            }
        }
        Ok((loss, LstmGradients { embed, w_x: g.d_wx, w_h: g.d_wh, b: g.d_b, out_w, out_b: dlogit }))
    }

    fn accumulate(&mut self, g: &Self::Grads) -> Result<(), ModelError> {
        add_rows(&mut self.embed, &g.embed);
        self.w_x.grad.add_assign(&g.w_x)?;
        self.w_h.grad.add_assign(&g.w_h)?;
        self.b.grad.add_assign(&g.b)?;
        for (a, &v) in self.out_w.grad.data_mut().iter_mut().zip(&g.out_w) {
            *a += v;
        }
        self.out_b.grad.data_mut()[0] += g.out_b;
        Ok(())
    }

    fn parameters_mut(&mut self) -> Vec<&mut Parameter<S>> {
        vec![&mut self.embed, &mut self.w_x, &mut self.w_h, &mut self.b, &mut self.out_w, &mut self.out_b]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{train_lstm, TrainConfig};
    use crate::neural::gradcheck::{numerical_gradient, relative_error, STEP};

    fn small() -> LstmClassifier<f64> {
        LstmClassifier::new(LstmConfig { vocab_size: 6, embed_dim: 3, hidden: 4, max_len: 5 }, 11)
    }

    #[test]
    fn all_padding_gives_one_constant() {
        let m = small();
        let a = m.predict(&[0; 5]).unwrap();
        assert_eq!(a, m.predict(&[0; 5]).unwrap());
        assert!(a > 0.0 && a < 1.0);
    }

    #[test]
    fn checkpoint_round_trip() {
        let m = small();
        let mut buf = Vec::new();
        m.save(&mut buf, Dtype::F64).unwrap();
        let back: LstmClassifier<f64> = load_lstm(buf.as_slice()).unwrap();
        assert_eq!(back, m);
        let mut buf = Vec::new();
        m.save(&mut buf, Dtype::F32).unwrap();
        let narrow: LstmClassifier<f32> = load_lstm(buf.as_slice()).unwrap();
        let (a, b) = (m.predict(&[0, 1, 2, 3, 4]).unwrap(), narrow.predict(&[0, 1, 2, 3, 4]).unwrap());
        assert!((a - f64::from(b)).abs() < 1e-5);
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert!(small().predict(&[1, 2]).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let m = small();
        let x = vec![0, 2, 5, 2, 1];
        let shared = m.shared();
        let (_, g) = m.loss_and_grads(&shared, &x, true).unwrap();
        let mut acc = m.clone();
        acc.accumulate(&g).unwrap();
        for idx in 0..6 {
            let x0 = m.clone().parameters_mut()[idx].value.data().to_vec();
            let num = numerical_gradient(
                |v| {
                    let mut p = m.clone();
                    p.parameters_mut()[idx].value.data_mut().copy_from_slice(v);
                    p.loss(&p.shared(), &x, true).unwrap()
                },
                &x0,
                STEP,
            );
            let ana = acc.parameters_mut()[idx].grad.data().to_vec();
            assert!(relative_error(&ana, &num) < 1e-6, "parameter {idx}");
        }
    }

    #[test]
    fn same_seed_same_trace() {
        let seqs: Vec<Vec<usize>> = (0..12).map(|i| vec![0, 0, 2 + i % 3, 1 + i % 2, 3]).collect();
        let y: Vec<bool> = (0..12).map(|i| i % 2 == 0).collect();
        let cfg = TrainConfig { epochs: 3, batch_size: 4, max_len: 5, validation_fraction: 0.0, ..Default::default() };
        let (a, ra) = train_lstm::<f64>(&seqs, &y, 6, &cfg).unwrap();
        let (b, rb) = train_lstm::<f64>(&seqs, &y, 6, &cfg).unwrap();
        assert_eq!(ra, rb);
        assert_eq!(a, b);
        assert_eq!(ra.train_loss.len(), 4);
    }
}
