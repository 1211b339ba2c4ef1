use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::train::{add_rows, TrainReport, Trainable};
use super::{ModelError, TrainConfig};
use crate::commit::SampledCommit;
use crate::neural::checkpoint::{read_checkpoint, write_checkpoint};
use crate::neural::{
    attention_backward, attention_pool, dense, dense_backward, mat_vec_acc, outer_acc, softmax, vec_mat_acc,
    Activation, AttentionOutput, NeuralError, Parameter, Tensor,
};
use crate::scalar::{Dtype, Scalar};
use crate::tokens::Vocabulary;
use crate::util::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDims {
    /// Size of each terminal and path embedding.
    pub embed: usize,
    /// Size of the code vector.
    pub code: usize,
}

impl Default for PathDims {
    fn default() -> Self {
        Self { embed: 128, code: 128 }
    }
}

/// The real contexts of a sampled commit as `[left, path, right]` vocabulary
/// indices, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedCommit {
    pub commit_id: String,
    pub contexts: Vec<[usize; 3]>,
}

pub fn index_commit(s: &SampledCommit, terminals: &Vocabulary, paths: &Vocabulary) -> IndexedCommit {
    let mut contexts: Vec<[usize; 3]> =
        s.real().map(|c| [terminals.lookup(&c.left), paths.lookup(&c.path), terminals.lookup(&c.right)]).collect();
    contexts.sort_unstable();
    IndexedCommit { commit_id: s.commit_id.clone(), contexts }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathAttentionModel<S> {
    pub dims: PathDims,
    pub k: usize,
    pub activation: Activation,
    pub terminal_embed: Parameter<S>,
    pub path_embed: Parameter<S>,
    pub fc_w: Parameter<S>,
    pub fc_b: Parameter<S>,
    pub attn: Parameter<S>,
    pub head_w: Parameter<S>,
    pub head_b: Parameter<S>,
    /// Digest of the terminal vocabulary the embeddings are indexed by.
    pub terminal_fingerprint: String,
    pub path_fingerprint: String,
}

#[derive(Debug, Clone)]
pub struct ForwardOutput<S> {
    pub probs: Vec<S>,
    pub code_vector: Vec<S>,
    /// Attention weight per context, in sorted context order.
    pub weights: Vec<S>,
}

struct Cache<S> {
    contexts: Vec<[usize; 3]>,
    x: Tensor<S>,
    y: Tensor<S>,
    att: AttentionOutput<S>,
    probs: Vec<S>,
}

pub struct PathGradients<S> {
    terminal: BTreeMap<usize, Vec<S>>,
    path: BTreeMap<usize, Vec<S>>,
    fc_w: Tensor<S>,
    fc_b: Tensor<S>,
    attn: Vec<S>,
    head_w: Vec<S>,
    head_b: Vec<S>,
}

const TENSOR_NAMES: [&str; 7] = [
    "path_attention/terminal_embed",
    "path_attention/path_embed",
    "path_attention/fc_w",
    "path_attention/fc_b",
    "path_attention/attn",
    "path_attention/head_w",
    "path_attention/head_b",
];

impl<S: Scalar> PathAttentionModel<S> {
    pub fn new(
        terminal_vocab: usize,
        path_vocab: usize,
        k: usize,
        dims: PathDims,
        activation: Activation,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = dims.embed;
        let c = dims.code;
        let [te, pe, fw, fb, at, hw, hb] = TENSOR_NAMES;
        Self {
            dims,
            k,
            activation,
            terminal_embed: Parameter::new(te, Tensor::fan_in_uniform(vec![terminal_vocab, e], e, &mut rng)),
            path_embed: Parameter::new(pe, Tensor::fan_in_uniform(vec![path_vocab, e], e, &mut rng)),
            fc_w: Parameter::new(fw, Tensor::fan_in_uniform(vec![3 * e, c], 3 * e, &mut rng)),
            fc_b: Parameter::new(fb, Tensor::zeros(vec![c])),
            attn: Parameter::new(at, Tensor::fan_in_uniform(vec![c], c, &mut rng)),
            head_w: Parameter::new(hw, Tensor::fan_in_uniform(vec![c, k], c, &mut rng)),
            head_b: Parameter::new(hb, Tensor::zeros(vec![k])),
            terminal_fingerprint: String::new(),
            path_fingerprint: String::new(),
        }
    }

    /// Fresh model whose embeddings are tied to the given vocabularies.
    pub fn for_vocabularies(
        terminals: &Vocabulary,
        paths: &Vocabulary,
        k: usize,
        dims: PathDims,
        activation: Activation,
        seed: u64,
    ) -> Self {
        let mut m = Self::new(terminals.len(), paths.len(), k, dims, activation, seed);
        m.terminal_fingerprint = terminals.fingerprint();
        m.path_fingerprint = paths.fingerprint();
        m
    }

    /// Same network with a freshly initialized `new_k`-way head. Every other
    /// parameter is copied unchanged.
    pub fn swap_head(&self, new_k: usize, seed: u64) -> Self {
        assert!(new_k >= 2, "a classification head needs at least 2 classes");
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "head"));
        let c = self.dims.code;
        let mut m = self.clone();
        m.k = new_k;
        m.head_w = Parameter::new(TENSOR_NAMES[5], Tensor::fan_in_uniform(vec![c, new_k], c, &mut rng));
        m.head_b = Parameter::new(TENSOR_NAMES[6], Tensor::zeros(vec![new_k]));
        m
    }

    pub fn check_vocab(&self, terminals: &Vocabulary, paths: &Vocabulary) -> Result<(), ModelError> {
        let t = terminals.fingerprint();
        if t != self.terminal_fingerprint {
            return Err(ModelError::VocabMismatch {
                what: "terminal",
                expected: self.terminal_fingerprint.clone(),
                found: t,
            });
        }
        let p = paths.fingerprint();
        if p != self.path_fingerprint {
            return Err(ModelError::VocabMismatch { what: "path", expected: self.path_fingerprint.clone(), found: p });
        }
        Ok(())
    }

    fn forward_cache(&self, commit: &IndexedCommit) -> Result<Cache<S>, ModelError> {
        if commit.contexts.is_empty() {
            return Err(NeuralError::AllMasked.into());
        }
        let mut contexts = commit.contexts.clone();
        contexts.sort_unstable();
        let e = self.dims.embed;
        let (nt, np) = (self.terminal_embed.value.rows(), self.path_embed.value.rows());
        let mut data = Vec::with_capacity(contexts.len() * 3 * e);
        for &[l, p, r] in &contexts {
            if l >= nt || r >= nt || p >= np {
                return Err(ModelError::Config(format!(
                    "context index {:?} outside vocabularies ({nt} terminals, {np} paths)",
                    [l, p, r]
                )));
            }
            data.extend_from_slice(self.terminal_embed.value.row(l));
            data.extend_from_slice(self.path_embed.value.row(p));
            data.extend_from_slice(self.terminal_embed.value.row(r));
        }
        let x = Tensor::new(vec![contexts.len(), 3 * e], data)?;
        let y = dense(&x, &self.fc_w.value, &self.fc_b.value, self.activation)?;
        let mask = vec![true; contexts.len()];
        let att = attention_pool(&y, self.attn.value.data(), &mask)?;
        let mut logits = self.head_b.value.data().to_vec();
        vec_mat_acc(&att.pooled, self.head_w.value.data(), &mut logits);
        let probs = softmax(&logits);
        Ok(Cache { contexts, x, y, att, probs })
    }

    /// Class probabilities and the pooled code vector for one commit.
    pub fn commit_forward(&self, commit: &IndexedCommit) -> Result<ForwardOutput<S>, ModelError> {
        let c = self.forward_cache(commit)?;
        Ok(ForwardOutput { probs: c.probs, code_vector: c.att.pooled, weights: c.att.weights })
    }

    pub fn parameters(&self) -> [&Parameter<S>; 7] {
        [&self.terminal_embed, &self.path_embed, &self.fc_w, &self.fc_b, &self.attn, &self.head_w, &self.head_b]
    }

    fn meta(&self) -> serde_json::Value {
        serde_json::json!({
            "model": "path_attention",
            "k": self.k,
            "dims": self.dims,
            "activation": self.activation,
            "terminal_vocab": self.terminal_fingerprint,
            "path_vocab": self.path_fingerprint,
        })
    }

    pub fn save<W: Write>(&self, out: W, dtype: Dtype) -> Result<(), ModelError> {
        write_checkpoint(out, &self.parameters(), dtype, self.meta())?;
        Ok(())
    }
}

#[derive(Deserialize)]
struct Meta {
    model: String,
    k: usize,
    dims: PathDims,
    activation: Activation,
    terminal_vocab: String,
    path_vocab: String,
}

pub fn load_path_attention<S: Scalar, R: BufRead>(input: R) -> Result<PathAttentionModel<S>, ModelError> {
    let ckpt = read_checkpoint(input)?;
    let meta: Meta = serde_json::from_value(ckpt.meta().clone())
        .map_err(|e| ModelError::Config(format!("checkpoint metadata: {e}")))?;
    if meta.model != "path_attention" {
        return Err(ModelError::Config(format!("checkpoint holds a {:?} model", meta.model)));
    }
    let load = |i: usize| -> Result<Parameter<S>, ModelError> {
        Ok(Parameter::new(TENSOR_NAMES[i], ckpt.tensor::<S>(TENSOR_NAMES[i])?))
    };
    let m = PathAttentionModel {
        dims: meta.dims,
        k: meta.k,
        activation: meta.activation,
        terminal_embed: load(0)?,
        path_embed: load(1)?,
        fc_w: load(2)?,
        fc_b: load(3)?,
        attn: load(4)?,
        head_w: load(5)?,
        head_b: load(6)?,
        terminal_fingerprint: meta.terminal_vocab,
        path_fingerprint: meta.path_vocab,
    };
    let (e, c) = (m.dims.embed, m.dims.code);
    m.terminal_embed.value.expect_shape("checkpoint", &[m.terminal_embed.value.rows(), e])?;
    m.path_embed.value.expect_shape("checkpoint", &[m.path_embed.value.rows(), e])?;
    m.fc_w.value.expect_shape("checkpoint", &[3 * e, c])?;
    m.fc_b.value.expect_shape("checkpoint", &[c])?;
    m.attn.value.expect_shape("checkpoint", &[c])?;
    m.head_w.value.expect_shape("checkpoint", &[c, m.k])?;
    m.head_b.value.expect_shape("checkpoint", &[m.k])?;
    Ok(m)
}

/// Sidecar written next to a checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelManifest {
    pub model: String,
    pub k: usize,
    pub terminal_vocab_sha256: String,
    pub path_vocab_sha256: String,
    pub config: TrainConfig,
    pub seed: u64,
    pub report: Option<TrainReport>,
}

impl<S: Scalar> Trainable<S> for PathAttentionModel<S> {
    type Input = IndexedCommit;
    type Target = usize;
    type Grads = PathGradients<S>;
    type Shared = ();

    fn shared(&self) {}

    fn loss(&self, _: &(), x: &IndexedCommit, y: usize) -> Result<S, ModelError> {
        let c = self.forward_cache(x)?;
        Ok(-c.probs[y].max(S::min_positive_value()).ln())
    }

    fn loss_and_grads(&self, _: &(), x: &IndexedCommit, y: usize) -> Result<(S, PathGradients<S>), ModelError> {
        let c = self.forward_cache(x)?;
        let loss = -c.probs[y].max(S::min_positive_value()).ln();
        let mut d_logits = c.probs.clone();
        d_logits[y] -= S::one();
        let code = self.dims.code;
        let mut head_w = vec![S::zero(); code * self.k];
        outer_acc(&c.att.pooled, &d_logits, &mut head_w);
        let mut d_code = vec![S::zero(); code];
        mat_vec_acc(self.head_w.value.data(), &d_logits, &mut d_code);
        let mask = vec![true; c.contexts.len()];
        let ag = attention_backward(&c.y, self.attn.value.data(), &mask, &c.att, &d_code)?;
        let dg = dense_backward(&c.x, &self.fc_w.value, &c.y, self.activation, &ag.d_vecs)?;
        let e = self.dims.embed;
        let mut terminal: BTreeMap<usize, Vec<S>> = BTreeMap::new();
        let mut path: BTreeMap<usize, Vec<S>> = BTreeMap::new();
        let add = |map: &mut BTreeMap<usize, Vec<S>>, i: usize, g: &[S]| {
            let row = map.entry(i).or_insert_with(|| vec![S::zero(); e]);
            for (r, &v) in row.iter_mut().zip(g) {
                *r += v;
            }
        };
        for (n, &[l, p, r]) in c.contexts.iter().enumerate() {
            let row = dg.dx.row(n);
            add(&mut terminal, l, &row[..e]);
            add(&mut path, p, &row[e..2 * e]);
            add(&mut terminal, r, &row[2 * e..]);
        }
        Ok((
            loss,
            PathGradients { terminal, path, fc_w: dg.dw, fc_b: dg.db, attn: ag.d_attn, head_w, head_b: d_logits },
        ))
    }

    fn accumulate(&mut self, g: &PathGradients<S>) -> Result<(), ModelError> {
        add_rows(&mut self.terminal_embed, &g.terminal);
        add_rows(&mut self.path_embed, &g.path);
        self.fc_w.grad.add_assign(&g.fc_w)?;
        self.fc_b.grad.add_assign(&g.fc_b)?;
        let add = |p: &mut Parameter<S>, v: &[S]| {
            for (a, &x) in p.grad.data_mut().iter_mut().zip(v) {
                *a += x;
            }
        };
        add(&mut self.attn, &g.attn);
        add(&mut self.head_w, &g.head_w);
        add(&mut self.head_b, &g.head_b);
        Ok(())
    }

    fn parameters_mut(&mut self) -> Vec<&mut Parameter<S>> {
        vec![
            &mut self.terminal_embed,
            &mut self.path_embed,
            &mut self.fc_w,
            &mut self.fc_b,
            &mut self.attn,
            &mut self.head_w,
            &mut self.head_b,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> PathAttentionModel<f64> {
        PathAttentionModel::new(10, 8, 3, PathDims { embed: 4, code: 5 }, Activation::Tanh, 7)
    }

    fn commit(ctx: Vec<[usize; 3]>) -> IndexedCommit {
        IndexedCommit { commit_id: "c".into(), contexts: ctx }
    }

    #[test]
    fn single_context_code_vector_is_fc_output() {
        let m = small();
        let c = commit(vec![[2, 3, 4]]);
        let out = m.commit_forward(&c).unwrap();
        let cache = m.forward_cache(&c).unwrap();
        assert_eq!(out.code_vector, cache.y.row(0));
        assert_eq!(out.weights, [1.0]);
    }

    #[test]
    fn permutation_invariant_and_normalized() {
        let m = small();
        let a = m.commit_forward(&commit(vec![[2, 3, 4], [5, 1, 9], [0, 7, 2]])).unwrap();
        let b = m.commit_forward(&commit(vec![[0, 7, 2], [2, 3, 4], [5, 1, 9]])).unwrap();
        assert_eq!(a.probs, b.probs);
        assert_eq!(a.code_vector, b.code_vector);
        assert!((a.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_commit_is_all_masked() {
        assert!(matches!(small().commit_forward(&commit(vec![])), Err(ModelError::Neural(NeuralError::AllMasked))));
    }

    #[test]
    fn head_swap_keeps_body() {
        let m = small();
        let s = m.swap_head(2, 1);
        assert_eq!(s.head_w.shape(), &[5, 2]);
        for (a, b) in m.parameters().iter().zip(s.parameters()).take(5) {
            assert!(a.value.bitwise_eq(&b.value));
        }
        let c = commit(vec![[1, 2, 3], [4, 5, 6]]);
        assert_eq!(m.commit_forward(&c).unwrap().code_vector, s.commit_forward(&c).unwrap().code_vector);
        assert!(!m.swap_head(3, 1).head_w.value.bitwise_eq(&m.head_w.value));
    }

    #[test]
    fn checkpoint_round_trip() {
        let m = small();
        let mut buf = Vec::new();
        m.save(&mut buf, Dtype::F64).unwrap();
        let back: PathAttentionModel<f64> = load_path_attention(&buf[..]).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn gradients_match_finite_differences() {
        use crate::neural::gradcheck::{numerical_gradient, relative_error, STEP};
        let m = small();
        let c = commit(vec![[2, 3, 4], [5, 1, 9], [4, 7, 2]]);
        let (_, g) = m.loss_and_grads(&(), &c, 1).unwrap();
        let mut acc = m.clone();
        acc.accumulate(&g).unwrap();
        for idx in 0..7 {
            let x0 = m.parameters()[idx].value.data().to_vec();
            let num = numerical_gradient(
                |x| {
                    let mut p = m.clone();
                    p.parameters_mut()[idx].value.data_mut().copy_from_slice(x);
                    p.loss(&(), &c, 1).unwrap()
                },
                &x0,
                STEP,
            );
            let ana = acc.parameters()[idx].grad.data().to_vec();
            let err = relative_error(&ana, &num);
            assert!(err < 1e-6, "{}: {err}", TENSOR_NAMES[idx]);
        }
    }
}
