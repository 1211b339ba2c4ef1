//! Single-layer LSTM with backpropagation through time.
//!
//! Gate layout inside the `4h` pre-activation vector is `[i, f, g, o]`:
//! input gate, forget gate, cell candidate, output gate.

use rand::Rng;

use super::tensor::{mat_vec_acc, outer_acc, vec_mat_acc};
use super::{NeuralError, Tensor};
use crate::scalar::{sigmoid, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams<S> {
    /// `[input, 4h]`
    pub w_x: Tensor<S>,
    /// `[h, 4h]`
    pub w_h: Tensor<S>,
    /// `[4h]`
    pub b: Tensor<S>,
}

impl<S: Scalar> LstmParams<S> {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w_x: Tensor::zeros(vec![input, 4 * hidden]),
            w_h: Tensor::zeros(vec![hidden, 4 * hidden]),
            b: Tensor::zeros(vec![4 * hidden]),
        }
    }

    pub fn init<R: Rng + ?Sized>(input: usize, hidden: usize, rng: &mut R) -> Self {
        Self {
            w_x: Tensor::fan_in_uniform(vec![input, 4 * hidden], input, rng),
            w_h: Tensor::fan_in_uniform(vec![hidden, 4 * hidden], hidden, rng),
            b: Tensor::zeros(vec![4 * hidden]),
        }
    }

    pub fn hidden(&self) -> usize {
        self.b.len() / 4
    }

    pub fn input(&self) -> usize {
        self.w_x.rows()
    }

    fn validate(&self) -> Result<(usize, usize), NeuralError> {
        let h4 = self.b.len();
        if h4 == 0 || h4 % 4 != 0 {
            return Err(NeuralError::Shape { op: "lstm bias", left: self.b.shape().to_vec(), right: vec![4] });
        }
        let h = h4 / 4;
        let (input, c) = self.w_x.dims2("lstm")?;
        if c != h4 {
            return Err(NeuralError::Shape {
                op: "lstm w_x",
                left: self.w_x.shape().to_vec(),
                right: self.b.shape().to_vec(),
            });
        }
        self.w_h.expect_shape("lstm w_h", &[h, h4])?;
        Ok((input, h))
    }
}

/// Activations saved by [`lstm_forward`] for the backward pass.
#[derive(Debug, Clone)]
pub struct LstmCache<S> {
    input: Tensor<S>,
    /// Post-activation gates `[T, 4h]`.
    gates: Vec<S>,
    /// Cell states `[T, h]`.
    cells: Vec<S>,
    /// Hidden states `[T, h]`.
    hidden: Vec<S>,
}

#[derive(Debug, Clone)]
pub struct LstmGrads<S> {
    pub d_input: Tensor<S>,
    pub d_wx: Tensor<S>,
    pub d_wh: Tensor<S>,
    pub d_b: Tensor<S>,
}

fn step<S: Scalar>(
    params: &LstmParams<S>,
    x: &[S],
    h_prev: &[S],
    c_prev: &[S],
    gates: &mut [S],
    c: &mut [S],
    h: &mut [S],
) {
    let hid = h.len();
    gates.copy_from_slice(params.b.data());
    vec_mat_acc(x, params.w_x.data(), gates);
    vec_mat_acc(h_prev, params.w_h.data(), gates);
    for j in 0..hid {
        let i_g = sigmoid(gates[j]);
        let f_g = sigmoid(gates[hid + j]);
        let g_g = gates[2 * hid + j].tanh();
        let o_g = sigmoid(gates[3 * hid + j]);
        gates[j] = i_g;
        gates[hid + j] = f_g;
        gates[2 * hid + j] = g_g;
        gates[3 * hid + j] = o_g;
        c[j] = f_g * c_prev[j] + i_g * g_g;
        h[j] = o_g * c[j].tanh();
    }
}

/// One recurrence step from an explicit previous state; returns `(h, c)`.
pub fn lstm_cell<S: Scalar>(
    params: &LstmParams<S>,
    x: &[S],
    h_prev: &[S],
    c_prev: &[S],
) -> Result<(Vec<S>, Vec<S>), NeuralError> {
    let (input, hid) = params.validate()?;
    if x.len() != input || h_prev.len() != hid || c_prev.len() != hid {
        return Err(NeuralError::Shape {
            op: "lstm_cell",
            left: vec![x.len(), h_prev.len(), c_prev.len()],
            right: vec![input, hid, hid],
        });
    }
    let mut gates = vec![S::zero(); 4 * hid];
    let mut c = vec![S::zero(); hid];
    let mut h = vec![S::zero(); hid];
    step(params, x, h_prev, c_prev, &mut gates, &mut c, &mut h);
    Ok((h, c))
}

/// Runs the recurrence from a zero state over `seq[T, input]` and returns every
/// hidden state `[T, h]`.
pub fn lstm_forward<S: Scalar>(
    seq: &Tensor<S>,
    params: &LstmParams<S>,
) -> Result<(Tensor<S>, LstmCache<S>), NeuralError> {
    let (input, hid) = params.validate()?;
    let (t_len, e) = seq.dims2("lstm_forward")?;
    if t_len == 0 {
        return Err(NeuralError::EmptySequence);
    }
    if e != input {
        return Err(NeuralError::Shape {
            op: "lstm_forward",
            left: seq.shape().to_vec(),
            right: params.w_x.shape().to_vec(),
        });
    }
    let mut gates = vec![S::zero(); t_len * 4 * hid];
    let mut cells = vec![S::zero(); t_len * hid];
    let mut hidden = vec![S::zero(); t_len * hid];
    let zeros = vec![S::zero(); hid];
    for t in 0..t_len {
        let (h_done, h_rest) = hidden.split_at_mut(t * hid);
        let (c_done, c_rest) = cells.split_at_mut(t * hid);
        let (h_prev, c_prev) =
            if t == 0 { (&zeros[..], &zeros[..]) } else { (&h_done[(t - 1) * hid..], &c_done[(t - 1) * hid..]) };
        step(
            params,
            seq.row(t),
            h_prev,
            c_prev,
            &mut gates[t * 4 * hid..(t + 1) * 4 * hid],
            &mut c_rest[..hid],
            &mut h_rest[..hid],
        );
    }
    let out = Tensor::new(vec![t_len, hid], hidden.clone())?;
    Ok((out, LstmCache { input: seq.clone(), gates, cells, hidden }))
}

/// Backpropagation through time given the gradient of the loss with respect
/// to every hidden state, `d_out[T, h]`.
pub fn lstm_backward<S: Scalar>(
    params: &LstmParams<S>,
    cache: &LstmCache<S>,
    d_out: &Tensor<S>,
) -> Result<LstmGrads<S>, NeuralError> {
    let (input, hid) = params.validate()?;
    let t_len = cache.input.rows();
    d_out.expect_shape("lstm_backward", &[t_len, hid])?;

    let mut d_input = Tensor::zeros(vec![t_len, input]);
    let mut d_wx = Tensor::zeros(vec![input, 4 * hid]);
    let mut d_wh = Tensor::zeros(vec![hid, 4 * hid]);
    let mut d_b = Tensor::zeros(vec![4 * hid]);

    let mut dh_next = vec![S::zero(); hid];
    let mut dc_next = vec![S::zero(); hid];
    let mut dz = vec![S::zero(); 4 * hid];
    let zeros = vec![S::zero(); hid];

    for t in (0..t_len).rev() {
        let g = &cache.gates[t * 4 * hid..(t + 1) * 4 * hid];
        let c = &cache.cells[t * hid..(t + 1) * hid];
        let c_prev = if t == 0 { &zeros[..] } else { &cache.cells[(t - 1) * hid..t * hid] };
        let h_prev = if t == 0 { &zeros[..] } else { &cache.hidden[(t - 1) * hid..t * hid] };
        let d_row = d_out.row(t);
        for j in 0..hid {
            let (i_g, f_g, g_g, o_g) = (g[j], g[hid + j], g[2 * hid + j], g[3 * hid + j]);
            let dh = d_row[j] + dh_next[j];
            let tc = c[j].tanh();
            let dc = dc_next[j] + dh * o_g * (S::one() - tc * tc);
            dz[j] = dc * g_g * i_g * (S::one() - i_g);
            dz[hid + j] = dc * c_prev[j] * f_g * (S::one() - f_g);
            dz[2 * hid + j] = dc * i_g * (S::one() - g_g * g_g);
            dz[3 * hid + j] = dh * tc * o_g * (S::one() - o_g);
            dc_next[j] = dc * f_g;
        }
        outer_acc(cache.input.row(t), &dz, d_wx.data_mut());
        outer_acc(h_prev, &dz, d_wh.data_mut());
        for (acc, &v) in d_b.data_mut().iter_mut().zip(&dz) {
            *acc += v;
        }
        mat_vec_acc(params.w_x.data(), &dz, d_input.row_mut(t));
        dh_next.iter_mut().for_each(|v| *v = S::zero());
        mat_vec_acc(params.w_h.data(), &dz, &mut dh_next);
    }
    Ok(LstmGrads { d_input, d_wx, d_wh, d_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_weights_and_inputs_give_zero_outputs() {
        let params = LstmParams::<f64>::zeros(3, 5);
        let seq = Tensor::zeros(vec![7, 3]);
        let (out, _) = lstm_forward(&seq, &params).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_step_matches_cell() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = LstmParams::<f64>::init(3, 4, &mut rng);
        let seq = Tensor::uniform(vec![1, 3], 1.0, &mut rng);
        let (out, _) = lstm_forward(&seq, &params).unwrap();
        let (h, _) = lstm_cell(&params, seq.row(0), &[0.0; 4], &[0.0; 4]).unwrap();
        assert_eq!(out.row(0), h.as_slice());
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let params = LstmParams::<f64>::zeros(2, 2);
        let seq = Tensor::zeros(vec![0, 2]);
        assert_eq!(lstm_forward(&seq, &params).unwrap_err(), NeuralError::EmptySequence);
    }

    #[test]
    fn input_width_mismatch_is_shape_error() {
        let params = LstmParams::<f64>::zeros(2, 2);
        let seq = Tensor::zeros(vec![3, 5]);
        assert!(matches!(lstm_forward(&seq, &params), Err(NeuralError::Shape { .. })));
    }
}
