//! LSTM cells, plain and layer-normalized.

use rand::Rng;

use super::{xavier_uniform, DropoutMask};
use crate::error::Result;
use crate::tensor::{Element, NodeId, ParamId, Parameters, Tape, Tensor};

/// Whether gate pre-activations are layer-normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LstmVariant {
    Plain,
    /// Normalizes the input-to-hidden and hidden-to-hidden pre-activation
    /// streams separately (own gain/bias each) and the fresh cell state
    /// before the output gate.
    LayerNorm,
}

#[derive(Clone, Debug)]
struct LnParams {
    gain_x: ParamId,
    bias_x: ParamId,
    gain_h: ParamId,
    bias_h: ParamId,
    gain_c: ParamId,
    bias_c: ParamId,
}

/// Single LSTM cell with fused gate weights.
///
/// Gate order within the `4 * hidden` blocks is fixed:
/// input, forget, candidate, output.
#[derive(Clone, Debug)]
pub struct LstmCell {
    input_dim: usize,
    hidden_dim: usize,
    variant: LstmVariant,
    w: ParamId, // [input_dim x 4h]
    u: ParamId, // [hidden_dim x 4h]
    b: ParamId, // [1 x 4h]
    ln: Option<LnParams>,
}

const LN_EPS: f64 = 1e-5;

impl LstmCell {
    /// Registers the cell's parameters under `prefix`. Weights are Xavier
    /// uniform, biases zero except the forget gate at +1.
    pub fn init<T: Element>(
        prefix: &str,
        params: &mut Parameters<T>,
        rng: &mut impl Rng,
        input_dim: usize,
        hidden_dim: usize,
        variant: LstmVariant,
    ) -> Result<Self> {
        let w = params.register(format!("{prefix}.w"), xavier_uniform(rng, input_dim, 4 * hidden_dim))?;
        let u = params.register(format!("{prefix}.u"), xavier_uniform(rng, hidden_dim, 4 * hidden_dim))?;
        let mut bias = Tensor::zeros(vec![1, 4 * hidden_dim]);
        for v in &mut bias.data_mut()[hidden_dim..2 * hidden_dim] {
            *v = T::one();
        }
        let b = params.register(format!("{prefix}.b"), bias)?;
        let ln = match variant {
            LstmVariant::Plain => None,
            LstmVariant::LayerNorm => Some(LnParams {
                gain_x: params.register(format!("{prefix}.ln.gain_x"), Tensor::filled(vec![1, 4 * hidden_dim], T::one()))?,
                bias_x: params.register(format!("{prefix}.ln.bias_x"), Tensor::zeros(vec![1, 4 * hidden_dim]))?,
                gain_h: params.register(format!("{prefix}.ln.gain_h"), Tensor::filled(vec![1, 4 * hidden_dim], T::one()))?,
                bias_h: params.register(format!("{prefix}.ln.bias_h"), Tensor::zeros(vec![1, 4 * hidden_dim]))?,
                gain_c: params.register(format!("{prefix}.ln.gain_c"), Tensor::filled(vec![1, hidden_dim], T::one()))?,
                bias_c: params.register(format!("{prefix}.ln.bias_c"), Tensor::zeros(vec![1, hidden_dim]))?,
            }),
        };
        Ok(LstmCell { input_dim, hidden_dim, variant, w, u, b, ln })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn variant(&self) -> LstmVariant {
        self.variant
    }

    /// Fresh all-zero (h, c) state values.
    pub fn zero_state<T: Element>(&self) -> (Tensor<T>, Tensor<T>) {
        (Tensor::zeros(vec![1, self.hidden_dim]), Tensor::zeros(vec![1, self.hidden_dim]))
    }

    /// One recurrence step. The dropout mask, when given, applies to the
    /// recurrent state before the hidden-to-hidden product and must be the
    /// same mask at every timestep of a sequence.
    pub fn step<T: Element>(
        &self,
        tape: &mut Tape<T>,
        params: &Parameters<T>,
        x: NodeId,
        h: NodeId,
        c: NodeId,
        mask: Option<&DropoutMask<T>>,
    ) -> Result<(NodeId, NodeId)> {
        let nh = self.hidden_dim;
        let h_in = match mask {
            Some(m) => m.apply(tape, h)?,
            None => h,
        };
        let w = tape.param(params.get(self.w));
        let u = tape.param(params.get(self.u));
        let b = tape.param(params.get(self.b));
        let xs = tape.matmul(x, w)?;
        let hs = tape.matmul(h_in, u)?;
        let eps = T::from_f64(LN_EPS);
        let pre = match &self.ln {
            None => {
                let sum = tape.add(xs, hs)?;
                tape.add(sum, b)?
            }
            Some(ln) => {
                let gx = tape.param(params.get(ln.gain_x));
                let bx = tape.param(params.get(ln.bias_x));
                let gh = tape.param(params.get(ln.gain_h));
                let bh = tape.param(params.get(ln.bias_h));
                let xs_n = tape.layer_norm(xs, gx, bx, eps)?;
                let hs_n = tape.layer_norm(hs, gh, bh, eps)?;
                let sum = tape.add(xs_n, hs_n)?;
                tape.add(sum, b)?
            }
        };
        let i_pre = tape.slice_cols(pre, 0, nh)?;
        let f_pre = tape.slice_cols(pre, nh, nh)?;
        let g_pre = tape.slice_cols(pre, 2 * nh, nh)?;
        let o_pre = tape.slice_cols(pre, 3 * nh, nh)?;
        let i = tape.sigmoid(i_pre);
        let f = tape.sigmoid(f_pre);
        let g = tape.tanh(g_pre);
        let o = tape.sigmoid(o_pre);
        let fc = tape.mul(f, c)?;
        let ig = tape.mul(i, g)?;
        let c_new = tape.add(fc, ig)?;
        let c_out = match &self.ln {
            None => c_new,
            Some(ln) => {
                let gc = tape.param(params.get(ln.gain_c));
                let bc = tape.param(params.get(ln.bias_c));
                tape.layer_norm(c_new, gc, bc, eps)?
            }
        };
        let c_act = tape.tanh(c_out);
        let h_new = tape.mul(o, c_act)?;
        Ok((h_new, c_new))
    }
}
