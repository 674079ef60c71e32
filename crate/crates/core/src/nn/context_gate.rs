//! Context gates balancing source-context against target-context input.
//!
//! The gate `z` in `(0, 1)^d` is a sigmoid of the decoder state, the
//! previous symbol embedding, and the attention context. Module contract
//! for the wiring, since only the idea is given upstream: the decoder
//! projects both the attention context (source stream) and the symbol
//! embedding (target stream) into the recurrent input space and feeds
//! `z (.) source + (1 - z) (.) target` to the LSTM.

use rand::Rng;

use super::xavier_uniform;
use crate::error::Result;
use crate::tensor::{Element, NodeId, ParamId, Parameters, Tape, Tensor};

#[derive(Clone, Debug)]
pub struct ContextGate {
    dim: usize,
    w_state: ParamId,   // [state_dim x dim]
    w_symbol: ParamId,  // [symbol_dim x dim]
    w_context: ParamId, // [context_dim x dim]
    bias: ParamId,      // [1 x dim]
}

impl ContextGate {
    pub fn init<T: Element>(
        prefix: &str,
        params: &mut Parameters<T>,
        rng: &mut impl Rng,
        state_dim: usize,
        symbol_dim: usize,
        context_dim: usize,
        dim: usize,
    ) -> Result<Self> {
        Ok(ContextGate {
            dim,
            w_state: params.register(format!("{prefix}.w_state"), xavier_uniform(rng, state_dim, dim))?,
            w_symbol: params.register(format!("{prefix}.w_symbol"), xavier_uniform(rng, symbol_dim, dim))?,
            w_context: params.register(format!("{prefix}.w_context"), xavier_uniform(rng, context_dim, dim))?,
            bias: params.register(format!("{prefix}.bias"), Tensor::zeros(vec![1, dim]))?,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Gate activation `z = sigmoid(W_s s + W_y y + W_c c + b)`, strictly
    /// inside `(0, 1)` elementwise.
    pub fn gate<T: Element>(
        &self,
        tape: &mut Tape<T>,
        params: &Parameters<T>,
        state: NodeId,
        symbol_emb: NodeId,
        source_context: NodeId,
    ) -> Result<NodeId> {
        let ws = tape.param(params.get(self.w_state));
        let wy = tape.param(params.get(self.w_symbol));
        let wc = tape.param(params.get(self.w_context));
        let b = tape.param(params.get(self.bias));
        let s = tape.matmul(state, ws)?;
        let y = tape.matmul(symbol_emb, wy)?;
        let c = tape.matmul(source_context, wc)?;
        let sy = tape.add(s, y)?;
        let syc = tape.add(sy, c)?;
        let pre = tape.add(syc, b)?;
        Ok(tape.sigmoid(pre))
    }

    /// Splits the mixture: returns `(z (.) source, (1 - z) (.) target)`.
    pub fn mix<T: Element>(
        tape: &mut Tape<T>,
        z: NodeId,
        source_stream: NodeId,
        target_stream: NodeId,
    ) -> Result<(NodeId, NodeId)> {
        let gated_source = tape.mul(z, source_stream)?;
        let ones = tape.input(Tensor::filled(tape.value(z).shape().to_vec(), T::one()));
        let inv = tape.sub(ones, z)?;
        let gated_target = tape.mul(inv, target_stream)?;
        Ok((gated_source, gated_target))
    }

    /// Computes the gate from `(state, symbol, context)` and applies it to
    /// the two streams in one call.
    #[allow(clippy::too_many_arguments)]
    pub fn apply<T: Element>(
        &self,
        tape: &mut Tape<T>,
        params: &Parameters<T>,
        state: NodeId,
        symbol_emb: NodeId,
        source_context: NodeId,
        source_stream: NodeId,
        target_stream: NodeId,
    ) -> Result<(NodeId, NodeId)> {
        let z = self.gate(tape, params, state, symbol_emb, source_context)?;
        Self::mix(tape, z, source_stream, target_stream)
    }
}
