//! Additive attention over encoder annotations.

use rand::Rng;

use super::xavier_uniform;
use crate::error::{Error, Result};
use crate::tensor::{Element, NodeId, ParamId, Parameters, Tape};

/// Additive (concat) attention: scores are `v . tanh(Wa a_j + Ua s)`.
#[derive(Clone, Debug)]
pub struct AttentionModule {
    attention_dim: usize,
    wa: ParamId, // [annotation_dim x att]
    ua: ParamId, // [state_dim x att]
    v: ParamId,  // [att x 1]
}

impl AttentionModule {
    pub fn init<T: Element>(
        prefix: &str,
        params: &mut Parameters<T>,
        rng: &mut impl Rng,
        annotation_dim: usize,
        state_dim: usize,
        attention_dim: usize,
    ) -> Result<Self> {
        Ok(AttentionModule {
            attention_dim,
            wa: params.register(format!("{prefix}.wa"), xavier_uniform(rng, annotation_dim, attention_dim))?,
            ua: params.register(format!("{prefix}.ua"), xavier_uniform(rng, state_dim, attention_dim))?,
            v: params.register(format!("{prefix}.v"), xavier_uniform(rng, attention_dim, 1))?,
        })
    }

    pub fn attention_dim(&self) -> usize {
        self.attention_dim
    }

    /// Computes the context vector and the attention distribution over
    /// source positions. Weights (shape `[src_len x 1]`) sum to 1 and are
    /// recorded on the tape for penalty and plotting use.
    pub fn attend<T: Element>(
        &self,
        tape: &mut Tape<T>,
        params: &Parameters<T>,
        state: NodeId,
        annotations: NodeId,
    ) -> Result<(NodeId, NodeId)> {
        if tape.value(annotations).rows() == 0 {
            return Err(Error::contract("attention over an empty source"));
        }
        let wa = tape.param(params.get(self.wa));
        let ua = tape.param(params.get(self.ua));
        let v = tape.param(params.get(self.v));
        let proj_ann = tape.matmul(annotations, wa)?;
        let proj_state = tape.matmul(state, ua)?;
        let combined = tape.add_row(proj_ann, proj_state)?;
        let activated = tape.tanh(combined);
        let scores = tape.matmul(activated, v)?; // [L x 1]
        let weights = tape.softmax(scores, 0)?;
        let weights_t = tape.transpose(weights);
        let context = tape.matmul(weights_t, annotations)?; // [1 x annotation_dim]
        Ok((context, weights))
    }
}
