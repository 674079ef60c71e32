//! Neural building blocks: LSTM cells, embeddings, additive attention,
//! variational dropout, context gates, and the Adam optimizer.
//!
//! Layers own [`ParamId`] handles into a shared [`Parameters`] collection;
//! the tensors themselves live there so that checkpointing, averaging, and
//! optimization all operate on one flat named set.

mod adam;
mod attention;
mod context_gate;
mod dropout;
mod embedding;
mod lstm;

pub use adam::{AdamConfig, AdamState};
pub use attention::AttentionModule;
pub use context_gate::ContextGate;
pub use dropout::{sample_mask, DropoutMask};
pub use embedding::EmbeddingTable;
pub use lstm::{LstmCell, LstmVariant};

use rand::Rng;

use crate::tensor::{Element, Tensor};

/// Uniform init in +-sqrt(6 / (fan_in + fan_out)).
pub fn xavier_uniform<T: Element>(rng: &mut impl Rng, rows: usize, cols: usize) -> Tensor<T> {
    let bound = (6.0 / (rows + cols) as f64).sqrt();
    let data: Vec<T> = (0..rows * cols)
        .map(|_| T::from_f64(rng.random_range(-bound..bound)))
        .collect();
    Tensor::from_vec(vec![rows, cols], data).expect("shape matches data")
}
