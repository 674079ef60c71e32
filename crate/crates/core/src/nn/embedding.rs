//! Token embedding tables.

use rand::Rng;

use super::xavier_uniform;
use crate::error::{Error, Result};
use crate::tensor::{Element, NodeId, ParamId, Parameters, Tape};

/// A `vocab_size x dim` lookup table. Gradients flow only through rows that
/// were actually looked up.
#[derive(Clone, Debug)]
pub struct EmbeddingTable {
    vocab_size: usize,
    dim: usize,
    table: ParamId,
}

impl EmbeddingTable {
    pub fn init<T: Element>(
        name: &str,
        params: &mut Parameters<T>,
        rng: &mut impl Rng,
        vocab_size: usize,
        dim: usize,
    ) -> Result<Self> {
        let table = params.register(name.to_string(), xavier_uniform(rng, vocab_size, dim))?;
        Ok(EmbeddingTable { vocab_size, dim, table })
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lookup<T: Element>(
        &self,
        tape: &mut Tape<T>,
        params: &Parameters<T>,
        id: usize,
    ) -> Result<NodeId> {
        if id >= self.vocab_size {
            return Err(Error::contract(format!(
                "token id {id} out of range for vocabulary of {}",
                self.vocab_size
            )));
        }
        let table = tape.param(params.get(self.table));
        tape.lookup(table, id)
    }
}
