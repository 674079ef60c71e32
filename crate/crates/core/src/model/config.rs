//! Model hyperparameters.

use serde::{Deserialize, Serialize};

use super::vocab::VocabLevel;
use crate::error::{Error, Result};

/// Generation order of the decoder. A backward model is trained on
/// reversed target sequences; its outputs are un-reversed after decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Forward => write!(f, "forward"),
            Direction::Backward => write!(f, "backward"),
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" | "fw" => Ok(Direction::Forward),
            "backward" | "bw" => Ok(Direction::Backward),
            other => Err(Error::parameter(format!("unknown direction {other:?}"))),
        }
    }
}

/// Architecture and option switches for one model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub word_embed_dim: usize,
    pub char_embed_dim: usize,
    pub encoder_state_dim: usize,
    pub decoder_state_dim: usize,
    pub attention_dim: usize,
    pub decoder_level: VocabLevel,
    pub direction: Direction,
    /// Layer-normalized LSTM variant for all cells.
    pub layer_norm: bool,
    /// Variational dropout keep probability on recurrent states; 1.0 = off.
    pub dropout_keep_prob: f64,
    pub context_gates: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            word_embed_dim: 256,
            char_embed_dim: 64,
            encoder_state_dim: 512,
            decoder_state_dim: 1024,
            attention_dim: 256,
            decoder_level: VocabLevel::Bpe,
            direction: Direction::Forward,
            layer_norm: false,
            dropout_keep_prob: 1.0,
            context_gates: false,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("word_embed_dim", self.word_embed_dim),
            ("char_embed_dim", self.char_embed_dim),
            ("encoder_state_dim", self.encoder_state_dim),
            ("decoder_state_dim", self.decoder_state_dim),
            ("attention_dim", self.attention_dim),
        ] {
            if v == 0 {
                return Err(Error::parameter(format!("{name} must be positive")));
            }
        }
        if self.dropout_keep_prob <= 0.0 || self.dropout_keep_prob > 1.0 {
            return Err(Error::parameter(format!(
                "dropout_keep_prob {} outside (0, 1]",
                self.dropout_keep_prob
            )));
        }
        Ok(())
    }

    /// Target embedding width: characters embed smaller than words.
    pub fn target_embed_dim(&self) -> usize {
        match self.decoder_level {
            VocabLevel::Char => self.char_embed_dim,
            VocabLevel::Word | VocabLevel::Bpe => self.word_embed_dim,
        }
    }
}
