//! Run configuration: `key = value` lines with `#` comments.

use std::path::Path;

use crate::decoding::PenaltyConfig;
use crate::error::{Error, Result};
use crate::model::{Direction, ModelConfig, TrainConfig, VocabLevel};

/// Every knob a run needs; unknown keys are rejected at parse time and the
/// resolved configuration is written next to a run's outputs.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub word_embed_dim: usize,
    pub char_embed_dim: usize,
    pub encoder_state_dim: usize,
    pub decoder_state_dim: usize,
    pub attention_dim: usize,
    pub decoder_level: VocabLevel,
    pub direction: Direction,
    pub layer_norm: bool,
    pub dropout_keep_prob: f64,
    pub context_gates: bool,
    pub source_vocab_size: usize,
    pub target_vocab_size: usize,

    pub model_id: String,
    pub batch_size: usize,
    pub train_batches: u64,
    pub savepoint_interval: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,

    pub beam_size: usize,
    pub length_penalty: f64,
    pub coverage_penalty: f64,
    pub overtranslation_penalty: f64,

    pub train_source: Option<String>,
    pub train_target: Option<String>,
    pub heldout_source: Option<String>,
    pub heldout_target: Option<String>,
    pub output_dir: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
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
            source_vocab_size: 50_000,
            target_vocab_size: 20_000,
            model_id: "model".to_string(),
            batch_size: 16,
            train_batches: 0,
            savepoint_interval: 5000,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 1,
            beam_size: 10,
            length_penalty: 0.0,
            coverage_penalty: 0.0,
            overtranslation_penalty: 0.0,
            train_source: None,
            train_target: None,
            heldout_source: None,
            heldout_target: None,
            output_dir: None,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::parameter(format!("bad value {value:?} for key {key:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::parameter(format!("bad boolean {value:?} for key {key:?}"))),
    }
}

impl RunConfig {
    /// Applies one `key = value` assignment. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "word_embed_dim" => self.word_embed_dim = parse_value(key, value)?,
            "char_embed_dim" => self.char_embed_dim = parse_value(key, value)?,
            "encoder_state_dim" => self.encoder_state_dim = parse_value(key, value)?,
            "decoder_state_dim" => self.decoder_state_dim = parse_value(key, value)?,
            "attention_dim" => self.attention_dim = parse_value(key, value)?,
            "decoder_level" => self.decoder_level = value.parse()?,
            "direction" => self.direction = value.parse()?,
            "layer_norm" => self.layer_norm = parse_bool(key, value)?,
            "dropout_keep_prob" => self.dropout_keep_prob = parse_value(key, value)?,
            "context_gates" => self.context_gates = parse_bool(key, value)?,
            "source_vocab_size" => self.source_vocab_size = parse_value(key, value)?,
            "target_vocab_size" => self.target_vocab_size = parse_value(key, value)?,
            "model_id" => self.model_id = value.to_string(),
            "batch_size" => self.batch_size = parse_value(key, value)?,
            "train_batches" => self.train_batches = parse_value(key, value)?,
            "savepoint_interval" => self.savepoint_interval = parse_value(key, value)?,
            "learning_rate" => self.learning_rate = parse_value(key, value)?,
            "beta1" => self.beta1 = parse_value(key, value)?,
            "beta2" => self.beta2 = parse_value(key, value)?,
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "beam_size" => self.beam_size = parse_value(key, value)?,
            "length_penalty" => self.length_penalty = parse_value(key, value)?,
            "coverage_penalty" => self.coverage_penalty = parse_value(key, value)?,
            "overtranslation_penalty" => self.overtranslation_penalty = parse_value(key, value)?,
            "train_source" => self.train_source = Some(value.to_string()),
            "train_target" => self.train_target = Some(value.to_string()),
            "heldout_source" => self.heldout_source = Some(value.to_string()),
            "heldout_target" => self.heldout_target = Some(value.to_string()),
            "output_dir" => self.output_dir = Some(value.to_string()),
            _ => return Err(Error::parameter(format!("unknown configuration key {key:?}"))),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::format(
                    Some(lineno + 1),
                    format!("expected `key = value`, got {raw:?}"),
                ));
            };
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::format(Some(lineno + 1), e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Serializes the fully resolved configuration.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("word_embed_dim", self.word_embed_dim.to_string());
        kv("char_embed_dim", self.char_embed_dim.to_string());
        kv("encoder_state_dim", self.encoder_state_dim.to_string());
        kv("decoder_state_dim", self.decoder_state_dim.to_string());
        kv("attention_dim", self.attention_dim.to_string());
        kv("decoder_level", self.decoder_level.to_string());
        kv("direction", self.direction.to_string());
        kv("layer_norm", self.layer_norm.to_string());
        kv("dropout_keep_prob", self.dropout_keep_prob.to_string());
        kv("context_gates", self.context_gates.to_string());
        kv("source_vocab_size", self.source_vocab_size.to_string());
        kv("target_vocab_size", self.target_vocab_size.to_string());
        kv("model_id", self.model_id.clone());
        kv("batch_size", self.batch_size.to_string());
        kv("train_batches", self.train_batches.to_string());
        kv("savepoint_interval", self.savepoint_interval.to_string());
        kv("learning_rate", self.learning_rate.to_string());
        kv("beta1", self.beta1.to_string());
        kv("beta2", self.beta2.to_string());
        kv("epsilon", self.epsilon.to_string());
        kv("seed", self.seed.to_string());
        kv("beam_size", self.beam_size.to_string());
        kv("length_penalty", self.length_penalty.to_string());
        kv("coverage_penalty", self.coverage_penalty.to_string());
        kv("overtranslation_penalty", self.overtranslation_penalty.to_string());
        for (k, v) in [
            ("train_source", &self.train_source),
            ("train_target", &self.train_target),
            ("heldout_source", &self.heldout_source),
            ("heldout_target", &self.heldout_target),
            ("output_dir", &self.output_dir),
        ] {
            if let Some(v) = v {
                kv(k, v.clone());
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            word_embed_dim: self.word_embed_dim,
            char_embed_dim: self.char_embed_dim,
            encoder_state_dim: self.encoder_state_dim,
            decoder_state_dim: self.decoder_state_dim,
            attention_dim: self.attention_dim,
            decoder_level: self.decoder_level,
            direction: self.direction,
            layer_norm: self.layer_norm,
            dropout_keep_prob: self.dropout_keep_prob,
            context_gates: self.context_gates,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            model_id: self.model_id.clone(),
            batch_size: self.batch_size,
            max_batches: self.train_batches,
            savepoint_interval: self.savepoint_interval,
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            seed: self.seed,
        }
    }

    pub fn penalties(&self) -> Result<PenaltyConfig> {
        PenaltyConfig::new(self.length_penalty, self.coverage_penalty, self.overtranslation_penalty)
    }
}
