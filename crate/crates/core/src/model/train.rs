//! Minibatch training with Adam, savepoint scheduling, and heldout scoring.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::savepoint::{HeldoutScores, Savepoint};
use super::TranslationModel;
use crate::error::{Error, Result};
use crate::metrics;
use crate::nn::{AdamConfig, AdamState};
use crate::tensor::{Element, Tape};

/// Line-aligned sentence pairs: whitespace-split source tokens plus the
/// raw target line (already at the decoder's segmentation level).
#[derive(Clone, Debug, Default)]
pub struct ParallelCorpus {
    pub pairs: Vec<(Vec<String>, String)>,
}

impl ParallelCorpus {
    /// Pairs up aligned lines. A line-count mismatch is an ingestion error
    /// reporting the first unmatched line; pairs with an empty source side
    /// are skipped with a warning.
    pub fn from_lines(src: &[String], trg: &[String]) -> Result<Self> {
        if src.len() != trg.len() {
            return Err(Error::Ingestion {
                line: Some(src.len().min(trg.len()) + 1),
                detail: format!(
                    "source has {} lines but target has {}",
                    src.len(),
                    trg.len()
                ),
            });
        }
        let mut pairs = Vec::with_capacity(src.len());
        for (i, (s, t)) in src.iter().zip(trg).enumerate() {
            let tokens: Vec<String> = s.split_whitespace().map(|w| w.to_string()).collect();
            if tokens.is_empty() {
                log::warn!("skipping pair at line {}: empty source", i + 1);
                continue;
            }
            pairs.push((tokens, t.clone()));
        }
        Ok(ParallelCorpus { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub model_id: String,
    pub batch_size: usize,
    /// Training budget in minibatches.
    pub max_batches: u64,
    pub savepoint_interval: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            model_id: "model".to_string(),
            batch_size: 16,
            max_batches: 0,
            savepoint_interval: 5000,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 1,
        }
    }
}

/// Trains with minibatch Adam on per-token cross-entropy. A savepoint is
/// taken at initialization, after every `savepoint_interval` batches, and
/// at the end of the budget; each is scored on the heldout set when one is
/// given. The loop is deterministic in `cfg.seed`.
pub fn train<T: Element>(
    model: &mut TranslationModel<T>,
    corpus: &ParallelCorpus,
    heldout: Option<&ParallelCorpus>,
    cfg: &TrainConfig,
) -> Result<Vec<Savepoint<T>>> {
    if corpus.is_empty() {
        return Err(Error::contract("training corpus is empty"));
    }
    if cfg.batch_size == 0 {
        return Err(Error::parameter("batch_size must be at least 1"));
    }
    if cfg.savepoint_interval == 0 {
        return Err(Error::parameter("savepoint_interval must be at least 1"));
    }
    let encoded: Vec<(Vec<String>, Vec<u32>)> = corpus
        .pairs
        .iter()
        .map(|(src, trg)| (src.clone(), model.encode_target_line(trg)))
        .collect();
    let heldout_encoded: Option<Vec<(Vec<String>, Vec<u32>)>> = heldout.map(|h| {
        h.pairs
            .iter()
            .map(|(src, trg)| (src.clone(), model.encode_target_line(trg)))
            .collect()
    });

    let adam_cfg = AdamConfig {
        learning_rate: T::from_f64(cfg.learning_rate),
        beta1: T::from_f64(cfg.beta1),
        beta2: T::from_f64(cfg.beta2),
        epsilon: T::from_f64(cfg.epsilon),
    };
    let mut adam = AdamState::new(adam_cfg, model.params());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut savepoints = Vec::new();
    let score = |model: &TranslationModel<T>| -> Result<Option<HeldoutScores>> {
        match (heldout, &heldout_encoded) {
            (Some(h), Some(enc)) => Ok(Some(score_heldout(model, h, enc)?)),
            _ => Ok(None),
        }
    };
    savepoints.push(Savepoint::from_model(model, &cfg.model_id, 0, score(model)?));

    let mut batches_done: u64 = 0;
    let mut last_saved: u64 = 0;
    'training: while batches_done < cfg.max_batches {
        // Bucket by source length inside shuffled windows, so batches hold
        // similar lengths while epoch order still varies.
        let mut order: Vec<usize> = (0..encoded.len()).collect();
        order.shuffle(&mut rng);
        let window = cfg.batch_size * 10;
        for chunk in order.chunks_mut(window) {
            chunk.sort_by_key(|&i| encoded[i].0.len());
        }
        for batch_idx in order.chunks(cfg.batch_size) {
            let batch: Vec<(Vec<String>, Vec<u32>)> =
                batch_idx.iter().map(|&i| encoded[i].clone()).collect();
            model.params_mut().zero_grads();
            let mut tape = Tape::new();
            let (loss, _) = model.build_batch_loss(&mut tape, &batch, Some(&mut rng))?;
            let loss_value = tape.value(loss).item().as_f64();
            if !loss_value.is_finite() {
                return Err(Error::Pipeline(format!(
                    "non-finite loss {loss_value} at batch {} (batch size {}, first source: {:?})",
                    batches_done + 1,
                    batch.len(),
                    batch[0].0.join(" ")
                )));
            }
            tape.backward(loss, model.params_mut())?;
            adam.step(model.params_mut())?;
            batches_done += 1;
            if batches_done % cfg.savepoint_interval == 0 {
                savepoints.push(Savepoint::from_model(model, &cfg.model_id, batches_done, score(model)?));
                last_saved = batches_done;
            }
            if batches_done >= cfg.max_batches {
                break 'training;
            }
        }
    }
    if batches_done > 0 && last_saved != batches_done {
        savepoints.push(Savepoint::from_model(model, &cfg.model_id, batches_done, score(model)?));
    }
    Ok(savepoints)
}

/// Cross-entropy plus greedy-decode BLEU and chrF3 on the heldout set.
fn score_heldout<T: Element>(
    model: &TranslationModel<T>,
    heldout: &ParallelCorpus,
    encoded: &[(Vec<String>, Vec<u32>)],
) -> Result<HeldoutScores> {
    let mut total_nll = 0.0f64;
    let mut total_tokens = 0usize;
    for chunk in encoded.chunks(32) {
        let mut tape = Tape::new();
        let (loss, tokens) = model.build_batch_loss(&mut tape, chunk, None)?;
        total_nll += tape.value(loss).item().as_f64() * tokens as f64;
        total_tokens += tokens;
    }
    let cross_entropy = total_nll / total_tokens.max(1) as f64;

    let mut hyps = Vec::with_capacity(heldout.pairs.len());
    let mut refs = Vec::with_capacity(heldout.pairs.len());
    for (src, trg) in &heldout.pairs {
        hyps.push(model.translate_greedy(src)?);
        refs.push(trg.clone());
    }
    let bleu = metrics::bleu(&hyps, &refs, true, 4)?.corpus;
    let chrf3 = metrics::chrf3(&hyps, &refs, 6, 3.0)?.corpus;
    Ok(HeldoutScores { cross_entropy, bleu, chrf3 })
}
