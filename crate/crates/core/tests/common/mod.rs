//! Shared fixtures for the integration and acceptance suites.

use hnmt::decoding::StepModel;
use hnmt::model::{
    Direction, ModelConfig, ParallelCorpus, TrainConfig, TranslationModel, VocabLevel, Vocabulary,
};
use rand::prelude::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Alphabet for the copy task: `t00` .. `t19`.
pub fn copy_alphabet(size: usize) -> Vec<String> {
    (0..size).map(|i| format!("t{i:02}")).collect()
}

/// Sentence-copy corpus: the target equals the source. Lengths are
/// uniform in `1..=max_len`.
pub fn copy_corpus(pairs: usize, vocab: usize, max_len: usize, seed: u64) -> ParallelCorpus {
    let alphabet = copy_alphabet(vocab);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lines: Vec<String> = (0..pairs)
        .map(|_| {
            let n = rng.random_range(1..=max_len);
            (0..n)
                .map(|_| alphabet.choose(&mut rng).expect("nonempty").clone())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    ParallelCorpus::from_lines(&lines, &lines).expect("aligned by construction")
}

/// Word-level model sized for the copy task.
pub fn copy_task_model(
    corpus: &ParallelCorpus,
    direction: Direction,
    seed: u64,
) -> TranslationModel<f32> {
    let config = ModelConfig {
        word_embed_dim: 32,
        char_embed_dim: 8,
        encoder_state_dim: 32,
        decoder_state_dim: 64,
        attention_dim: 32,
        decoder_level: VocabLevel::Word,
        direction,
        ..ModelConfig::default()
    };
    let source_vocab = Vocabulary::build(
        VocabLevel::Word,
        corpus.pairs.iter().flat_map(|(src, _)| src.iter()),
        None,
    );
    let char_vocab = Vocabulary::build(
        VocabLevel::Char,
        corpus
            .pairs
            .iter()
            .flat_map(|(src, _)| src.iter())
            .flat_map(|t| t.chars().map(|c| c.to_string())),
        None,
    );
    let target_vocab = Vocabulary::build(
        VocabLevel::Word,
        corpus.pairs.iter().flat_map(|(_, trg)| trg.split_whitespace()),
        None,
    );
    TranslationModel::new(config, source_vocab, char_vocab, target_vocab, seed)
        .expect("copy-task model construction")
}

pub fn copy_train_config(seed: u64, max_batches: u64) -> TrainConfig {
    TrainConfig {
        model_id: format!("copy{seed}"),
        batch_size: 8,
        max_batches,
        savepoint_interval: 100_000,
        learning_rate: 2e-3,
        seed,
        ..TrainConfig::default()
    }
}

/// Greedy-decode token accuracy: positional matches over the longer of
/// hypothesis and reference.
pub fn token_accuracy(model: &TranslationModel<f32>, heldout: &ParallelCorpus) -> f64 {
    let mut correct = 0usize;
    let mut total = 0usize;
    for (src, trg) in &heldout.pairs {
        let hyp = model.translate_greedy(src).expect("decode");
        let hyp_tokens: Vec<&str> = hyp.split_whitespace().collect();
        let ref_tokens: Vec<&str> = trg.split_whitespace().collect();
        total += hyp_tokens.len().max(ref_tokens.len());
        correct += hyp_tokens.iter().zip(&ref_tokens).filter(|(h, r)| h == r).count();
    }
    correct as f64 / total.max(1) as f64
}

/// Teacher-forced mean per-token cross-entropy of a proper ensemble, in
/// nats. Member step distributions average in probability space.
pub fn ensemble_cross_entropy(models: &[&TranslationModel<f32>], dev: &ParallelCorpus) -> f64 {
    let mut total_nll = 0.0f64;
    let mut tokens = 0usize;
    for (src, trg) in &dev.pairs {
        let decoders: Vec<_> = models.iter().map(|m| m.decoder(src).expect("encode")).collect();
        let mut states: Vec<_> = decoders.iter().map(|d| d.start()).collect();
        let mut prev: Option<u32> = None;
        for &gold in &models[0].encode_target_line(trg) {
            let mut p_sum = 0.0f64;
            for (d, s) in decoders.iter().zip(states.iter_mut()) {
                let (probs, _, next) = d.step(s, prev);
                p_sum += probs[gold as usize];
                *s = next;
            }
            let p = p_sum / decoders.len() as f64;
            total_nll -= p.max(f64::MIN_POSITIVE).ln();
            tokens += 1;
            prev = Some(gold);
        }
    }
    total_nll / tokens.max(1) as f64
}

/// Deterministic hash-based toy step model over `vocab` symbols; symbol 0
/// is EOS and every prefix has its own next-symbol distribution.
pub struct HashToyModel {
    pub vocab: usize,
    pub seed: u64,
    pub src_len: usize,
}

impl HashToyModel {
    fn dist(&self, prefix: &[u32]) -> Vec<f64> {
        let mut h = self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        for &s in prefix {
            h = h.wrapping_add(s as u64 + 1).wrapping_mul(0x100_0000_01b3);
        }
        let mut weights: Vec<f64> = (0..self.vocab)
            .map(|k| {
                let mut x = h.wrapping_add((k as u64 + 7).wrapping_mul(0x2545_f491_4f6c_dd1d));
                x ^= x >> 33;
                x = x.wrapping_mul(0xff51_afd7_ed55_8ccd);
                x ^= x >> 29;
                ((x % 1000) + 1) as f64
            })
            .collect();
        let sum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= sum;
        }
        weights
    }

    fn attention(&self, prefix: &[u32]) -> Vec<f64> {
        // Prefix-dependent but normalized rows.
        let mut h = self.seed.wrapping_add(prefix.len() as u64 * 7919);
        let mut row: Vec<f64> = (0..self.src_len)
            .map(|j| {
                h = h.wrapping_mul(6364136223846793005).wrapping_add(j as u64);
                ((h >> 33) % 97 + 1) as f64
            })
            .collect();
        let sum: f64 = row.iter().sum();
        for w in &mut row {
            *w /= sum;
        }
        row
    }
}

impl StepModel for HashToyModel {
    type State = Vec<u32>;

    fn start(&self) -> Vec<u32> {
        Vec::new()
    }

    fn vocab_size(&self) -> usize {
        self.vocab
    }

    fn eos_id(&self) -> u32 {
        0
    }

    fn step(&self, state: &Vec<u32>, prev: Option<u32>) -> (Vec<f64>, Vec<f64>, Vec<u32>) {
        let mut next = state.clone();
        if let Some(p) = prev {
            next.push(p);
        }
        (self.dist(&next), self.attention(&next), next)
    }
}

/// Renders toy symbols as space-joined ids.
pub fn render_ids(symbols: &[u32]) -> String {
    symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

/// Copy task with intrinsic uncertainty: the target is the source plus one
/// final token drawn uniformly from two markers. A model can at best
/// assign 0.5 to each marker, so per-token estimation noise stays visible
/// and ensemble averaging has something to cancel.
pub fn ambiguous_copy_corpus(pairs: usize, vocab: usize, max_len: usize, seed: u64) -> ParallelCorpus {
    let alphabet = copy_alphabet(vocab);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut src_lines = Vec::with_capacity(pairs);
    let mut trg_lines = Vec::with_capacity(pairs);
    for _ in 0..pairs {
        let n = rng.random_range(1..=max_len);
        let tokens: Vec<String> =
            (0..n).map(|_| alphabet.choose(&mut rng).expect("nonempty").clone()).collect();
        // Exactly balanced markers: the only signal a model can learn for
        // the final token is 50/50, so residual deviations are pure
        // estimation noise.
        let marker = if src_lines.len() % 2 == 0 { "xa" } else { "xb" };
        src_lines.push(tokens.join(" "));
        trg_lines.push(format!("{} {marker}", tokens.join(" ")));
    }
    ParallelCorpus::from_lines(&src_lines, &trg_lines).expect("aligned by construction")
}

/// Smaller, faster model for the trend criteria.
pub fn trend_model(corpus: &ParallelCorpus, seed: u64) -> TranslationModel<f32> {
    let config = ModelConfig {
        word_embed_dim: 16,
        char_embed_dim: 8,
        encoder_state_dim: 16,
        decoder_state_dim: 32,
        attention_dim: 16,
        decoder_level: VocabLevel::Word,
        ..ModelConfig::default()
    };
    let source_vocab = Vocabulary::build(
        VocabLevel::Word,
        corpus.pairs.iter().flat_map(|(src, _)| src.iter()),
        None,
    );
    let char_vocab = Vocabulary::build(
        VocabLevel::Char,
        corpus
            .pairs
            .iter()
            .flat_map(|(src, _)| src.iter())
            .flat_map(|t| t.chars().map(|c| c.to_string())),
        None,
    );
    let target_vocab = Vocabulary::build(
        VocabLevel::Word,
        corpus.pairs.iter().flat_map(|(_, trg)| trg.split_whitespace()),
        None,
    );
    TranslationModel::new(config, source_vocab, char_vocab, target_vocab, seed)
        .expect("trend model construction")
}
