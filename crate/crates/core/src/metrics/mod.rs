//! Internal evaluation metrics: lowercased BLEU, chrF3, and TER.
//!
//! These are the scores used for heldout selection and development
//! comparisons; they are self-contained and not calibrated against any
//! external scorer.

mod bleu;
mod chrf;
mod ter;

pub use bleu::bleu;
pub use chrf::chrf3;
pub use ter::ter;

/// Corpus score plus the per-sentence scores and the components the corpus
/// score is derived from.
#[derive(Clone, Debug)]
pub struct MetricReport {
    /// BLEU and chrF3 lie in [0, 1]; TER is >= 0 and may exceed 1.
    pub corpus: f64,
    pub per_sentence: Vec<f64>,
    pub detail: MetricDetail,
}

#[derive(Clone, Debug)]
pub enum MetricDetail {
    Bleu {
        /// Clipped match and total counts per n-gram order.
        precisions: Vec<(u64, u64)>,
        hyp_len: u64,
        ref_len: u64,
        brevity_penalty: f64,
    },
    Chrf {
        precision: f64,
        recall: f64,
        /// (matched, hypothesis total, reference total) per order.
        per_order: Vec<(u64, u64, u64)>,
    },
    Ter {
        edits: u64,
        shifts: u64,
        ref_words: u64,
    },
}

/// Metric tokenizer: lowercases (optionally) and splits on whitespace and
/// punctuation boundaries. Runs of alphanumeric characters form tokens;
/// every other non-space character is a token of its own.
pub fn metric_tokenize(line: &str, lowercase: bool) -> Vec<String> {
    let line = if lowercase { line.to_lowercase() } else { line.to_string() };
    let mut tokens = Vec::new();
    let mut word = String::new();
    for ch in line.chars() {
        if ch.is_alphanumeric() {
            word.push(ch);
        } else {
            if !word.is_empty() {
                tokens.push(std::mem::take(&mut word));
            }
            if !ch.is_whitespace() {
                tokens.push(ch.to_string());
            }
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}
