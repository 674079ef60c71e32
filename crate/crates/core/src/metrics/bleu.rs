//! Corpus BLEU with modified n-gram precision and brevity penalty.

use std::collections::HashMap;

use super::{metric_tokenize, MetricDetail, MetricReport};
use crate::error::{Error, Result};

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u64> {
    let mut counts: HashMap<&[String], u64> = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped matches and hypothesis totals for one sentence pair and order.
fn matches(hyp: &[String], reference: &[String], n: usize) -> (u64, u64) {
    let hyp_counts = ngram_counts(hyp, n);
    let ref_counts = ngram_counts(reference, n);
    let mut matched = 0;
    let mut total = 0;
    for (gram, &count) in &hyp_counts {
        total += count;
        matched += count.min(ref_counts.get(gram).copied().unwrap_or(0));
    }
    (matched, total)
}

fn combine(precisions: &[(u64, u64)], hyp_len: u64, ref_len: u64) -> (f64, f64) {
    // Orders with no hypothesis n-grams at all are excluded from the
    // geometric mean; any included order with zero matches gives 0.
    let mut log_sum = 0.0f64;
    let mut orders = 0usize;
    let mut zero = false;
    for &(matched, total) in precisions {
        if total == 0 {
            continue;
        }
        orders += 1;
        if matched == 0 {
            zero = true;
        } else {
            log_sum += (matched as f64 / total as f64).ln();
        }
    }
    let brevity_penalty = if hyp_len == 0 || ref_len == 0 {
        0.0
    } else if hyp_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    let score = if zero || orders == 0 || hyp_len == 0 {
        0.0
    } else {
        brevity_penalty * (log_sum / orders as f64).exp()
    };
    (score, brevity_penalty)
}

/// Corpus BLEU over aligned hypothesis/reference lines, with per-sentence
/// scores computed by the same formula.
pub fn bleu(hypotheses: &[String], references: &[String], lowercase: bool, max_n: usize) -> Result<MetricReport> {
    if hypotheses.len() != references.len() {
        return Err(Error::contract(format!(
            "{} hypotheses but {} references",
            hypotheses.len(),
            references.len()
        )));
    }
    if max_n == 0 {
        return Err(Error::parameter("max_n must be at least 1"));
    }
    let mut corpus_counts = vec![(0u64, 0u64); max_n];
    let mut hyp_len = 0u64;
    let mut ref_len = 0u64;
    let mut per_sentence = Vec::with_capacity(hypotheses.len());
    for (h, r) in hypotheses.iter().zip(references) {
        let ht = metric_tokenize(h, lowercase);
        let rt = metric_tokenize(r, lowercase);
        let mut sentence_counts = vec![(0u64, 0u64); max_n];
        for n in 1..=max_n {
            let (m, t) = matches(&ht, &rt, n);
            sentence_counts[n - 1] = (m, t);
            corpus_counts[n - 1].0 += m;
            corpus_counts[n - 1].1 += t;
        }
        hyp_len += ht.len() as u64;
        ref_len += rt.len() as u64;
        per_sentence.push(combine(&sentence_counts, ht.len() as u64, rt.len() as u64).0);
    }
    let (corpus, brevity_penalty) = combine(&corpus_counts, hyp_len, ref_len);
    Ok(MetricReport {
        corpus,
        per_sentence,
        detail: MetricDetail::Bleu { precisions: corpus_counts, hyp_len, ref_len, brevity_penalty },
    })
}
