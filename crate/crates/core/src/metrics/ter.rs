//! Translation edit rate: word-level edits plus greedy block shifts.

use super::{metric_tokenize, MetricDetail, MetricReport};
use crate::error::{Error, Result};

const MAX_SHIFT_BLOCK: usize = 10;

fn levenshtein(a: &[String], b: &[String]) -> u64 {
    let mut prev: Vec<u64> = (0..=b.len() as u64).collect();
    let mut cur = vec![0u64; b.len() + 1];
    for (i, aw) in a.iter().enumerate() {
        cur[0] = i as u64 + 1;
        for (j, bw) in b.iter().enumerate() {
            let sub = prev[j] + u64::from(aw != bw);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn contains_block(reference: &[String], block: &[String]) -> bool {
    reference.len() >= block.len() && reference.windows(block.len()).any(|w| w == block)
}

fn apply_shift(words: &[String], start: usize, len: usize, to: usize) -> Vec<String> {
    let mut rest: Vec<String> = Vec::with_capacity(words.len());
    rest.extend_from_slice(&words[..start]);
    rest.extend_from_slice(&words[start + len..]);
    let mut out = Vec::with_capacity(words.len());
    out.extend_from_slice(&rest[..to]);
    out.extend_from_slice(&words[start..start + len]);
    out.extend_from_slice(&rest[to..]);
    out
}

/// Greedy best-first shifting: repeatedly apply the shift that most
/// reduces the edit distance (first such shift in scan order on ties),
/// each shift costing one edit, until no shift helps. Only blocks that
/// occur verbatim in the reference may move.
fn ter_sentence(hyp: &[String], reference: &[String]) -> (u64, u64) {
    let mut words = hyp.to_vec();
    let mut shifts = 0u64;
    let mut distance = levenshtein(&words, reference);
    loop {
        let mut best: Option<(u64, Vec<String>)> = None;
        for start in 0..words.len() {
            for len in 1..=MAX_SHIFT_BLOCK.min(words.len() - start) {
                let block = &words[start..start + len];
                if !contains_block(reference, block) {
                    continue;
                }
                for to in 0..=(words.len() - len) {
                    if to == start {
                        continue;
                    }
                    let shifted = apply_shift(&words, start, len, to);
                    let d = levenshtein(&shifted, reference);
                    if d < distance && best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                        best = Some((d, shifted));
                    }
                }
            }
        }
        match best {
            Some((d, shifted)) => {
                words = shifted;
                distance = d;
                shifts += 1;
            }
            None => break,
        }
    }
    (shifts + distance, shifts)
}

/// Corpus TER: total edits over total reference words. Hypotheses and
/// references are tokenized with the lowercasing metric tokenizer.
pub fn ter(hypotheses: &[String], references: &[String]) -> Result<MetricReport> {
    if hypotheses.len() != references.len() {
        return Err(Error::contract(format!(
            "{} hypotheses but {} references",
            hypotheses.len(),
            references.len()
        )));
    }
    let mut total_edits = 0u64;
    let mut total_shifts = 0u64;
    let mut total_ref_words = 0u64;
    let mut per_sentence = Vec::with_capacity(hypotheses.len());
    for (i, (h, r)) in hypotheses.iter().zip(references).enumerate() {
        let hyp = metric_tokenize(h, true);
        let reference = metric_tokenize(r, true);
        if reference.is_empty() {
            return Err(Error::contract(format!("reference sentence {} is empty", i + 1)));
        }
        let (edits, shifts) = ter_sentence(&hyp, &reference);
        per_sentence.push(edits as f64 / reference.len() as f64);
        total_edits += edits;
        total_shifts += shifts;
        total_ref_words += reference.len() as u64;
    }
    Ok(MetricReport {
        corpus: total_edits as f64 / total_ref_words as f64,
        per_sentence,
        detail: MetricDetail::Ter { edits: total_edits, shifts: total_shifts, ref_words: total_ref_words },
    })
}
