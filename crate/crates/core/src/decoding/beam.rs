//! Beam search and the exhaustive enumeration oracle it is checked against.

use super::penalties::{apply_penalties, PenaltyConfig};
use super::{Hypothesis, NBestList, ScoredHypothesis, StepModel};
use crate::error::{Error, Result};

struct LiveHypothesis<S> {
    symbols: Vec<u32>,
    log_prob: f64,
    attention: Vec<Vec<f64>>,
    state: S,
}

/// Breadth-limited best-first search over target sequences.
///
/// Hypotheses finish by emitting EOS or by reaching `max_len` symbols;
/// finished hypotheses are ranked by their penalty-adjusted score, surface
/// duplicates collapse to the best-scoring instance, and the top `nbest`
/// survive. Deterministic: ties break toward the lexicographically smaller
/// symbol sequence. With `beam_size >= |V|^max_len` the search is
/// exhaustive, and with `beam_size = 1` it is greedy decoding.
pub fn beam_search<M: StepModel>(
    model: &M,
    beam_size: usize,
    max_len: usize,
    penalties: &PenaltyConfig,
    nbest: usize,
    sentence_id: usize,
    render: &dyn Fn(&[u32]) -> String,
) -> Result<NBestList> {
    if beam_size == 0 {
        return Err(Error::parameter("beam_size must be at least 1"));
    }
    if max_len == 0 {
        return Err(Error::parameter("max_len must be at least 1"));
    }
    penalties.validate()?;
    let eos = model.eos_id();
    let mut live = vec![LiveHypothesis {
        symbols: Vec::new(),
        log_prob: 0.0,
        attention: Vec::new(),
        state: model.start(),
    }];
    let mut finished: Vec<Hypothesis> = Vec::new();

    for _ in 0..max_len {
        // EOS terminations compete with continuations for the beam slots,
        // so beam 1 reduces to greedy decoding and a full-width beam never
        // prunes. Slots rank by raw log-probability; penalties apply to the
        // final ranking only.
        let mut candidates: Vec<(LiveHypothesis<M::State>, bool)> = Vec::new();
        for hyp in &live {
            let prev = hyp.symbols.last().copied();
            let (probs, weights, next_state) = model.step(&hyp.state, prev);
            debug_assert_eq!(probs.len(), model.vocab_size());
            for (sym, &p) in probs.iter().enumerate() {
                if p <= 0.0 {
                    continue;
                }
                let log_prob = hyp.log_prob + p.ln();
                let mut attention = hyp.attention.clone();
                attention.push(weights.clone());
                let is_eos = sym as u32 == eos;
                let mut symbols = hyp.symbols.clone();
                if !is_eos {
                    symbols.push(sym as u32);
                }
                candidates.push((
                    LiveHypothesis { symbols, log_prob, attention, state: next_state.clone() },
                    is_eos,
                ));
            }
        }
        candidates.sort_by(|(a, a_eos), (b, b_eos)| {
            b.log_prob
                .partial_cmp(&a.log_prob)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.symbols.cmp(&b.symbols))
                .then_with(|| b_eos.cmp(a_eos))
        });
        candidates.truncate(beam_size);
        live = Vec::new();
        for (hyp, is_eos) in candidates {
            if is_eos {
                finished.push(Hypothesis {
                    symbols: hyp.symbols,
                    log_prob: hyp.log_prob,
                    attention: hyp.attention,
                    finished: true,
                });
            } else {
                live.push(hyp);
            }
        }
        if live.is_empty() {
            break;
        }
    }
    // Hypotheses cut off at the length limit carry no EOS factor.
    for hyp in live {
        finished.push(Hypothesis {
            symbols: hyp.symbols,
            log_prob: hyp.log_prob,
            attention: hyp.attention,
            finished: true,
        });
    }
    rank(finished, penalties, nbest, sentence_id, render)
}

/// Scores, deduplicates by surface, sorts, and truncates.
fn rank(
    finished: Vec<Hypothesis>,
    penalties: &PenaltyConfig,
    nbest: usize,
    sentence_id: usize,
    render: &dyn Fn(&[u32]) -> String,
) -> Result<NBestList> {
    let mut scored: Vec<ScoredHypothesis> = Vec::with_capacity(finished.len());
    for hyp in finished {
        let score = apply_penalties(&hyp, penalties)?;
        scored.push(ScoredHypothesis {
            surface: render(&hyp.symbols),
            symbols: hyp.symbols,
            log_prob: hyp.log_prob,
            score,
        });
    }
    scored.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.symbols.cmp(&b.symbols))
    });
    let mut seen = std::collections::HashSet::new();
    scored.retain(|h| seen.insert(h.surface.clone()));
    scored.truncate(nbest);
    Ok(NBestList { sentence_id, hypotheses: scored })
}

/// Enumerates every terminated sequence of up to `max_len` symbols and
/// returns the penalty-scored argmax plus the number of sequences scored.
/// Test oracle for [`beam_search`]; refuses search spaces beyond 10^6.
pub fn exhaustive_search<M: StepModel>(
    model: &M,
    max_len: usize,
    penalties: &PenaltyConfig,
    sentence_id: usize,
    render: &dyn Fn(&[u32]) -> String,
) -> Result<(NBestList, usize)> {
    let space = (model.vocab_size() as f64).powi(max_len as i32);
    if space > 1e6 {
        return Err(Error::parameter(format!(
            "search space {space:.0} exceeds the exhaustive cap of 1e6"
        )));
    }
    penalties.validate()?;
    let mut finished: Vec<Hypothesis> = Vec::new();
    let mut stack = vec![LiveHypothesis {
        symbols: Vec::new(),
        log_prob: 0.0,
        attention: Vec::new(),
        state: model.start(),
    }];
    let eos = model.eos_id();
    while let Some(hyp) = stack.pop() {
        if hyp.symbols.len() == max_len {
            finished.push(Hypothesis {
                symbols: hyp.symbols,
                log_prob: hyp.log_prob,
                attention: hyp.attention,
                finished: true,
            });
            continue;
        }
        let prev = hyp.symbols.last().copied();
        let (probs, weights, next_state) = model.step(&hyp.state, prev);
        for (sym, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let log_prob = hyp.log_prob + p.ln();
            let mut attention = hyp.attention.clone();
            attention.push(weights.clone());
            if sym as u32 == eos {
                finished.push(Hypothesis {
                    symbols: hyp.symbols.clone(),
                    log_prob,
                    attention,
                    finished: true,
                });
            } else {
                let mut symbols = hyp.symbols.clone();
                symbols.push(sym as u32);
                stack.push(LiveHypothesis { symbols, log_prob, attention, state: next_state.clone() });
            }
        }
    }
    let count = finished.len();
    let list = rank(finished, penalties, usize::MAX, sentence_id, render)?;
    Ok((list, count))
}
