//! Forward-backward reranking of n-best lists.

use std::collections::HashMap;

use super::NBestList;
use crate::error::{Error, Result};

/// Which list(s) the chosen translation came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Both,
    Forward,
    Backward,
}

#[derive(Clone, Debug)]
pub struct RerankChoice {
    pub surface: String,
    /// Combined forward+backward log-probability when the intersection rule
    /// fired, otherwise the winning hypothesis's own log-probability.
    pub score: f64,
    pub provenance: Provenance,
}

/// Corpus-level provenance tallies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ProvenanceCounts {
    pub both: usize,
    pub forward: usize,
    pub backward: usize,
}

fn best_by_surface(list: &NBestList) -> HashMap<&str, f64> {
    let mut map: HashMap<&str, f64> = HashMap::new();
    for h in &list.hypotheses {
        map.entry(h.surface.as_str())
            .and_modify(|s| {
                if h.log_prob > *s {
                    *s = h.log_prob;
                }
            })
            .or_insert(h.log_prob);
    }
    map
}

/// Picks one translation from a forward and a backward n-best list.
///
/// If any surface string occurs in both lists, the winner is the shared
/// surface with the highest combined (forward + backward) log-probability;
/// combined scores tie toward the lexicographically smaller surface, so the
/// rule is symmetric in its two arguments. With disjoint lists the winner
/// is the globally most likely hypothesis under whichever model produced
/// it. Backward hypotheses must already be in surface order.
pub fn fb_rerank(forward: &NBestList, backward: &NBestList) -> Result<RerankChoice> {
    if forward.hypotheses.is_empty() && backward.hypotheses.is_empty() {
        return Err(Error::contract("both n-best lists are empty"));
    }
    let fwd = best_by_surface(forward);
    let bwd = best_by_surface(backward);

    let mut best_shared: Option<(&str, f64)> = None;
    for (&surface, &f_score) in &fwd {
        let Some(&b_score) = bwd.get(surface) else { continue };
        let combined = f_score + b_score;
        best_shared = match best_shared {
            None => Some((surface, combined)),
            Some((s, c)) if combined > c || (combined == c && surface < s) => {
                Some((surface, combined))
            }
            keep => keep,
        };
    }
    if let Some((surface, combined)) = best_shared {
        return Ok(RerankChoice {
            surface: surface.to_string(),
            score: combined,
            provenance: Provenance::Both,
        });
    }

    // Disjoint lists: highest likelihood under its own model; forward wins
    // exact ties.
    let f_best = forward.hypotheses.iter().map(|h| h.log_prob).fold(f64::NEG_INFINITY, f64::max);
    let b_best = backward.hypotheses.iter().map(|h| h.log_prob).fold(f64::NEG_INFINITY, f64::max);
    if f_best >= b_best {
        let h = forward
            .hypotheses
            .iter()
            .find(|h| h.log_prob == f_best)
            .expect("forward list nonempty when its max is finite");
        Ok(RerankChoice { surface: h.surface.clone(), score: f_best, provenance: Provenance::Forward })
    } else {
        let h = backward
            .hypotheses
            .iter()
            .find(|h| h.log_prob == b_best)
            .expect("backward list nonempty when its max is finite");
        Ok(RerankChoice { surface: h.surface.clone(), score: b_best, provenance: Provenance::Backward })
    }
}

/// Reranks aligned corpora of n-best lists and tallies provenance.
pub fn rerank_corpus(
    forward: &[NBestList],
    backward: &[NBestList],
) -> Result<(Vec<RerankChoice>, ProvenanceCounts)> {
    if forward.len() != backward.len() {
        return Err(Error::contract(format!(
            "forward and backward corpora differ in length: {} vs {}",
            forward.len(),
            backward.len()
        )));
    }
    let mut choices = Vec::with_capacity(forward.len());
    let mut counts = ProvenanceCounts::default();
    for (f, b) in forward.iter().zip(backward) {
        let choice = fb_rerank(f, b)?;
        match choice.provenance {
            Provenance::Both => counts.both += 1,
            Provenance::Forward => counts.forward += 1,
            Provenance::Backward => counts.backward += 1,
        }
        choices.push(choice);
    }
    Ok((choices, counts))
}
