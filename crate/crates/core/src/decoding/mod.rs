//! Beam search with length/coverage/overtranslation penalties, ensembling,
//! n-best extraction, forward-backward reranking, and an exhaustive-search
//! test oracle.

mod beam;
mod ensemble;
mod nbest;
mod penalties;
mod rerank;

pub use beam::{beam_search, exhaustive_search};
pub use ensemble::{
    average_distributions, build_ensemble_models, ensemble_decoder, EnsembleDecoder, EnsembleSpec,
};
pub use nbest::{read_nbest, write_nbest};
pub use penalties::{apply_penalties, penalty_grid_search, PenaltyConfig};
pub use rerank::{fb_rerank, rerank_corpus, Provenance, ProvenanceCounts, RerankChoice};

/// Anything beam search can drive: a single model or an ensemble.
///
/// `step` consumes the previously emitted symbol (`None` on the first call,
/// where the model feeds its own start symbol) and returns the probability
/// distribution over the next target symbol, the attention weights over
/// source positions for this step, and the successor state. The returned
/// state does not depend on which candidate the search then picks; the pick
/// becomes `prev` of the next call.
pub trait StepModel {
    type State: Clone;

    fn start(&self) -> Self::State;
    fn vocab_size(&self) -> usize;
    fn eos_id(&self) -> u32;
    fn step(&self, state: &Self::State, prev: Option<u32>) -> (Vec<f64>, Vec<f64>, Self::State);
}

/// A finished translation hypothesis.
///
/// `log_prob` sums the log-probability of every emitted symbol, including
/// the terminating EOS event when there was one; hypotheses cut off at the
/// length limit carry no EOS factor. `attention` holds one row (over source
/// positions) per scored step.
#[derive(Clone, Debug)]
pub struct Hypothesis {
    pub symbols: Vec<u32>,
    pub log_prob: f64,
    pub attention: Vec<Vec<f64>>,
    pub finished: bool,
}

/// A hypothesis with its rendered surface and penalty-adjusted final score.
#[derive(Clone, Debug)]
pub struct ScoredHypothesis {
    pub symbols: Vec<u32>,
    pub surface: String,
    pub log_prob: f64,
    pub score: f64,
}

/// Ranked unique-surface hypotheses for one sentence.
#[derive(Clone, Debug, Default)]
pub struct NBestList {
    pub sentence_id: usize,
    pub hypotheses: Vec<ScoredHypothesis>,
}

impl NBestList {
    pub fn best(&self) -> Option<&ScoredHypothesis> {
        self.hypotheses.first()
    }
}
