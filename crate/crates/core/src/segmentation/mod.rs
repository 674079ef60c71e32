//! Text pipeline: normalization, tokenization, truecasing, contraction
//! expansion, byte-pair encoding, detokenization, and hyphen
//! retokenization. All operations are pure functions over immutable
//! models and parallelize freely across sentences.

mod bpe;
mod contractions;
mod hyphen;
mod normalize;
mod tokenize;
mod truecase;

pub use bpe::{bpe_join, BpeModel, CONTINUATION, END_OF_WORD};
pub use contractions::ContractionTable;
pub use hyphen::{
    hyphen_retokenize, hyphen_variants, retokenize_sentence, RetokenizeOutcome,
    MAX_COMBINATORIAL_HYPHENS,
};
pub use normalize::normalize;
pub use tokenize::{detokenize, tokenize};
pub use truecase::{detruecase, TruecaseModel};
