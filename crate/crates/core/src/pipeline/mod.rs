//! End-to-end orchestration: corpus ingestion, data-mixing regimes,
//! backtranslation, pre-translation concatenation, and run configuration.

mod backtranslate;
mod config;
mod mix;
mod pretranslate;

pub use backtranslate::{backtranslate, BacktranslationReport};
pub use config::RunConfig;
pub use mix::{mix, DataMix, MixRegime};
pub use pretranslate::{pretranslate_concat, pretranslate_strip, PRETRANSLATION_MARKER};

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{ParallelCorpus, TranslationModel, Vocabulary, VocabLevel};

/// Reads a line-per-sentence UTF-8 corpus. Invalid UTF-8 is an ingestion
/// error reporting the byte offset.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Ingestion {
        line: None,
        detail: format!(
            "{} is not valid UTF-8 at byte offset {}",
            path.display(),
            e.utf8_error().valid_up_to()
        ),
    })?;
    Ok(text.lines().map(|l| l.to_string()).collect())
}

pub fn write_lines(path: &Path, lines: &[String]) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for line in lines {
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Builds vocabularies from the training corpus and instantiates a fresh
/// model per the run configuration.
pub fn build_model(cfg: &RunConfig, corpus: &ParallelCorpus) -> Result<TranslationModel<f32>> {
    if corpus.is_empty() {
        return Err(Error::contract("cannot build vocabularies from an empty corpus"));
    }
    let source_vocab = Vocabulary::build(
        VocabLevel::Word,
        corpus.pairs.iter().flat_map(|(src, _)| src.iter()),
        Some(cfg.source_vocab_size),
    );
    let char_vocab = Vocabulary::build(
        VocabLevel::Char,
        corpus
            .pairs
            .iter()
            .flat_map(|(src, _)| src.iter())
            .flat_map(|t| t.chars())
            .map(|c| c.to_string()),
        None,
    );
    let model_config = cfg.model_config();
    let target_vocab = Vocabulary::build(
        model_config.decoder_level,
        corpus.pairs.iter().flat_map(|(_, trg)| model_config.decoder_level.split(trg)),
        Some(cfg.target_vocab_size),
    );
    TranslationModel::new(model_config, source_vocab, char_vocab, target_vocab, cfg.seed)
}
