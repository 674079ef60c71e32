//! Synthetic parallel data from a reverse translation model.

use crate::error::Result;
use crate::model::TranslationModel;
use crate::tensor::Element;

/// Summary of one backtranslation run; the provenance fields end up in the
/// sidecar metadata written next to the synthetic corpus.
#[derive(Clone, Debug)]
pub struct BacktranslationReport {
    pub model_label: String,
    pub requested: usize,
    pub translated: usize,
    /// 1-based indices of input lines that failed to translate.
    pub skipped: Vec<usize>,
}

/// Translates a monolingual target-side corpus with a reverse
/// (target-to-source) model, yielding aligned (synthetic source, original
/// target) pairs. Lines that fail to translate are skipped and logged.
pub fn backtranslate<T: Element>(
    reverse_model: &TranslationModel<T>,
    monolingual_target: &[String],
    label: &str,
) -> Result<(Vec<(String, String)>, BacktranslationReport)> {
    let mut pairs = Vec::with_capacity(monolingual_target.len());
    let mut skipped = Vec::new();
    for (i, line) in monolingual_target.iter().enumerate() {
        let tokens: Vec<String> = line.split_whitespace().map(|t| t.to_string()).collect();
        if tokens.is_empty() {
            log::warn!("backtranslation skipping empty line {}", i + 1);
            skipped.push(i + 1);
            continue;
        }
        match reverse_model.translate_greedy(&tokens) {
            Ok(synthetic_source) => pairs.push((synthetic_source, line.clone())),
            Err(e) => {
                log::warn!("backtranslation failed on line {}: {e}", i + 1);
                skipped.push(i + 1);
            }
        }
    }
    let report = BacktranslationReport {
        model_label: label.to_string(),
        requested: monolingual_target.len(),
        translated: pairs.len(),
        skipped,
    };
    Ok((pairs, report))
}
