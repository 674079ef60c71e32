//! Pre-translation concatenation: appending a suffix-marked machine
//! translation to the encoder input so attention can consult both.

use crate::error::{Error, Result};

/// Default marker suffix. U+2581 is rewritten by the normalizer, so the
/// marker cannot occur in natural text.
pub const PRETRANSLATION_MARKER: &str = "\u{2581}PT";

/// Extends the source with the pre-translation, every appended token
/// carrying the marker suffix. Reversible by [`pretranslate_strip`].
pub fn pretranslate_concat(
    source: &[String],
    pretranslation: &[String],
    marker: &str,
) -> Result<Vec<String>> {
    if source.is_empty() || pretranslation.is_empty() {
        return Err(Error::contract("pre-translation concat needs nonempty source and pre-translation"));
    }
    if marker.is_empty() {
        return Err(Error::parameter("pre-translation marker must be nonempty"));
    }
    if let Some(bad) = source.iter().chain(pretranslation).find(|t| t.ends_with(marker)) {
        return Err(Error::Ingestion {
            line: None,
            detail: format!("token {bad:?} already ends with the marker suffix {marker:?}"),
        });
    }
    let mut out = source.to_vec();
    out.extend(pretranslation.iter().map(|t| format!("{t}{marker}")));
    Ok(out)
}

/// Splits an extended source back into its parts, stripping the marker.
pub fn pretranslate_strip(extended: &[String], marker: &str) -> Result<(Vec<String>, Vec<String>)> {
    let boundary = extended
        .iter()
        .position(|t| t.ends_with(marker))
        .ok_or_else(|| Error::contract("no marked pre-translation tokens found"))?;
    let source = extended[..boundary].to_vec();
    let mut pretranslation = Vec::with_capacity(extended.len() - boundary);
    for t in &extended[boundary..] {
        let stripped = t.strip_suffix(marker).ok_or_else(|| {
            Error::contract(format!("unmarked token {t:?} inside the pre-translated region"))
        })?;
        pretranslation.push(stripped.to_string());
    }
    Ok((source, pretranslation))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn construction_appends_marked_tokens() {
        let out = pretranslate_concat(&toks(&["a", "b"]), &toks(&["x"]), PRETRANSLATION_MARKER).unwrap();
        assert_eq!(out, toks(&["a", "b", "x\u{2581}PT"]));
    }

    #[test]
    fn strip_recovers_both_parts() {
        let source = toks(&["a", "b", "c"]);
        let pt = toks(&["x", "y"]);
        let extended = pretranslate_concat(&source, &pt, PRETRANSLATION_MARKER).unwrap();
        let (s, p) = pretranslate_strip(&extended, PRETRANSLATION_MARKER).unwrap();
        assert_eq!(s, source);
        assert_eq!(p, pt);
    }

    #[test]
    fn marker_collision_is_an_ingestion_error() {
        let out = pretranslate_concat(&toks(&["a\u{2581}PT"]), &toks(&["x"]), PRETRANSLATION_MARKER);
        assert!(matches!(out, Err(Error::Ingestion { .. })));
    }

    #[test]
    fn empty_sides_are_contract_errors() {
        assert!(pretranslate_concat(&[], &toks(&["x"]), PRETRANSLATION_MARKER).is_err());
        assert!(pretranslate_concat(&toks(&["a"]), &[], PRETRANSLATION_MARKER).is_err());
    }
}
