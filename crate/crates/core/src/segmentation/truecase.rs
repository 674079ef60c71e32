//! Frequency-based truecasing.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Observed surface casings per lowercased token, counted at non-initial
/// sentence positions (where casing is not governed by the sentence start).
#[derive(Clone, Debug, Default)]
pub struct TruecaseModel {
    counts: HashMap<String, HashMap<String, u64>>,
}

impl TruecaseModel {
    /// Counts casings over a tokenized corpus.
    pub fn train<'a>(sentences: impl IntoIterator<Item = &'a [String]>) -> Self {
        let mut model = TruecaseModel::default();
        for sentence in sentences {
            for token in sentence.iter().skip(1) {
                if token.chars().any(|c| c.is_alphabetic()) {
                    *model
                        .counts
                        .entry(token.to_lowercase())
                        .or_default()
                        .entry(token.clone())
                        .or_insert(0) += 1;
                }
            }
        }
        model
    }

    /// Most frequent observed casing; ties break lexicographically.
    pub fn best_casing(&self, token: &str) -> Option<&str> {
        let surfaces = self.counts.get(&token.to_lowercase())?;
        surfaces
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(s, _)| s.as_str())
    }

    /// Maps the sentence-initial token to its most frequent corpus casing;
    /// unknown tokens are left unchanged.
    pub fn apply(&self, tokens: &[String]) -> Vec<String> {
        let mut out = tokens.to_vec();
        if let Some(first) = out.first_mut() {
            if let Some(best) = self.best_casing(first) {
                *first = best.to_string();
            }
        }
        out
    }

    /// `token count casing` lines, sorted for reproducibility.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut rows: Vec<(&String, &String, u64)> = Vec::new();
        for (lower, surfaces) in &self.counts {
            for (surface, &count) in surfaces {
                rows.push((lower, surface, count));
            }
        }
        rows.sort();
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for (lower, surface, count) in rows {
            writeln!(out, "{lower} {count} {surface}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut model = TruecaseModel::default();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(lower), Some(count), Some(surface), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(Error::format(
                    Some(lineno + 1),
                    format!("expected `token count casing`, got {line:?}"),
                ));
            };
            let count: u64 = count
                .parse()
                .map_err(|_| Error::format(Some(lineno + 1), format!("bad count {count:?}")))?;
            model
                .counts
                .entry(lower.to_string())
                .or_default()
                .insert(surface.to_string(), count);
        }
        Ok(model)
    }
}

/// Restores sentence-initial capitalization after translation.
pub fn detruecase(tokens: &[String]) -> Vec<String> {
    let mut out = tokens.to_vec();
    if let Some(first) = out.first_mut() {
        let mut chars = first.chars();
        if let Some(c) = chars.next() {
            *first = c.to_uppercase().chain(chars).collect();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(words: &[&str]) -> Vec<String> {
        words.iter().map(|w| w.to_string()).collect()
    }

    #[test]
    fn lowercases_ordinary_sentence_starters() {
        let corpus = [
            sentence(&["The", "cat", "sat", "because", "the", "cat", "sat"]),
            sentence(&["Sometimes", "the", "cat", "ran"]),
        ];
        let model = TruecaseModel::train(corpus.iter().map(|s| s.as_slice()));
        assert_eq!(model.apply(&sentence(&["The", "cat"])), sentence(&["the", "cat"]));
    }

    #[test]
    fn preserves_proper_nouns() {
        let corpus = [sentence(&["He", "visited", "Helsinki", "in", "Helsinki", "style"])];
        let model = TruecaseModel::train(corpus.iter().map(|s| s.as_slice()));
        assert_eq!(
            model.apply(&sentence(&["Helsinki", "welcomes", "you"])),
            sentence(&["Helsinki", "welcomes", "you"])
        );
    }

    #[test]
    fn unknown_tokens_are_left_unchanged() {
        let model = TruecaseModel::default();
        assert_eq!(model.apply(&sentence(&["Tuntematon", "sana"])), sentence(&["Tuntematon", "sana"]));
    }

    #[test]
    fn detruecase_restores_initial_capital() {
        let corpus = [
            sentence(&["He", "said", "the", "word", "the", "word"]),
            sentence(&["It", "was", "the", "best"]),
        ];
        let model = TruecaseModel::train(corpus.iter().map(|s| s.as_slice()));
        let original = sentence(&["The", "word", "was", "said"]);
        let cased = model.apply(&original);
        assert_eq!(cased[0], "the");
        assert_eq!(detruecase(&cased), original);
    }

    #[test]
    fn save_load_round_trip() {
        let corpus = [sentence(&["in", "Helsinki", "and", "iPhone", "news", "the", "end"])];
        let model = TruecaseModel::train(corpus.iter().map(|s| s.as_slice()));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("truecase.model");
        model.save(&path).unwrap();
        let loaded = TruecaseModel::load(&path).unwrap();
        for token in ["helsinki", "iphone", "the"] {
            assert_eq!(model.best_casing(token), loaded.best_casing(token));
        }
    }
}
