//! Hyphen retokenization: recovering the spacing the tokenizer destroyed.
//!
//! Finnish uses `-` with space on both sides, attached on both sides, or
//! attached on exactly one side. The tokenizer always frees hyphens, so
//! after detokenization each hyphen sits as ` - `. For every hyphen the
//! four spacing variants are generated and a scorer (normally a trained
//! character-level model) picks the best one.

use crate::error::{Error, Result};

/// Spacing variants per hyphen, in canonical order.
const INFIXES: [&str; 4] = [" - ", "- ", " -", "-"];

/// Hyphens scored combinatorially in one pass; sentences with more hyphens
/// are processed in left-to-right windows of this size.
pub const MAX_COMBINATORIAL_HYPHENS: usize = 6;

/// Splits a sentence at each hyphen, discarding up to one space on either
/// side of it. `parts.len() == hyphens + 1`.
fn split_at_hyphens(sentence: &str) -> Vec<String> {
    let mut parts = vec![String::new()];
    let chars: Vec<char> = sentence.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '-' {
            let last = parts.last_mut().expect("at least one part");
            if last.ends_with(' ') {
                last.pop();
            }
            parts.push(String::new());
            i += 1;
            if chars.get(i) == Some(&' ') {
                i += 1;
            }
        } else {
            parts.last_mut().expect("at least one part").push(chars[i]);
            i += 1;
        }
    }
    parts
}

fn join_with_infixes(parts: &[String], digits: &[usize]) -> String {
    let mut out = parts[0].clone();
    for (part, &d) in parts[1..].iter().zip(digits) {
        out.push_str(INFIXES[d]);
        out.push_str(part);
    }
    out
}

/// All spacing variants of a sentence's hyphens, in canonical order (the
/// first variant is the fully spaced form; the leftmost hyphen varies
/// slowest). A sentence without hyphens yields only itself. Hyphens past
/// [`MAX_COMBINATORIAL_HYPHENS`] keep the input spacing.
pub fn hyphen_variants(sentence: &str) -> Vec<String> {
    let parts = split_at_hyphens(sentence);
    let h = parts.len() - 1;
    if h == 0 {
        return vec![sentence.to_string()];
    }
    let varied = h.min(MAX_COMBINATORIAL_HYPHENS);
    // Hyphens beyond the cap stay fully spaced (the detokenizer's form).
    let mut tail_parts: Vec<String> = parts[varied..].to_vec();
    let tail = if tail_parts.len() > 1 {
        let digits = vec![0; tail_parts.len() - 1];
        join_with_infixes(&tail_parts, &digits)
    } else {
        tail_parts.remove(0)
    };
    let mut head_parts: Vec<String> = parts[..varied].to_vec();
    head_parts.push(tail);

    let total = 4usize.pow(varied as u32);
    let mut out = Vec::with_capacity(total);
    for i in 0..total {
        let digits: Vec<usize> =
            (0..varied).map(|k| (i / 4usize.pow((varied - 1 - k) as u32)) % 4).collect();
        out.push(join_with_infixes(&head_parts, &digits));
    }
    out
}

/// Outcome of scoring the variants of one sentence.
#[derive(Clone, Debug)]
pub struct RetokenizeOutcome {
    pub sentence: String,
    /// False when the scorer failed on every variant and the input passed
    /// through unchanged.
    pub scored: bool,
}

fn best_variant_index(variants: &[String], scorer: impl Fn(&str) -> Option<f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in variants.iter().enumerate() {
        let Some(score) = scorer(v) else { continue };
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((i, score));
        }
    }
    best.map(|(i, _)| i)
}

/// Picks the variant with the highest score. Ties keep the earliest
/// variant in canonical order. If the scorer fails on every variant the
/// original (first) variant passes through with a warning.
pub fn hyphen_retokenize(
    variants: &[String],
    scorer: impl Fn(&str) -> Option<f64>,
) -> Result<RetokenizeOutcome> {
    if variants.is_empty() {
        return Err(Error::parameter("hyphen retokenization needs at least one variant"));
    }
    match best_variant_index(variants, scorer) {
        Some(i) => Ok(RetokenizeOutcome { sentence: variants[i].clone(), scored: true }),
        None => {
            log::warn!("scorer failed on all hyphen variants; passing the input through");
            Ok(RetokenizeOutcome { sentence: variants[0].clone(), scored: false })
        }
    }
}

/// Retokenizes a whole sentence. Up to [`MAX_COMBINATORIAL_HYPHENS`] the
/// full variant set is scored at once; beyond that, hyphens are processed
/// in left-to-right windows, fixing each window's best spacing before the
/// next window is scored (with hyphens to the right still fully spaced).
pub fn retokenize_sentence(
    sentence: &str,
    scorer: impl Fn(&str) -> Option<f64>,
) -> Result<RetokenizeOutcome> {
    let parts = split_at_hyphens(sentence);
    let h = parts.len() - 1;
    if h == 0 {
        return Ok(RetokenizeOutcome { sentence: sentence.to_string(), scored: true });
    }
    let mut digits = vec![0usize; h];
    let mut scored = true;
    let mut start = 0;
    while start < h {
        let width = MAX_COMBINATORIAL_HYPHENS.min(h - start);
        let total = 4usize.pow(width as u32);
        let mut variants = Vec::with_capacity(total);
        for i in 0..total {
            let mut d = digits.clone();
            for (k, slot) in d[start..start + width].iter_mut().enumerate() {
                *slot = (i / 4usize.pow((width - 1 - k) as u32)) % 4;
            }
            variants.push(join_with_infixes(&parts, &d));
        }
        match best_variant_index(&variants, &scorer) {
            Some(best) => {
                for (k, slot) in digits[start..start + width].iter_mut().enumerate() {
                    *slot = (best / 4usize.pow((width - 1 - k) as u32)) % 4;
                }
            }
            None => {
                log::warn!("scorer failed on all hyphen variants; keeping spaced hyphens");
                scored = false;
            }
        }
        start += width;
    }
    Ok(RetokenizeOutcome { sentence: join_with_infixes(&parts, &digits), scored })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_variants_for_one_hyphen() {
        let variants = hyphen_variants("x - y");
        assert_eq!(variants, vec!["x - y", "x- y", "x -y", "x-y"]);
    }

    #[test]
    fn hyphen_free_sentence_is_a_singleton() {
        assert_eq!(hyphen_variants("ei viivaa"), vec!["ei viivaa"]);
    }

    #[test]
    fn variant_count_is_four_to_the_hyphens() {
        assert_eq!(hyphen_variants("a - b - c").len(), 16);
        assert_eq!(hyphen_variants("a - b - c - d").len(), 64);
    }

    #[test]
    fn attached_left_form_is_among_variants() {
        let variants = hyphen_variants("\u{f6}ljy - ja kaasutoiminnot");
        assert!(variants.contains(&"\u{f6}ljy- ja kaasutoiminnot".to_string()));
    }

    #[test]
    fn oracle_scorer_recovers_gold_spacing() {
        // The four spacing patterns from Finnish usage.
        let golds = [
            "Draamaa Riossa - suomalaisnostaja py\u{f6}rtyi",
            "Kempinski-hotelli",
            "kissa ja hiiri -leikki\u{e4}",
            "\u{f6}ljy- ja kaasutoiminnot",
        ];
        for gold in golds {
            // What the tokenize/detokenize pipeline would hand us.
            let spaced = hyphen_variants(gold)[0].clone();
            let variants = hyphen_variants(&spaced);
            let outcome =
                hyphen_retokenize(&variants, |v| Some(if v == gold { 1.0 } else { 0.0 })).unwrap();
            assert_eq!(outcome.sentence, gold);
            assert!(outcome.scored);
        }
    }

    #[test]
    fn constant_scorer_keeps_first_canonical_variant() {
        let variants = hyphen_variants("x - y");
        let outcome = hyphen_retokenize(&variants, |_| Some(0.5)).unwrap();
        assert_eq!(outcome.sentence, "x - y");
    }

    #[test]
    fn singleton_variant_set_passes_through() {
        let outcome = hyphen_retokenize(&["only one".to_string()], |_| Some(1.0)).unwrap();
        assert_eq!(outcome.sentence, "only one");
    }

    #[test]
    fn failing_scorer_passes_original_through() {
        let variants = hyphen_variants("x - y");
        let outcome = hyphen_retokenize(&variants, |_| None).unwrap();
        assert_eq!(outcome.sentence, "x - y");
        assert!(!outcome.scored);
    }

    #[test]
    fn many_hyphens_fall_back_to_windows() {
        let sentence = (0..9).map(|i| i.to_string()).collect::<Vec<_>>().join(" - ");
        let variants = hyphen_variants(&sentence);
        assert_eq!(variants.len(), 4usize.pow(6));
        // A scorer preferring fully attached hyphens converges to them.
        let outcome = retokenize_sentence(&sentence, |v| {
            Some(-(v.chars().filter(|&c| c == ' ').count() as f64))
        })
        .unwrap();
        assert_eq!(outcome.sentence, "0-1-2-3-4-5-6-7-8");
    }
}
