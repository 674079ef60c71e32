//! Expansion of English verb-form contractions.

use std::collections::HashMap;

/// Suffix-family table mapping contracted forms to uncontracted token
/// sequences. The curated default covers the `n't`, `'re`, `'ve`, `'ll`,
/// `'m`, and `'d` families; `'s` is left alone (possessive/copula
/// ambiguity). Expansions preserve the stem's casing.
#[derive(Clone, Debug)]
pub struct ContractionTable {
    /// (suffix, replacement tokens), longest suffixes first.
    suffixes: Vec<(String, Vec<String>)>,
    /// Irregular stems of the `n't` family: wo -> will, ca -> can, ...
    stem_fixes: HashMap<String, String>,
}

impl Default for ContractionTable {
    fn default() -> Self {
        let suffixes = [
            ("n't", vec!["not"]),
            ("'re", vec!["are"]),
            ("'ve", vec!["have"]),
            ("'ll", vec!["will"]),
            ("'m", vec!["am"]),
            // Reading "'d" as "would"; "had" is also possible but rarer in
            // the news register this targets.
            ("'d", vec!["would"]),
        ];
        let stem_fixes =
            [("wo", "will"), ("ca", "can"), ("sha", "shall"), ("ai", "am")];
        ContractionTable {
            suffixes: suffixes
                .into_iter()
                .map(|(s, e)| (s.to_string(), e.into_iter().map(String::from).collect()))
                .collect(),
            stem_fixes: stem_fixes.into_iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
        }
    }
}

fn match_case(pattern: &str, replacement: &str) -> String {
    if pattern.chars().all(|c| c.is_uppercase() || !c.is_alphabetic())
        && pattern.chars().any(|c| c.is_uppercase())
    {
        return replacement.to_uppercase();
    }
    if pattern.chars().next().is_some_and(|c| c.is_uppercase()) {
        let mut chars = replacement.chars();
        return match chars.next() {
            Some(c) => c.to_uppercase().chain(chars).collect(),
            None => String::new(),
        };
    }
    replacement.to_string()
}

impl ContractionTable {
    /// Expands one token if it matches a contraction family.
    fn expand_token(&self, token: &str) -> Option<Vec<String>> {
        let lower = token.to_lowercase();
        for (suffix, replacement) in &self.suffixes {
            let Some(stem) = lower.strip_suffix(suffix.as_str()) else { continue };
            // A bare suffix token (pre-split input) expands on its own.
            if stem.is_empty() {
                return Some(replacement.iter().map(|r| match_case(token, r)).collect());
            }
            if !stem.chars().all(|c| c.is_alphabetic()) {
                continue;
            }
            let stem_surface = &token[..stem.len()];
            let fixed_stem = match self.stem_fixes.get(stem) {
                Some(fixed) => match_case(stem_surface, fixed),
                None => stem_surface.to_string(),
            };
            let mut out = vec![fixed_stem];
            out.extend(replacement.iter().cloned());
            return Some(out);
        }
        None
    }

    /// Replaces every contracted token left to right; non-matches pass
    /// through untouched. Idempotent: no expansion output matches a rule.
    pub fn expand(&self, tokens: &[String]) -> Vec<String> {
        let mut out = Vec::with_capacity(tokens.len());
        for token in tokens {
            match self.expand_token(token) {
                Some(expansion) => out.extend(expansion),
                None => out.push(token.clone()),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn wouldnt_becomes_would_not() {
        let table = ContractionTable::default();
        assert_eq!(table.expand(&toks(&["wouldn't"])), toks(&["would", "not"]));
        assert_eq!(table.expand(&toks(&["Wouldn't"])), toks(&["Would", "not"]));
    }

    #[test]
    fn cant_expands_to_can_not() {
        // Documented choice: "can not" rather than "cannot".
        let table = ContractionTable::default();
        assert_eq!(table.expand(&toks(&["can't"])), toks(&["can", "not"]));
        assert_eq!(table.expand(&toks(&["Won't", "they'll"])), toks(&["Will", "not", "they", "will"]));
    }

    #[test]
    fn uncontracted_text_is_untouched() {
        let table = ContractionTable::default();
        let input = toks(&["nothing", "to", "expand", "here", "Jack's"]);
        assert_eq!(table.expand(&input), input);
    }

    #[test]
    fn expansion_is_idempotent() {
        let table = ContractionTable::default();
        let input = toks(&["I'm", "sure", "they're", "right", ",", "shan't", "we've", "it'd"]);
        let once = table.expand(&input);
        assert_eq!(table.expand(&once), once);
    }
}
