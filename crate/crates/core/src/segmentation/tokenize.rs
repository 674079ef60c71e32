//! Rule-based tokenizer and detokenizer.
//!
//! The tokenizer splits punctuation from words, keeps apostrophes and
//! digit-internal `.`/`,` inside tokens, groups runs of one repeated
//! punctuation character, and always frees hyphens with space on both
//! sides. That last rule deliberately loses the original hyphen spacing;
//! the hyphen retokenizer exists to repair it after detokenization.

/// Splits a normalized line into tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens: Vec<String> = Vec::new();
    let mut word = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_alphanumeric() {
            word.push(c);
            i += 1;
            continue;
        }
        let prev_alnum = !word.is_empty();
        let next_alnum = chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        // Word-internal apostrophes and numeric separators stay put.
        let word_internal = prev_alnum
            && next_alnum
            && (c == '\''
                || ((c == '.' || c == ',')
                    && chars[i - 1].is_ascii_digit()
                    && chars[i + 1].is_ascii_digit()));
        if word_internal {
            word.push(c);
            i += 1;
            continue;
        }
        if !word.is_empty() {
            tokens.push(std::mem::take(&mut word));
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        // Group a run of the same punctuation character ("...", "!!").
        let mut run = String::new();
        while i < chars.len() && chars[i] == c {
            run.push(c);
            i += 1;
        }
        tokens.push(run);
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    tokens
}

fn attaches_left(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| matches!(c, '.' | ',' | ';' | ':' | '!' | '?' | '%' | ')' | ']' | '}' | '\''))
}

fn attaches_right(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| matches!(c, '(' | '[' | '{' | '\u{00BF}' | '\u{00A1}'))
}

/// Joins tokens back into a sentence, re-attaching punctuation by class.
/// Double quotes alternate: odd occurrences open (attach right), even
/// occurrences close (attach left). Hyphen tokens keep space on both
/// sides, reproducing the tokenizer's information loss.
pub fn detokenize(tokens: &[String]) -> String {
    let mut out = String::new();
    let mut glue_next = false;
    let mut quote_open = false;
    for token in tokens {
        let (glue_this, glue_after) = if token == "\"" {
            quote_open = !quote_open;
            if quote_open {
                (false, true)
            } else {
                (true, false)
            }
        } else if attaches_left(token) {
            (true, false)
        } else if attaches_right(token) {
            (false, true)
        } else {
            (false, false)
        };
        if !out.is_empty() && !glue_this && !glue_next {
            out.push(' ');
        }
        out.push_str(token);
        glue_next = glue_after;
    }
    out
}
