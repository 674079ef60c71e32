//! Unicode and punctuation normalization.

use unicode_normalization::UnicodeNormalization;

/// Canonicalizes a line: NFC composition, curly quotes and dash variants
/// mapped to the ASCII set, exotic spaces mapped to plain spaces, and
/// whitespace runs collapsed. Idempotent. U+2581 is reserved for the
/// pre-translation marker and rewritten to `_` so it never occurs in
/// natural text.
pub fn normalize(text: &str) -> String {
    let mapped: String = text
        .nfc()
        .filter_map(|c| match c {
            '\u{2018}' | '\u{2019}' | '\u{201A}' | '\u{201B}' | '\u{2032}' => Some('\''),
            '\u{201C}' | '\u{201D}' | '\u{201E}' | '\u{201F}' | '\u{00AB}' | '\u{00BB}' | '\u{2033}' => {
                Some('"')
            }
            '\u{2010}' | '\u{2011}' | '\u{2012}' | '\u{2013}' | '\u{2014}' | '\u{2015}' | '\u{2212}' => {
                Some('-')
            }
            '\u{00A0}' | '\u{2007}' | '\u{2008}' | '\u{2009}' | '\u{200A}' | '\u{202F}' | '\u{3000}' => {
                Some(' ')
            }
            '\u{200B}' | '\u{FEFF}' | '\u{00AD}' => None,
            '\u{2581}' => Some('_'),
            other => Some(other),
        })
        .collect();
    let expanded = mapped.replace('\u{2026}', "...");
    // Collapse whitespace runs and trim the ends.
    expanded.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_text_is_unchanged() {
        let line = "A plain sentence, nothing fancy.";
        assert_eq!(normalize(line), line);
    }

    #[test]
    fn curly_quotes_become_straight() {
        assert_eq!(normalize("\u{201C}curly\u{201D} \u{2018}quotes\u{2019}"), "\"curly\" 'quotes'");
    }

    #[test]
    fn dashes_spaces_and_ellipsis_are_canonical() {
        assert_eq!(normalize("a\u{2013}b c\u{00A0}d e\u{2026}"), "a-b c d e...");
    }

    #[test]
    fn idempotent_on_varied_lines() {
        let lines = [
            "Draamaa Riossa \u{2013} suomalaisnostaja py\u{00F6}rtyi\u{2026}",
            "\u{201C}Kempinski-hotelli\u{201D}",
            "  spaced\u{00A0}\u{00A0}out  ",
            "kissa ja hiiri -leikki\u{00E4}",
            "\u{2581}PT marker",
        ];
        for line in lines {
            let once = normalize(line);
            assert_eq!(normalize(&once), once, "not idempotent on {line:?}");
        }
    }

    #[test]
    fn pretranslation_marker_char_is_excluded() {
        assert!(!normalize("x\u{2581}PT").contains('\u{2581}'));
    }
}
