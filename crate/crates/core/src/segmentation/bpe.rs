//! Byte-pair encoding: greedy most-frequent-pair merging over word-internal
//! symbol sequences.
//!
//! During learning, each word becomes its character symbols with the
//! end-of-word marker `</w>` fused onto the final character. Emitted
//! subwords use the `@@` continuation convention instead: every subword of
//! a word except the last carries a trailing `@@`, and the marker is
//! stripped, so `bpe_join` recovers the original tokens exactly.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const END_OF_WORD: &str = "</w>";
pub const CONTINUATION: &str = "@@";

const FILE_HEADER: &str = "#version: hnmt-bpe 1";

/// An ordered byte-pair merge list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
}

fn word_symbols(word: &str) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    let mut symbols: Vec<String> = Vec::with_capacity(chars.len());
    for (i, c) in chars.iter().enumerate() {
        if i + 1 == chars.len() {
            symbols.push(format!("{c}{END_OF_WORD}"));
        } else {
            symbols.push(c.to_string());
        }
    }
    symbols
}

fn merge_in_place(symbols: &mut Vec<String>, left: &str, right: &str) {
    let mut i = 0;
    while i + 1 < symbols.len() {
        if symbols[i] == left && symbols[i + 1] == right {
            let joined = format!("{}{}", symbols[i], symbols[i + 1]);
            symbols[i] = joined;
            symbols.remove(i + 1);
        } else {
            i += 1;
        }
    }
}

impl BpeModel {
    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    /// Learns up to `num_merges` merges from a stream of (already
    /// tokenized) words. The most frequent adjacent symbol pair merges
    /// first; ties break lexicographically on the pair. Learning stops
    /// early when no pair occurs twice... or at all.
    pub fn learn<I, S>(words: I, num_merges: usize) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut frequencies: HashMap<Vec<String>, u64> = HashMap::new();
        for word in words {
            let word = word.as_ref();
            if word.is_empty() {
                continue;
            }
            *frequencies.entry(word_symbols(word)).or_insert(0) += 1;
        }
        if frequencies.is_empty() {
            return Err(Error::parameter("cannot learn byte-pair merges from an empty corpus"));
        }
        let mut vocab: Vec<(Vec<String>, u64)> = frequencies.into_iter().collect();
        vocab.sort(); // deterministic iteration independent of hash order

        let mut merges = Vec::with_capacity(num_merges);
        for _ in 0..num_merges {
            let mut pair_counts: HashMap<(&str, &str), u64> = HashMap::new();
            for (symbols, freq) in &vocab {
                for pair in symbols.windows(2) {
                    *pair_counts.entry((pair[0].as_str(), pair[1].as_str())).or_insert(0) += freq;
                }
            }
            let Some(best) = pair_counts
                .into_iter()
                .max_by(|a, b| a.1.cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
                .map(|((l, r), _)| (l.to_string(), r.to_string()))
            else {
                break;
            };
            for (symbols, _) in &mut vocab {
                merge_in_place(symbols, &best.0, &best.1);
            }
            merges.push(best);
        }
        Ok(BpeModel { merges })
    }

    /// Learns until the symbol vocabulary (initial alphabet plus one new
    /// symbol per merge) reaches `target_vocab_size`.
    pub fn learn_to_vocab_size<I, S>(words: I, target_vocab_size: usize) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let collected: Vec<String> = words.into_iter().map(|w| w.as_ref().to_string()).collect();
        let alphabet: BTreeSet<String> =
            collected.iter().flat_map(|w| word_symbols(w)).collect();
        if alphabet.is_empty() {
            return Err(Error::parameter("cannot learn byte-pair merges from an empty corpus"));
        }
        let budget = target_vocab_size.saturating_sub(alphabet.len());
        Self::learn(collected, budget)
    }

    /// Symbol vocabulary induced over a corpus: its initial alphabet plus
    /// this model's merge outputs. Monotone in the number of merges.
    pub fn vocabulary<'a>(&self, words: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
        let mut vocab: BTreeSet<String> = words.into_iter().flat_map(word_symbols).collect();
        for (l, r) in &self.merges {
            vocab.insert(format!("{l}{r}"));
        }
        vocab
    }

    /// Segments one word by replaying the merges in learned order, then
    /// emits `@@`-continuation subwords. Characters never seen in training
    /// simply stay unmerged singleton symbols.
    pub fn apply_word(&self, word: &str) -> Vec<String> {
        if word.is_empty() {
            return Vec::new();
        }
        let mut symbols = word_symbols(word);
        for (l, r) in &self.merges {
            if symbols.len() < 2 {
                break;
            }
            merge_in_place(&mut symbols, l, r);
        }
        let last = symbols.len() - 1;
        symbols
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if i == last {
                    s.strip_suffix(END_OF_WORD).unwrap_or(s).to_string()
                } else {
                    format!("{s}{CONTINUATION}")
                }
            })
            .collect()
    }

    /// Segments a token sequence.
    pub fn apply(&self, tokens: &[String]) -> Vec<String> {
        tokens.iter().flat_map(|t| self.apply_word(t)).collect()
    }

    /// `left right` merge lines under a version header.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "{FILE_HEADER}")?;
        for (l, r) in &self.merges {
            writeln!(out, "{l} {r}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines().enumerate();
        match lines.next() {
            Some((_, Ok(header))) if header == FILE_HEADER => {}
            Some((_, Ok(other))) => {
                return Err(Error::format(Some(1), format!("expected {FILE_HEADER:?}, got {other:?}")))
            }
            Some((_, Err(e))) => return Err(e.into()),
            None => return Err(Error::format(Some(1), "empty byte-pair model file")),
        }
        let mut merges = Vec::new();
        for (lineno, line) in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(' ');
            let (Some(l), Some(r), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::format(
                    Some(lineno + 1),
                    format!("expected `left right`, got {line:?}"),
                ));
            };
            merges.push((l.to_string(), r.to_string()));
        }
        Ok(BpeModel { merges })
    }
}

/// Undoes `@@` continuation: subwords glue onto the next until one arrives
/// without the marker, which closes the token.
pub fn bpe_join(subwords: &[String]) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for s in subwords {
        match s.strip_suffix(CONTINUATION) {
            Some(stem) => current.push_str(stem),
            None => {
                current.push_str(s);
                tokens.push(std::mem::take(&mut current));
            }
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}
