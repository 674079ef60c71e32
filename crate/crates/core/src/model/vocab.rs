//! Token vocabularies with reserved specials.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const BOS: u32 = 2;
pub const EOS: u32 = 3;

pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";
pub const BOS_TOKEN: &str = "<s>";
pub const EOS_TOKEN: &str = "</s>";

/// Granularity of the symbols a vocabulary indexes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VocabLevel {
    Char,
    Word,
    Bpe,
}

impl std::fmt::Display for VocabLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VocabLevel::Char => write!(f, "char"),
            VocabLevel::Word => write!(f, "word"),
            VocabLevel::Bpe => write!(f, "bpe"),
        }
    }
}

impl std::str::FromStr for VocabLevel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "char" => Ok(VocabLevel::Char),
            "word" => Ok(VocabLevel::Word),
            "bpe" => Ok(VocabLevel::Bpe),
            other => Err(Error::parameter(format!("unknown vocabulary level {other:?}"))),
        }
    }
}

impl VocabLevel {
    /// Splits one line into symbols at this granularity.
    pub fn split(self, line: &str) -> Vec<String> {
        match self {
            VocabLevel::Char => line.chars().map(|c| c.to_string()).collect(),
            VocabLevel::Word | VocabLevel::Bpe => {
                line.split_whitespace().map(|s| s.to_string()).collect()
            }
        }
    }
}

/// Dense token-id map with the four reserved specials at fixed positions.
#[derive(Clone, Debug, PartialEq)]
pub struct Vocabulary {
    level: VocabLevel,
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds a vocabulary from a token stream, keeping the most frequent
    /// `max_size` entries (specials included in the size). Ties break
    /// lexicographically so construction is deterministic.
    pub fn build<I, S>(level: VocabLevel, tokens: I, max_size: Option<usize>) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut counts: HashMap<String, u64> = HashMap::new();
        for t in tokens {
            let t = t.as_ref();
            if t.is_empty() || is_special(t) {
                continue;
            }
            *counts.entry(t.to_string()).or_insert(0) += 1;
        }
        let mut ranked: Vec<(String, u64)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        if let Some(max) = max_size {
            ranked.truncate(max.saturating_sub(4));
        }
        let mut tokens: Vec<String> = vec![
            PAD_TOKEN.to_string(),
            UNK_TOKEN.to_string(),
            BOS_TOKEN.to_string(),
            EOS_TOKEN.to_string(),
        ];
        tokens.extend(ranked.into_iter().map(|(t, _)| t));
        Self::from_tokens(level, tokens).expect("specials unique by construction")
    }

    /// Restores a vocabulary from an ordered token list (checkpoint load).
    pub fn from_tokens(level: VocabLevel, tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 4
            || tokens[PAD as usize] != PAD_TOKEN
            || tokens[UNK as usize] != UNK_TOKEN
            || tokens[BOS as usize] != BOS_TOKEN
            || tokens[EOS as usize] != EOS_TOKEN
        {
            return Err(Error::contract("vocabulary must start with the four reserved specials"));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::contract(format!("duplicate vocabulary entry {t:?}")));
            }
        }
        Ok(Vocabulary { level, tokens, index })
    }

    pub fn level(&self) -> VocabLevel {
        self.level
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn decode(&self, id: u32) -> &str {
        self.tokens.get(id as usize).map(|s| s.as_str()).unwrap_or(UNK_TOKEN)
    }

    /// Splits one line into symbols at this vocabulary's granularity.
    pub fn split_line(&self, line: &str) -> Vec<String> {
        self.level.split(line)
    }

    /// Joins decoder symbols back into a surface line.
    pub fn join_symbols(&self, symbols: &[String]) -> String {
        match self.level {
            VocabLevel::Char => symbols.concat(),
            VocabLevel::Word | VocabLevel::Bpe => symbols.join(" "),
        }
    }
}

fn is_special(token: &str) -> bool {
    matches!(token, PAD_TOKEN | UNK_TOKEN | BOS_TOKEN | EOS_TOKEN)
}
