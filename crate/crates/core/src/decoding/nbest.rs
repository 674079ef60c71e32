//! Moses-style n-best files: `id ||| surface ||| logprob`.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{NBestList, ScoredHypothesis};
use crate::error::{Error, Result};

const SEPARATOR: &str = " ||| ";

/// Writes lists in order, one hypothesis per line. Log-probabilities are
/// formatted with six decimals, which bounds the round-trip precision.
pub fn write_nbest(lists: &[NBestList], path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for list in lists {
        for h in &list.hypotheses {
            writeln!(out, "{}{}{}{}{:.6}", list.sentence_id, SEPARATOR, h.surface, SEPARATOR, h.log_prob)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads an n-best file back, grouping lines by sentence id in file order.
/// Scores equal the stored log-probabilities (penalty-adjusted scores are
/// not serialized).
pub fn read_nbest(path: &Path) -> Result<Vec<NBestList>> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lists: Vec<NBestList> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(SEPARATOR).collect();
        if parts.len() != 3 {
            return Err(Error::format(
                Some(lineno + 1),
                format!("expected `id ||| surface ||| logprob`, got {line:?}"),
            ));
        }
        let id: usize = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::format(Some(lineno + 1), format!("bad sentence id {:?}", parts[0])))?;
        let log_prob: f64 = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::format(Some(lineno + 1), format!("bad log-probability {:?}", parts[2])))?;
        let hyp = ScoredHypothesis {
            symbols: Vec::new(),
            surface: parts[1].to_string(),
            log_prob,
            score: log_prob,
        };
        match lists.last_mut() {
            Some(last) if last.sentence_id == id => last.hypotheses.push(hyp),
            _ => lists.push(NBestList { sentence_id: id, hypotheses: vec![hyp] }),
        }
    }
    Ok(lists)
}
