//! chrF: character n-gram F-score, recall-weighted with beta = 3.

use std::collections::HashMap;

use super::{MetricDetail, MetricReport};
use crate::error::{Error, Result};

/// Characters of a line with all whitespace removed; chrF n-grams never
/// cross or include spaces. Case-sensitive.
fn chars_of(line: &str) -> Vec<char> {
    line.chars().filter(|c| !c.is_whitespace()).collect()
}

fn ngram_counts(chars: &[char], n: usize) -> HashMap<&[char], u64> {
    let mut counts: HashMap<&[char], u64> = HashMap::new();
    if chars.len() >= n {
        for w in chars.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// (matched, hyp total, ref total) for one order.
fn order_counts(hyp: &[char], reference: &[char], n: usize) -> (u64, u64, u64) {
    let hc = ngram_counts(hyp, n);
    let rc = ngram_counts(reference, n);
    let mut matched = 0;
    let hyp_total = hc.values().sum();
    let ref_total = rc.values().sum();
    for (gram, &count) in &hc {
        matched += count.min(rc.get(gram).copied().unwrap_or(0));
    }
    (matched, hyp_total, ref_total)
}

/// Macro-averaged precision and recall over orders, then the F-beta score.
fn combine(per_order: &[(u64, u64, u64)], beta: f64) -> (f64, f64, f64) {
    let mut p_sum = 0.0;
    let mut r_sum = 0.0;
    let mut orders = 0usize;
    for &(matched, hyp_total, ref_total) in per_order {
        if hyp_total == 0 && ref_total == 0 {
            continue;
        }
        orders += 1;
        if hyp_total > 0 {
            p_sum += matched as f64 / hyp_total as f64;
        }
        if ref_total > 0 {
            r_sum += matched as f64 / ref_total as f64;
        }
    }
    if orders == 0 {
        return (0.0, 0.0, 0.0);
    }
    let p = p_sum / orders as f64;
    let r = r_sum / orders as f64;
    let b2 = beta * beta;
    let f = if p + r == 0.0 { 0.0 } else { (1.0 + b2) * p * r / (b2 * p + r) };
    (p, r, f)
}

/// Corpus chrF over aligned lines: counts aggregate over the corpus per
/// order, precision and recall average over orders, and
/// `F = (1 + b^2) P R / (b^2 P + R)` weights recall by `beta`.
pub fn chrf3(hypotheses: &[String], references: &[String], max_n: usize, beta: f64) -> Result<MetricReport> {
    if hypotheses.len() != references.len() {
        return Err(Error::contract(format!(
            "{} hypotheses but {} references",
            hypotheses.len(),
            references.len()
        )));
    }
    if max_n == 0 {
        return Err(Error::parameter("max_n must be at least 1"));
    }
    if beta <= 0.0 {
        return Err(Error::parameter("beta must be positive"));
    }
    let mut corpus = vec![(0u64, 0u64, 0u64); max_n];
    let mut per_sentence = Vec::with_capacity(hypotheses.len());
    for (h, r) in hypotheses.iter().zip(references) {
        let hc = chars_of(h);
        let rc = chars_of(r);
        let mut sentence = vec![(0u64, 0u64, 0u64); max_n];
        for n in 1..=max_n {
            let (m, ht, rt) = order_counts(&hc, &rc, n);
            sentence[n - 1] = (m, ht, rt);
            corpus[n - 1].0 += m;
            corpus[n - 1].1 += ht;
            corpus[n - 1].2 += rt;
        }
        per_sentence.push(combine(&sentence, beta).2);
    }
    let (precision, recall, score) = combine(&corpus, beta);
    Ok(MetricReport {
        corpus: score,
        per_sentence,
        detail: MetricDetail::Chrf { precision, recall, per_order: corpus },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lines(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_strings_score_one() {
        let text = lines(&["kissa istuu matolla", "hiiri"]);
        let report = chrf3(&text, &text, 6, 3.0).unwrap();
        assert_eq!(report.corpus, 1.0);
    }

    #[test]
    fn disjoint_character_sets_score_zero() {
        let report = chrf3(&lines(&["aaa"]), &lines(&["bbb"]), 6, 3.0).unwrap();
        assert_eq!(report.corpus, 0.0);
    }

    #[test]
    fn abc_vs_abd_matches_hand_computation() {
        // 1-grams: 2/3 match; 2-grams: 1/2; 3-grams: 0/1; orders 4..6 have
        // no n-grams on either side and are skipped. P = R, so F = P.
        let report = chrf3(&lines(&["abc"]), &lines(&["abd"]), 6, 3.0).unwrap();
        let want = (2.0 / 3.0 + 0.5 + 0.0) / 3.0;
        assert!((report.corpus - want).abs() < 1e-12, "{} vs {want}", report.corpus);
        let MetricDetail::Chrf { precision, recall, .. } = report.detail else { panic!() };
        assert!((precision - want).abs() < 1e-12);
        assert!((recall - want).abs() < 1e-12);
    }

    #[test]
    fn beta_three_weights_recall() {
        let f = |p: f64, r: f64| if p + r == 0.0 { 0.0 } else { 10.0 * p * r / (9.0 * p + r) };
        // Swapping any (P, R) pair so the larger value sits on recall never
        // lowers F.
        for i in 0..20 {
            for j in 0..20 {
                let (a, b) = (i as f64 / 20.0, j as f64 / 20.0);
                let (lo, hi) = (a.min(b), a.max(b));
                assert!(f(lo, hi) >= f(hi, lo) - 1e-15);
            }
        }
        // For fixed P + R, F keeps rising as mass moves toward recall up to
        // the beta-optimal mix at R = beta / (1 + beta) * (P + R).
        let total = 0.8;
        let mut prev = 0.0;
        for k in 1..=12 {
            let r = 0.75 * total * k as f64 / 12.0;
            let p = total - r;
            let score = f(p, r);
            assert!(score >= prev - 1e-12, "recall sweep dipped at {k}");
            prev = score;
        }
    }

    #[test]
    fn whitespace_is_excluded_from_ngrams() {
        // Same letters, different spacing: identical under chrF.
        let report = chrf3(&lines(&["ab cd"]), &lines(&["abcd"]), 6, 3.0).unwrap();
        assert_eq!(report.corpus, 1.0);
    }
}
