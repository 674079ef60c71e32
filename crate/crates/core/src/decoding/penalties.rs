//! Decoding score penalties and their grid search.
//!
//! The final hypothesis score is
//!
//! ```text
//! logP / lp(|h|)  +  beta * sum_j log(min(coverage_j, 1))
//!                 -  gamma * sum_j max(coverage_j - 1, 0)
//! ```
//!
//! with `lp(|h|) = (5 + |h|)^alpha / 6^alpha`, `|h|` the emitted symbol
//! count, and `coverage_j` the attention mass accumulated on source
//! position `j` across all steps. With `alpha = beta = gamma = 0` the
//! score is the raw log-probability.

use super::Hypothesis;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyConfig {
    /// Length-penalty exponent.
    pub alpha: f64,
    /// Coverage-penalty weight.
    pub beta: f64,
    /// Overtranslation-penalty weight.
    pub gamma: f64,
}

impl Default for PenaltyConfig {
    fn default() -> Self {
        PenaltyConfig { alpha: 0.0, beta: 0.0, gamma: 0.0 }
    }
}

impl PenaltyConfig {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let cfg = PenaltyConfig { alpha, beta, gamma };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha < 0.0 || self.beta < 0.0 || self.gamma < 0.0 {
            return Err(Error::parameter(format!(
                "penalty weights must be nonnegative: alpha={} beta={} gamma={}",
                self.alpha, self.beta, self.gamma
            )));
        }
        Ok(())
    }

    pub fn is_neutral(&self) -> bool {
        self.alpha == 0.0 && self.beta == 0.0 && self.gamma == 0.0
    }
}

/// Final score of a finished hypothesis under `cfg`.
pub fn apply_penalties(hyp: &Hypothesis, cfg: &PenaltyConfig) -> Result<f64> {
    cfg.validate()?;
    if !hyp.finished {
        return Err(Error::contract("penalties apply to finished hypotheses only"));
    }
    let mut score = if cfg.alpha == 0.0 {
        hyp.log_prob
    } else {
        let lp = (5.0 + hyp.symbols.len() as f64).powf(cfg.alpha) / 6f64.powf(cfg.alpha);
        hyp.log_prob / lp
    };
    if cfg.beta != 0.0 || cfg.gamma != 0.0 {
        let src_len = hyp.attention.first().map_or(0, |row| row.len());
        for j in 0..src_len {
            let coverage: f64 = hyp.attention.iter().map(|row| row[j]).sum();
            if cfg.beta != 0.0 {
                score += cfg.beta * coverage.min(1.0).ln();
            }
            if cfg.gamma != 0.0 {
                score -= cfg.gamma * (coverage - 1.0).max(0.0);
            }
        }
    }
    Ok(score)
}

/// Exhaustive Cartesian scan over penalty grids. `decode_and_score` maps a
/// config to a corpus-level metric value; the argmax config wins, with ties
/// going to the earliest config in scan order (alpha outermost, gamma
/// innermost). Returns the winner and the full score table.
pub fn penalty_grid_search(
    alphas: &[f64],
    betas: &[f64],
    gammas: &[f64],
    mut decode_and_score: impl FnMut(&PenaltyConfig) -> Result<f64>,
) -> Result<(PenaltyConfig, Vec<(PenaltyConfig, f64)>)> {
    if alphas.is_empty() || betas.is_empty() || gammas.is_empty() {
        return Err(Error::parameter("penalty grid search needs nonempty grids"));
    }
    let mut table = Vec::with_capacity(alphas.len() * betas.len() * gammas.len());
    let mut best: Option<(PenaltyConfig, f64)> = None;
    for &alpha in alphas {
        for &beta in betas {
            for &gamma in gammas {
                let cfg = PenaltyConfig::new(alpha, beta, gamma)?;
                let score = decode_and_score(&cfg)?;
                table.push((cfg, score));
                match &best {
                    Some((_, s)) if *s >= score => {}
                    _ => best = Some((cfg, score)),
                }
            }
        }
    }
    Ok((best.expect("grids nonempty").0, table))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyp(log_prob: f64, len: usize, attention: Vec<Vec<f64>>) -> Hypothesis {
        Hypothesis { symbols: vec![7; len], log_prob, attention, finished: true }
    }

    #[test]
    fn neutral_config_returns_raw_log_prob() {
        let h = hyp(-3.25, 4, vec![vec![0.5, 0.5]; 4]);
        let cfg = PenaltyConfig::default();
        assert_eq!(apply_penalties(&h, &cfg).unwrap(), -3.25);
    }

    #[test]
    fn unit_length_has_no_length_penalty() {
        // (5 + 1)^alpha / 6^alpha = 1 for any alpha.
        let h = hyp(-2.0, 1, vec![vec![1.0]]);
        for alpha in [0.3, 1.0, 2.5] {
            let cfg = PenaltyConfig::new(alpha, 0.0, 0.0).unwrap();
            assert!((apply_penalties(&h, &cfg).unwrap() - -2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coverage_and_overtranslation_match_hand_evaluation() {
        // 2x2 attention with column sums (1.0, 0.5).
        let h = hyp(-1.5, 2, vec![vec![0.7, 0.3], vec![0.3, 0.2]]);
        let cfg = PenaltyConfig::new(0.0, 1.0, 1.0).unwrap();
        let want = -1.5 + 0.5f64.ln() - 0.0;
        assert!((apply_penalties(&h, &cfg).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn negative_weights_are_rejected() {
        assert!(PenaltyConfig::new(-0.1, 0.0, 0.0).is_err());
        let h = hyp(-1.0, 1, vec![vec![1.0]]);
        let bad = PenaltyConfig { alpha: 0.0, beta: -1.0, gamma: 0.0 };
        assert!(apply_penalties(&h, &bad).is_err());
    }

    #[test]
    fn unfinished_hypothesis_is_rejected() {
        let mut h = hyp(-1.0, 1, vec![vec![1.0]]);
        h.finished = false;
        assert!(apply_penalties(&h, &PenaltyConfig::default()).is_err());
    }

    #[test]
    fn grid_search_singleton_and_constant_metric() {
        let (best, table) =
            penalty_grid_search(&[0.5], &[0.25], &[0.1], |_| Ok(1.0)).unwrap();
        assert_eq!(best, PenaltyConfig::new(0.5, 0.25, 0.1).unwrap());
        assert_eq!(table.len(), 1);

        // Constant metric: first config in scan order wins.
        let (best, table) =
            penalty_grid_search(&[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0], |_| Ok(0.5)).unwrap();
        assert_eq!(best, PenaltyConfig::default());
        assert_eq!(table.len(), 8);
    }

    #[test]
    fn grid_search_recovers_planted_optimum() {
        let (best, _) = penalty_grid_search(&[0.0], &[0.0, 0.5, 1.0], &[0.0], |cfg| {
            Ok(-(cfg.beta - 0.5).abs())
        })
        .unwrap();
        assert_eq!(best.beta, 0.5);
    }

    #[test]
    fn empty_grid_is_a_parameter_error() {
        assert!(penalty_grid_search(&[], &[0.0], &[0.0], |_| Ok(0.0)).is_err());
    }
}
