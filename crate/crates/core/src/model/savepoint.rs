//! Savepoints: named parameter snapshots taken on a schedule, their
//! elementwise averaging, and best-savepoint selection.

use serde::{Deserialize, Serialize};

use super::vocab::Vocabulary;
use super::{ModelConfig, TranslationModel};
use crate::error::{Error, Result};
use crate::tensor::{Element, Parameters, Tensor};

/// Heldout evaluation attached to a savepoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeldoutScores {
    /// Mean per-token cross-entropy in nats.
    pub cross_entropy: f64,
    pub bleu: f64,
    pub chrf3: f64,
}

/// A complete named parameter snapshot with its config and vocabularies.
#[derive(Clone, Debug)]
pub struct Savepoint<T: Element = f32> {
    /// Model id plus batch count, e.g. `model1@15000`.
    pub label: String,
    pub batches: u64,
    pub config: ModelConfig,
    pub source_vocab: Vocabulary,
    pub char_vocab: Vocabulary,
    pub target_vocab: Vocabulary,
    pub params: Parameters<T>,
    pub scores: Option<HeldoutScores>,
}

impl<T: Element> Savepoint<T> {
    pub fn from_model(
        model: &TranslationModel<T>,
        model_id: &str,
        batches: u64,
        scores: Option<HeldoutScores>,
    ) -> Self {
        Savepoint {
            label: format!("{model_id}@{batches}"),
            batches,
            config: model.config().clone(),
            source_vocab: model.source_vocab().clone(),
            char_vocab: model.char_vocab().clone(),
            target_vocab: model.target_vocab().clone(),
            params: model.params().clone(),
            scores,
        }
    }
}

/// Elementwise arithmetic mean of each named parameter over the given
/// savepoints (denominator = list length). A single savepoint passes
/// through bitwise unchanged. Sums accumulate in `f64` so the result is
/// independent of list order.
pub fn average_parameters<T: Element>(savepoints: &[Savepoint<T>]) -> Result<Savepoint<T>> {
    let Some(first) = savepoints.first() else {
        return Err(Error::contract("cannot average zero savepoints"));
    };
    if savepoints.len() == 1 {
        let mut out = first.clone();
        out.label = format!("avg({})", first.label);
        return Ok(out);
    }
    for sp in &savepoints[1..] {
        if sp.config != first.config {
            return Err(Error::contract(format!(
                "savepoint {:?} has a different config than {:?}",
                sp.label, first.label
            )));
        }
        if sp.target_vocab != first.target_vocab
            || sp.source_vocab != first.source_vocab
            || sp.char_vocab != first.char_vocab
        {
            return Err(Error::contract(format!(
                "savepoint {:?} has different vocabularies than {:?}",
                sp.label, first.label
            )));
        }
        if sp.params.len() != first.params.len() {
            return Err(Error::contract(format!(
                "savepoint {:?} has {} parameters, {:?} has {}",
                sp.label,
                sp.params.len(),
                first.label,
                first.params.len()
            )));
        }
    }

    let mut params = Parameters::new();
    let scale = 1.0 / savepoints.len() as f64;
    for p in first.params.iter() {
        let mut acc = vec![0.0f64; p.value().numel()];
        for sp in savepoints {
            let q = sp.params.by_name(p.name()).ok_or_else(|| {
                Error::contract(format!("parameter {:?} missing from savepoint {:?}", p.name(), sp.label))
            })?;
            if q.value().shape() != p.value().shape() {
                return Err(Error::contract(format!(
                    "parameter {:?} has shape {:?} in {:?} but {:?} in {:?}",
                    p.name(),
                    q.value().shape(),
                    sp.label,
                    p.value().shape(),
                    first.label
                )));
            }
            for (a, v) in acc.iter_mut().zip(q.value().data()) {
                *a += v.as_f64();
            }
        }
        let mean: Vec<T> = acc.into_iter().map(|a| T::from_f64(a * scale)).collect();
        params.register(p.name().to_string(), Tensor::from_vec(p.value().shape().to_vec(), mean)?)?;
    }

    let labels: Vec<&str> = savepoints.iter().map(|sp| sp.label.as_str()).collect();
    Ok(Savepoint {
        label: format!("avg({})", labels.join("+")),
        batches: savepoints.iter().map(|sp| sp.batches).max().unwrap_or(0),
        config: first.config.clone(),
        source_vocab: first.source_vocab.clone(),
        char_vocab: first.char_vocab.clone(),
        target_vocab: first.target_vocab.clone(),
        params,
        scores: None,
    })
}

/// Picks the savepoint with the best heldout chrF3 score; ties break
/// toward the latest savepoint. All savepoints must be scored.
pub fn select_best_savepoint<T: Element>(savepoints: &[Savepoint<T>]) -> Result<&Savepoint<T>> {
    if savepoints.is_empty() {
        return Err(Error::contract("cannot select from zero savepoints"));
    }
    let mut best: Option<(&Savepoint<T>, f64)> = None;
    for sp in savepoints {
        let scores = sp.scores.as_ref().ok_or_else(|| {
            Error::contract(format!("savepoint {:?} has no heldout scores", sp.label))
        })?;
        best = match best {
            Some((_, s)) if s > scores.chrf3 => best,
            _ => Some((sp, scores.chrf3)),
        };
    }
    Ok(best.expect("nonempty list").0)
}
