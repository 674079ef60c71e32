//! Proper ensembling (averaged output distributions), optionally over
//! parameter-averaged groups of savepoints.

use super::StepModel;
use crate::error::{Error, Result};
use crate::model::{average_parameters, Savepoint, TranslationModel};
use crate::tensor::Element;

/// Arithmetic mean of probability distributions, accumulated in `f64`.
/// Member distributions must share one vocabulary.
pub fn average_distributions(dists: &[Vec<f64>]) -> Result<Vec<f64>> {
    let Some(first) = dists.first() else {
        return Err(Error::contract("ensemble of zero distributions"));
    };
    for d in dists {
        if d.len() != first.len() {
            return Err(Error::contract(format!(
                "vocabulary mismatch across ensemble members: {} vs {}",
                first.len(),
                d.len()
            )));
        }
    }
    let scale = 1.0 / dists.len() as f64;
    let mut out = vec![0.0f64; first.len()];
    for d in dists {
        for (o, &v) in out.iter_mut().zip(d.iter()) {
            *o += v;
        }
    }
    for o in &mut out {
        *o *= scale;
    }
    Ok(out)
}

/// Ensemble of step models: each step averages the members' probability
/// distributions (in probability space) and their attention weights.
pub struct EnsembleDecoder<M: StepModel> {
    members: Vec<M>,
}

impl<M: StepModel> EnsembleDecoder<M> {
    pub fn new(members: Vec<M>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::contract("ensemble needs at least one member"));
        };
        for m in &members {
            if m.vocab_size() != first.vocab_size() || m.eos_id() != first.eos_id() {
                return Err(Error::contract("ensemble members disagree on the target vocabulary"));
            }
        }
        Ok(EnsembleDecoder { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl<M: StepModel> StepModel for EnsembleDecoder<M> {
    type State = Vec<M::State>;

    fn start(&self) -> Self::State {
        self.members.iter().map(|m| m.start()).collect()
    }

    fn vocab_size(&self) -> usize {
        self.members[0].vocab_size()
    }

    fn eos_id(&self) -> u32 {
        self.members[0].eos_id()
    }

    fn step(&self, state: &Self::State, prev: Option<u32>) -> (Vec<f64>, Vec<f64>, Self::State) {
        let mut dists = Vec::with_capacity(self.members.len());
        let mut attentions = Vec::with_capacity(self.members.len());
        let mut next_states = Vec::with_capacity(self.members.len());
        for (m, s) in self.members.iter().zip(state.iter()) {
            let (p, a, n) = m.step(s, prev);
            dists.push(p);
            attentions.push(a);
            next_states.push(n);
        }
        let probs = average_distributions(&dists).expect("members validated at construction");
        let attention = average_distributions(&attentions).unwrap_or_default();
        (probs, attention, next_states)
    }
}

/// Declares how savepoints combine: parameters are averaged within each
/// group, and the group models form a proper ensemble.
#[derive(Clone, Debug)]
pub struct EnsembleSpec<T: Element = f32> {
    pub groups: Vec<Vec<Savepoint<T>>>,
}

impl<T: Element> EnsembleSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::contract("ensemble spec needs at least one group"));
        }
        if self.groups.iter().any(|g| g.is_empty()) {
            return Err(Error::contract("ensemble spec has an empty group"));
        }
        Ok(())
    }
}

/// Averages each group and instantiates one model per group. All groups
/// must share one target vocabulary.
pub fn build_ensemble_models<T: Element>(spec: &EnsembleSpec<T>) -> Result<Vec<TranslationModel<T>>> {
    spec.validate()?;
    let mut models = Vec::with_capacity(spec.groups.len());
    for group in &spec.groups {
        let averaged = average_parameters(group)?;
        models.push(TranslationModel::from_savepoint(&averaged)?);
    }
    let first = &models[0];
    for m in &models[1..] {
        if m.target_vocab() != first.target_vocab() {
            return Err(Error::contract("ensemble groups disagree on the target vocabulary"));
        }
    }
    Ok(models)
}

/// Per-sentence ensemble decoder over already-built group models.
pub fn ensemble_decoder<'a, T: Element>(
    models: &'a [TranslationModel<T>],
    src_tokens: &[String],
) -> Result<EnsembleDecoder<crate::model::ModelDecoder<'a, T>>> {
    let members = models.iter().map(|m| m.decoder(src_tokens)).collect::<Result<Vec<_>>>()?;
    EnsembleDecoder::new(members)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct OneHot {
        target: usize,
        vocab: usize,
    }

    impl StepModel for OneHot {
        type State = ();
        fn start(&self) {}
        fn vocab_size(&self) -> usize {
            self.vocab
        }
        fn eos_id(&self) -> u32 {
            0
        }
        fn step(&self, _: &(), _: Option<u32>) -> (Vec<f64>, Vec<f64>, ()) {
            let mut p = vec![0.0; self.vocab];
            p[self.target] = 1.0;
            (p, vec![1.0], ())
        }
    }

    #[test]
    fn two_one_hot_models_average_to_half_half() {
        let ens = EnsembleDecoder::new(vec![
            OneHot { target: 1, vocab: 4 },
            OneHot { target: 2, vocab: 4 },
        ])
        .unwrap();
        let (p, _, _) = ens.step(&ens.start(), None);
        assert_eq!(p, vec![0.0, 0.5, 0.5, 0.0]);
    }

    #[test]
    fn identical_members_match_single_model() {
        let single = OneHot { target: 2, vocab: 5 };
        let (p_single, _, _) = single.step(&(), None);
        let ens = EnsembleDecoder::new((0..4).map(|_| OneHot { target: 2, vocab: 5 }).collect::<Vec<_>>())
            .unwrap();
        let (p_ens, _, _) = ens.step(&ens.start(), None);
        for (a, b) in p_ens.iter().zip(&p_single) {
            assert!((a - b).abs() <= 1e-6);
        }
    }

    #[test]
    fn averaging_is_permutation_invariant_and_normalized() {
        let dists = vec![
            vec![0.7, 0.2, 0.1],
            vec![0.1, 0.8, 0.1],
            vec![0.3, 0.3, 0.4],
        ];
        let forward = average_distributions(&dists).unwrap();
        let reversed: Vec<Vec<f64>> = dists.iter().rev().cloned().collect();
        let backward = average_distributions(&reversed).unwrap();
        for (a, b) in forward.iter().zip(&backward) {
            assert!((a - b).abs() < 1e-15);
        }
        let sum: f64 = forward.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-6);
        // Direct (1/3) sum check.
        for k in 0..3 {
            let want = (dists[0][k] + dists[1][k] + dists[2][k]) / 3.0;
            assert!((forward[k] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn vocabulary_mismatch_is_a_contract_error() {
        let err = EnsembleDecoder::new(vec![
            OneHot { target: 0, vocab: 3 },
            OneHot { target: 0, vocab: 4 },
        ])
        .err()
        .expect("mismatched vocabularies must be rejected");
        assert!(err.to_string().contains("vocabulary"));
    }
}
