//! Data-mixing regimes for parallel plus backtranslated corpora.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// How parallel and synthetic (backtranslated) data combine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixRegime {
    /// Parallel data only.
    None,
    /// Synthetic data only.
    Only,
    /// Parallel plus synthetic sampled down to the parallel size.
    Balanced,
    /// Parallel plus all synthetic.
    All,
}

impl std::str::FromStr for MixRegime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_lowercase().as_str() {
            "none" => Ok(MixRegime::None),
            "only" => Ok(MixRegime::Only),
            "balanced" => Ok(MixRegime::Balanced),
            "all" => Ok(MixRegime::All),
            other => Err(Error::parameter(format!("unknown mix regime {other:?}"))),
        }
    }
}

/// A regime plus the two corpora it draws from, as aligned line pairs.
#[derive(Clone, Debug)]
pub struct DataMix {
    pub regime: MixRegime,
    pub parallel: Vec<(String, String)>,
    pub synthetic: Vec<(String, String)>,
}

/// Produces the training corpus for the regime, parallel lines first.
/// Balanced samples the synthetic corpus uniformly without replacement
/// (keeping corpus order); when the synthetic corpus is smaller than the
/// parallel one, all of it is used with a warning. Deterministic in `seed`.
pub fn mix(data: &DataMix, seed: u64) -> Result<Vec<(String, String)>> {
    match data.regime {
        MixRegime::None | MixRegime::Balanced | MixRegime::All => {
            if data.parallel.is_empty() {
                return Err(Error::parameter(format!(
                    "mix regime {:?} requires a parallel corpus",
                    data.regime
                )));
            }
        }
        MixRegime::Only => {
            if data.synthetic.is_empty() {
                return Err(Error::parameter("mix regime Only requires a synthetic corpus"));
            }
        }
    }
    Ok(match data.regime {
        MixRegime::None => data.parallel.clone(),
        MixRegime::Only => data.synthetic.clone(),
        MixRegime::All => {
            let mut out = data.parallel.clone();
            out.extend(data.synthetic.iter().cloned());
            out
        }
        MixRegime::Balanced => {
            let mut out = data.parallel.clone();
            if data.synthetic.len() <= data.parallel.len() {
                if data.synthetic.len() < data.parallel.len() {
                    log::warn!(
                        "balanced mix wants {} synthetic pairs but only {} exist; using all",
                        data.parallel.len(),
                        data.synthetic.len()
                    );
                }
                out.extend(data.synthetic.iter().cloned());
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut indices: Vec<usize> = (0..data.synthetic.len()).collect();
                indices.shuffle(&mut rng);
                let mut picked: Vec<usize> = indices[..data.parallel.len()].to_vec();
                picked.sort_unstable();
                out.extend(picked.into_iter().map(|i| data.synthetic[i].clone()));
            }
            out
        }
    })
}
