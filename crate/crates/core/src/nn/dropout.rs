//! Variational dropout: one mask per sequence, reused at every timestep.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{Element, NodeId, Tape, Tensor};

/// A fixed dropout mask. Entries are 0 or `1 / keep_prob`, so the masked
/// value has expectation equal to the input. Applying the same mask object
/// at every timestep gives the variational scheme.
#[derive(Clone, Debug)]
pub struct DropoutMask<T: Element = f32> {
    keep_prob: T,
    mask: Tensor<T>,
}

impl<T: Element> DropoutMask<T> {
    pub fn keep_prob(&self) -> T {
        self.keep_prob
    }

    pub fn mask(&self) -> &Tensor<T> {
        &self.mask
    }

    /// Multiplies `x` elementwise by the mask.
    pub fn apply(&self, tape: &mut Tape<T>, x: NodeId) -> Result<NodeId> {
        let m = tape.input(self.mask.clone());
        tape.mul(x, m)
    }
}

/// Samples a Bernoulli(keep_prob) mask scaled by `1 / keep_prob`.
pub fn sample_mask<T: Element>(
    keep_prob: f64,
    shape: &[usize],
    rng: &mut impl Rng,
) -> Result<DropoutMask<T>> {
    if keep_prob <= 0.0 || keep_prob > 1.0 {
        return Err(Error::parameter(format!("keep_prob {keep_prob} outside (0, 1]")));
    }
    let numel: usize = shape.iter().product();
    let scale = T::from_f64(1.0 / keep_prob);
    let data: Vec<T> = (0..numel)
        .map(|_| if rng.random_range(0.0..1.0) < keep_prob { scale } else { T::zero() })
        .collect();
    Ok(DropoutMask { keep_prob: T::from_f64(keep_prob), mask: Tensor::from_vec(shape.to_vec(), data)? })
}
