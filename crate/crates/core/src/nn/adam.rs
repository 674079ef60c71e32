//! Adam optimizer with bias correction.

use crate::error::{Error, Result};
use crate::tensor::{Element, Parameters, Tensor};

#[derive(Clone, Copy, Debug)]
pub struct AdamConfig<T: Element = f32> {
    pub learning_rate: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
}

impl<T: Element> Default for AdamConfig<T> {
    fn default() -> Self {
        AdamConfig {
            learning_rate: T::from_f64(1e-3),
            beta1: T::from_f64(0.9),
            beta2: T::from_f64(0.999),
            epsilon: T::from_f64(1e-8),
        }
    }
}

/// Per-parameter first and second moment estimates plus the step counter.
#[derive(Clone, Debug)]
pub struct AdamState<T: Element = f32> {
    config: AdamConfig<T>,
    step: u64,
    names: Vec<String>,
    m: Vec<Tensor<T>>,
    v: Vec<Tensor<T>>,
}

impl<T: Element> AdamState<T> {
    /// Initializes zeroed moments for every parameter in the set.
    pub fn new(config: AdamConfig<T>, params: &Parameters<T>) -> Self {
        let names = params.iter().map(|p| p.name().to_string()).collect();
        let m = params.iter().map(|p| Tensor::zeros(p.value().shape().to_vec())).collect();
        let v = params.iter().map(|p| Tensor::zeros(p.value().shape().to_vec())).collect();
        AdamState { config, step: 0, names, m, v }
    }

    pub fn config(&self) -> &AdamConfig<T> {
        &self.config
    }

    pub fn steps_taken(&self) -> u64 {
        self.step
    }

    /// Applies one Adam update from the gradients currently held by
    /// `params`. Gradients are left untouched; the caller zeroes them.
    pub fn step(&mut self, params: &mut Parameters<T>) -> Result<()> {
        if params.len() != self.names.len() {
            return Err(Error::contract(format!(
                "optimizer state covers {} parameters, model has {}",
                self.names.len(),
                params.len()
            )));
        }
        self.step += 1;
        let one = T::one();
        let b1 = self.config.beta1;
        let b2 = self.config.beta2;
        let bias1 = one - b1.powi(self.step as i32);
        let bias2 = one - b2.powi(self.step as i32);
        for (i, p) in params.iter_mut().enumerate() {
            if p.name() != self.names[i] {
                return Err(Error::contract(format!(
                    "no optimizer state for parameter {:?} (state slot holds {:?})",
                    p.name(),
                    self.names[i]
                )));
            }
            let g = p.grad().clone();
            let m = self.m[i].data_mut();
            let v = self.v[i].data_mut();
            let value = p.value_mut().data_mut();
            for k in 0..g.numel() {
                let gk = g.data()[k];
                m[k] = b1 * m[k] + (one - b1) * gk;
                v[k] = b2 * v[k] + (one - b2) * gk * gk;
                let m_hat = m[k] / bias1;
                let v_hat = v[k] / bias2;
                value[k] = value[k] - self.config.learning_rate * m_hat / (v_hat.sqrt() + self.config.epsilon);
            }
        }
        Ok(())
    }
}
