//! Finite-difference verification of the tape's backward pass.

use super::params::Parameters;
use super::tape::{NodeId, Tape};
use super::{Element, Tensor};
use crate::error::{Error, Result};

/// Anything owning a parameter set that a loss can be built from: a bare
/// [`Parameters`] collection or a whole model.
pub trait HasParameters<T: Element> {
    fn parameters(&self) -> &Parameters<T>;
    fn parameters_mut(&mut self) -> &mut Parameters<T>;
}

impl<T: Element> HasParameters<T> for Parameters<T> {
    fn parameters(&self) -> &Parameters<T> {
        self
    }
    fn parameters_mut(&mut self) -> &mut Parameters<T> {
        self
    }
}

/// Outcome of a [`grad_check`] run.
#[derive(Debug)]
pub struct GradCheckReport {
    /// Largest relative error across all scalar parameters.
    pub max_rel_err: f64,
    /// Parameter name and flat index where the maximum occurred, with the
    /// analytic and numeric values.
    pub worst: Option<(String, usize, f64, f64)>,
    /// Scalar parameters compared.
    pub compared: usize,
}

/// Compares analytic gradients against central finite differences, one
/// scalar parameter at a time.
///
/// `build` must assemble a scalar loss on the given tape from the owner's
/// parameters and be deterministic (dropout masks frozen); this is checked
/// by evaluating the loss twice. Relative error per scalar is
/// `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn grad_check<T, O, F>(owner: &mut O, step: T, build: F) -> Result<GradCheckReport>
where
    T: Element,
    O: HasParameters<T>,
    F: Fn(&O, &mut Tape<T>) -> Result<NodeId>,
{
    let eval = |owner: &O| -> Result<T> {
        let mut tape = Tape::new();
        let loss = build(owner, &mut tape)?;
        if !tape.value(loss).is_scalar() {
            return Err(Error::contract("grad_check requires a scalar loss"));
        }
        Ok(tape.value(loss).item())
    };

    let first = eval(owner)?;
    let second = eval(owner)?;
    if first != second {
        return Err(Error::contract(format!(
            "loss function is not deterministic: {first} vs {second}"
        )));
    }

    owner.parameters_mut().zero_grads();
    let mut tape = Tape::new();
    let loss = build(owner, &mut tape)?;
    tape.backward(loss, owner.parameters_mut())?;
    let analytic: Vec<(String, Tensor<T>)> = owner
        .parameters()
        .iter()
        .map(|p| (p.name().to_string(), p.grad().clone()))
        .collect();

    let h = step.as_f64();
    let mut report = GradCheckReport { max_rel_err: 0.0, worst: None, compared: 0 };
    for (name, grads) in &analytic {
        let id = owner.parameters().id_of(name).expect("parameter still registered");
        for k in 0..grads.numel() {
            let original = owner.parameters().get(id).value().data()[k];
            owner.parameters_mut().get_mut(id).value_mut().data_mut()[k] = original + step;
            let plus = eval(owner)?.as_f64();
            owner.parameters_mut().get_mut(id).value_mut().data_mut()[k] = original - step;
            let minus = eval(owner)?.as_f64();
            owner.parameters_mut().get_mut(id).value_mut().data_mut()[k] = original;

            let numeric = (plus - minus) / (2.0 * h);
            let a = grads.data()[k].as_f64();
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            report.compared += 1;
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst = Some((name.clone(), k, a, numeric));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_function_gradient() {
        let mut params = Parameters::<f64>::new();
        params.register("x", Tensor::scalar(3.0)).unwrap();
        let report = grad_check(&mut params, 1e-3, |p, tape| {
            let x = tape.param(p.by_name("x").unwrap());
            tape.mul(x, x)
        })
        .unwrap();
        // Analytic 6 vs numeric ~6.
        let (_, _, a, n) = report.worst.clone().unwrap();
        assert!((a - 6.0).abs() < 1e-9);
        assert!((n - 6.0).abs() < 1e-6);
        assert!(report.max_rel_err <= 1e-4, "rel err {}", report.max_rel_err);
    }

    #[test]
    fn non_deterministic_loss_is_rejected() {
        use std::cell::Cell;
        let mut params = Parameters::<f64>::new();
        params.register("x", Tensor::scalar(1.0)).unwrap();
        let counter = Cell::new(0.0f64);
        let err = grad_check(&mut params, 1e-3, |p, tape| {
            counter.set(counter.get() + 1.0);
            let x = tape.param(p.by_name("x").unwrap());
            Ok(tape.scale(x, counter.get()))
        })
        .unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }
}
