//! Adam optimizer with bias correction over a fixed list of parameter
//! tensors.

use crate::error::{FerError, Result};
use crate::model::FerNetwork;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

use super::TrainConfig;

/// First- and second-moment accumulators aligned index-for-index with the
/// parameter list passed to every [`adam_step`] call, plus the step count.
#[derive(Debug, Clone)]
pub struct AdamState<F: Scalar> {
    m: Vec<Vec<F>>,
    v: Vec<Vec<F>>,
    step: u64,
}

impl<F: Scalar> AdamState<F> {
    /// Zeroed state for parameters of the given element counts.
    pub fn new(sizes: &[usize]) -> Self {
        AdamState {
            m: sizes.iter().map(|&s| vec![F::zero(); s]).collect(),
            v: sizes.iter().map(|&s| vec![F::zero(); s]).collect(),
            step: 0,
        }
    }

    /// Zeroed state matching a network's trainable tensors in their
    /// canonical order.
    pub fn for_network(net: &FerNetwork<F>) -> Self {
        let sizes: Vec<usize> = net.named_trainable().iter().map(|(_, t)| t.len()).collect();
        Self::new(&sizes)
    }

    /// Number of completed optimizer steps.
    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam update. Every parameter must carry a gradient of
/// its own length, and every gradient entry must be finite; otherwise no
/// parameter or state entry is touched.
pub fn adam_step<F: Scalar>(
    params: &mut [&mut Tensor<F>],
    state: &mut AdamState<F>,
    config: &TrainConfig,
) -> Result<()> {
    if params.len() != state.m.len() {
        return Err(FerError::shape(
            "adam_step",
            format!("{} parameters for state of {}", params.len(), state.m.len()),
        ));
    }
    for (i, p) in params.iter().enumerate() {
        let grad = p
            .grad()
            .ok_or_else(|| FerError::invalid(format!("parameter {i} has no gradient")))?;
        if grad.len() != state.m[i].len() {
            return Err(FerError::shape(
                "adam_step",
                format!("parameter {i}: gradient length {} vs state {}", grad.len(), state.m[i].len()),
            ));
        }
        if !grad.iter().all(|g| g.is_finite()) {
            return Err(FerError::non_finite(format!("gradient of parameter {i}")));
        }
    }

    state.step += 1;
    let t = state.step as i32;
    let beta1 = F::from_f64(config.beta1);
    let beta2 = F::from_f64(config.beta2);
    let one_minus_beta1 = F::one() - beta1;
    let one_minus_beta2 = F::one() - beta2;
    let correction1 = F::from_f64(1.0 - config.beta1.powi(t));
    let correction2 = F::from_f64(1.0 - config.beta2.powi(t));
    let lr = F::from_f64(config.learning_rate);
    let eps = F::from_f64(config.epsilon);

    for (i, p) in params.iter_mut().enumerate() {
        let (data, grad) = p.data_and_grad();
        let grad = grad.expect("validated above");
        let m = &mut state.m[i];
        let v = &mut state.v[i];
        for j in 0..data.len() {
            let g = grad[j];
            m[j] = beta1 * m[j] + one_minus_beta1 * g;
            v[j] = beta2 * v[j] + one_minus_beta2 * g * g;
            let m_hat = m[j] / correction1;
            let v_hat = v[j] / correction2;
            data[j] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}
