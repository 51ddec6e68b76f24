//! Categorical cross-entropy over probability rows and its fused gradient
//! through the softmax.

use crate::error::{FerError, Result};
use crate::ops::softmax;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

const LOG_FLOOR: f64 = 1e-12;

fn check_rows<F: Scalar>(probs: &Tensor<F>, labels: &[usize]) -> Result<(usize, usize)> {
    let (n, k) = match *probs.shape() {
        [n, k] => (n, k),
        _ => {
            return Err(FerError::shape(
                "cross_entropy",
                format!("expected [N, K] probabilities, got {:?}", probs.shape()),
            ))
        }
    };
    if labels.len() != n {
        return Err(FerError::shape(
            "cross_entropy",
            format!("{} labels for {} rows", labels.len(), n),
        ));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(FerError::invalid(format!("label {bad} outside 0..{k}")));
    }
    Ok((n, k))
}

/// Mean negative log-likelihood of the true classes, with each probability
/// clamped to at least `1e-12` before the log.
pub fn cross_entropy<F: Scalar>(probs: &Tensor<F>, labels: &[usize]) -> Result<F> {
    let (n, k) = check_rows(probs, labels)?;
    let floor = F::from_f64(LOG_FLOOR);
    let mut total = F::zero();
    for (i, &label) in labels.iter().enumerate() {
        total -= probs.data()[i * k + label].max(floor).ln();
    }
    Ok(total / F::from_usize(n))
}

/// Gradient of `cross_entropy ∘ softmax` with respect to the logits:
/// `(probs − onehot(labels)) / N`.
pub fn softmax_cross_entropy_grad<F: Scalar>(
    probs: &Tensor<F>,
    labels: &[usize],
) -> Result<Tensor<F>> {
    let (n, k) = check_rows(probs, labels)?;
    let inv_n = F::one() / F::from_usize(n);
    let mut grad = probs.clone();
    for (i, &label) in labels.iter().enumerate() {
        let row = &mut grad.data_mut()[i * k..(i + 1) * k];
        row[label] -= F::one();
        for g in row.iter_mut() {
            *g *= inv_n;
        }
    }
    Ok(grad)
}

/// Softmaxes the logits, then returns the loss together with the logit
/// gradient.
pub fn softmax_cross_entropy<F: Scalar>(
    logits: &Tensor<F>,
    labels: &[usize],
) -> Result<(F, Tensor<F>)> {
    let probs = softmax(logits)?;
    let loss = cross_entropy(&probs, labels)?;
    let grad = softmax_cross_entropy_grad(&probs, labels)?;
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certain_correct_prediction_has_zero_loss() {
        let probs = Tensor::new(vec![1, 3], vec![0.0, 1.0, 0.0]).unwrap();
        let loss: f64 = cross_entropy(&probs, &[1]).unwrap();
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn uniform_prediction_over_seven_classes_costs_ln_seven() {
        let probs = Tensor::new(vec![2, 7], vec![1.0 / 7.0; 14]).unwrap();
        let loss: f64 = cross_entropy(&probs, &[3, 6]).unwrap();
        assert!((loss - (7.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_is_clamped_to_a_finite_loss() {
        let probs = Tensor::new(vec![1, 2], vec![0.0, 1.0]).unwrap();
        let loss: f64 = cross_entropy(&probs, &[0]).unwrap();
        assert!((loss - (-(1e-12f64).ln())).abs() < 1e-9);
    }

    #[test]
    fn loss_matches_a_direct_log_sum_exp_evaluation() {
        let logits = Tensor::new(
            vec![3, 4],
            vec![0.3, -1.2, 2.0, 0.7, -0.5, 0.0, 1.1, -2.2, 4.0, 3.9, -0.1, 0.2],
        )
        .unwrap();
        let labels = [2usize, 0, 1];
        let (loss, _) = softmax_cross_entropy(&logits, &labels).unwrap();
        let mut expected = 0.0f64;
        for (i, &label) in labels.iter().enumerate() {
            let row = &logits.data()[i * 4..(i + 1) * 4];
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + row.iter().map(|z| (z - m).exp()).sum::<f64>().ln();
            expected += lse - row[label];
        }
        expected /= 3.0;
        assert!(
            ((loss - expected) / expected).abs() < 1e-10,
            "loss {loss} vs direct {expected}"
        );
    }

    #[test]
    fn logit_gradient_matches_central_differences() {
        let logits =
            Tensor::<f64>::new(vec![2, 5], vec![0.4, -0.9, 1.3, 0.0, 2.1, -1.0, 0.6, 0.2, -0.3, 0.8])
                .unwrap();
        let labels = [4usize, 1];
        let (_, grad) = softmax_cross_entropy(&logits, &labels).unwrap();
        let h = 1e-6;
        for i in 0..logits.len() {
            let mut plus = logits.clone();
            plus.data_mut()[i] += h;
            let mut minus = logits.clone();
            minus.data_mut()[i] -= h;
            let (lp, _) = softmax_cross_entropy(&plus, &labels).unwrap();
            let (lm, _) = softmax_cross_entropy(&minus, &labels).unwrap();
            let numeric = (lp - lm) / (2.0 * h);
            assert!(
                (grad.data()[i] - numeric).abs() < 1e-8,
                "coordinate {i}: analytic {} vs numeric {numeric}",
                grad.data()[i]
            );
        }
    }

    #[test]
    fn gradient_rows_sum_to_zero() {
        let logits = Tensor::new(vec![2, 3], vec![0.1, 0.2, -0.4, 1.0, -1.0, 0.5]).unwrap();
        let (_, grad) = softmax_cross_entropy(&logits, &[0, 2]).unwrap();
        for i in 0..2 {
            let s: f64 = grad.data()[i * 3..(i + 1) * 3].iter().sum();
            assert!(s.abs() < 1e-12);
        }
    }

    #[test]
    fn bad_labels_and_shapes_are_rejected() {
        let probs = Tensor::new(vec![1, 3], vec![0.2, 0.3, 0.5]).unwrap();
        assert!(cross_entropy(&probs, &[3]).is_err());
        assert!(cross_entropy(&probs, &[0, 1]).is_err());
        let rank1 = Tensor::new(vec![3], vec![0.2, 0.3, 0.5]).unwrap();
        assert!(cross_entropy(&rank1, &[0]).is_err());
    }
}
