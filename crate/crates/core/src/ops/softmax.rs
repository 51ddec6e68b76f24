//! Row-wise softmax with the max-subtraction trick, so arbitrarily large
//! finite logits cannot overflow.

use crate::error::{FerError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Softmax over the last axis of a `[N,K]` tensor. Each row of the output is
/// strictly positive and sums to 1 (up to rounding).
pub fn softmax<F: Scalar>(logits: &Tensor<F>) -> Result<Tensor<F>> {
    let &[n, k] = logits.shape() else {
        return Err(FerError::shape(
            "softmax",
            format!("expected [N,K], got {:?}", logits.shape()),
        ));
    };
    if !logits.all_finite() {
        return Err(FerError::non_finite("softmax input"));
    }
    let mut out = vec![F::zero(); n * k];
    for ni in 0..n {
        let row = &logits.data()[ni * k..][..k];
        let mut m = row[0];
        for &v in &row[1..] {
            if v > m {
                m = v;
            }
        }
        let mut sum = F::zero();
        let dst = &mut out[ni * k..][..k];
        for (d, &v) in dst.iter_mut().zip(row) {
            let e = (v - m).exp();
            *d = e;
            sum += e;
        }
        for d in dst.iter_mut() {
            *d /= sum;
        }
    }
    Tensor::new(vec![n, k], out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_sum_to_one_and_order_is_preserved() {
        let logits = Tensor::new(vec![2, 3], vec![1.0, 2.0, 3.0, -5.0, 0.0, -5.0]).unwrap();
        let p = softmax(&logits).unwrap();
        for ni in 0..2 {
            let row = &p.data()[ni * 3..][..3];
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
        assert!(p.at(&[0, 2]) > p.at(&[0, 1]) && p.at(&[0, 1]) > p.at(&[0, 0]));
        assert!((p.at(&[1, 0]) - p.at(&[1, 2])).abs() < 1e-15);
    }

    #[test]
    fn uniform_logits_give_uniform_distribution() {
        let logits = Tensor::<f64>::filled(vec![1, 7], 3.25);
        let p = softmax(&logits).unwrap();
        for &v in p.data() {
            assert!((v - 1.0 / 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_two_class() {
        let logits = Tensor::new(vec![1, 2], vec![2.0, 0.0]).unwrap();
        let p = softmax(&logits).unwrap();
        let want = 1.0 / (1.0 + (-2.0f64).exp());
        assert!((p.data()[0] - want).abs() < 1e-12);
    }

    #[test]
    fn extreme_logits_stay_finite() {
        let logits = Tensor::<f64>::new(vec![1, 3], vec![1e4, -1e4, 0.0]).unwrap();
        let p = softmax(&logits).unwrap();
        assert!(p.all_finite());
        assert!((p.data()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shift_invariance() {
        let a = Tensor::<f64>::new(vec![1, 3], vec![0.3, -1.2, 2.2]).unwrap();
        let b = a.map(|x| x + 100.0);
        let pa = softmax(&a).unwrap();
        let pb = softmax(&b).unwrap();
        for (x, y) in pa.data().iter().zip(pb.data()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_finite_logits() {
        let logits = Tensor::new(vec![1, 2], vec![f64::NAN, 0.0]).unwrap();
        assert!(softmax(&logits).is_err());
    }
}
