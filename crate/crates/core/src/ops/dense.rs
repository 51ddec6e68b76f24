//! Fully-connected layer: `out = input * weight^T + bias` over a batch of
//! row vectors.

use crate::error::{FerError, Result};
use crate::scalar::Scalar;
use crate::tensor::{axpy, dot, Tensor};

fn check_dims<F: Scalar>(
    input: &Tensor<F>,
    weight: &Tensor<F>,
    bias: Option<&Tensor<F>>,
) -> Result<(usize, usize, usize)> {
    let &[n, d_in] = input.shape() else {
        return Err(FerError::shape(
            "dense",
            format!("input must be [N,Din], got {:?}", input.shape()),
        ));
    };
    let &[d_out, w_in] = weight.shape() else {
        return Err(FerError::shape(
            "dense",
            format!("weight must be [Dout,Din], got {:?}", weight.shape()),
        ));
    };
    if w_in != d_in {
        return Err(FerError::shape(
            "dense",
            format!("input width {d_in} does not match weight width {w_in}"),
        ));
    }
    if let Some(b) = bias {
        if b.shape() != [d_out] {
            return Err(FerError::shape(
                "dense",
                format!("bias must be [{d_out}], got {:?}", b.shape()),
            ));
        }
    }
    Ok((n, d_in, d_out))
}

/// Forward pass: `out[n,o] = bias[o] + dot(input[n,:], weight[o,:])`.
/// Weight rows are output units, so each output is a dot of two contiguous
/// slices.
pub fn dense<F: Scalar>(input: &Tensor<F>, weight: &Tensor<F>, bias: &Tensor<F>) -> Result<Tensor<F>> {
    let (n, d_in, d_out) = check_dims(input, weight, Some(bias))?;
    let mut out = Vec::with_capacity(n * d_out);
    for ni in 0..n {
        let row = &input.data()[ni * d_in..][..d_in];
        for o in 0..d_out {
            let w_row = &weight.data()[o * d_in..][..d_in];
            out.push(bias.data()[o] + dot(row, w_row));
        }
    }
    Tensor::new(vec![n, d_out], out)
}

/// Gradients of [`dense`]: returns `(d_input, d_weight, d_bias)`.
pub fn dense_backward<F: Scalar>(
    input: &Tensor<F>,
    weight: &Tensor<F>,
    grad_out: &Tensor<F>,
) -> Result<(Tensor<F>, Tensor<F>, Tensor<F>)> {
    let (n, d_in, d_out) = check_dims(input, weight, None)?;
    if grad_out.shape() != [n, d_out] {
        return Err(FerError::shape(
            "dense_backward",
            format!("grad shape {:?} does not match [{n},{d_out}]", grad_out.shape()),
        ));
    }
    let mut d_input = vec![F::zero(); n * d_in];
    let mut d_weight = vec![F::zero(); d_out * d_in];
    let mut d_bias = vec![F::zero(); d_out];
    for ni in 0..n {
        let x_row = &input.data()[ni * d_in..][..d_in];
        let g_row = &grad_out.data()[ni * d_out..][..d_out];
        let dx_row = &mut d_input[ni * d_in..][..d_in];
        for o in 0..d_out {
            let g = g_row[o];
            d_bias[o] += g;
            axpy(g, &weight.data()[o * d_in..][..d_in], dx_row);
            axpy(g, x_row, &mut d_weight[o * d_in..][..d_in]);
        }
    }
    Ok((
        Tensor::new(vec![n, d_in], d_input)?,
        Tensor::new(vec![d_out, d_in], d_weight)?,
        Tensor::new(vec![d_out], d_bias)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Triple-loop evaluation of the defining sums, used as the oracle.
    fn dense_oracle(input: &Tensor<f64>, weight: &Tensor<f64>, bias: &Tensor<f64>) -> Tensor<f64> {
        let [n, d_in] = *input.shape() else { panic!() };
        let [d_out, _] = *weight.shape() else { panic!() };
        let mut out = Tensor::zeros(vec![n, d_out]);
        for ni in 0..n {
            for o in 0..d_out {
                let mut acc = bias.data()[o];
                for i in 0..d_in {
                    acc += input.at(&[ni, i]) * weight.at(&[o, i]);
                }
                out.data_mut()[ni * d_out + o] = acc;
            }
        }
        out
    }

    fn fill(t: &mut Tensor<f64>, phase: f64) {
        for (i, v) in t.data_mut().iter_mut().enumerate() {
            *v = (i as f64 * 0.61 + phase).sin();
        }
    }

    #[test]
    fn matches_triple_loop_oracle() {
        for (n, d_in, d_out) in [(1, 1, 1), (2, 3, 4), (3, 7, 5), (2, 9, 2)] {
            let mut input = Tensor::zeros(vec![n, d_in]);
            let mut weight = Tensor::zeros(vec![d_out, d_in]);
            let mut bias = Tensor::zeros(vec![d_out]);
            fill(&mut input, 0.1);
            fill(&mut weight, 1.7);
            fill(&mut bias, 2.9);
            let got = dense(&input, &weight, &bias).unwrap();
            let want = dense_oracle(&input, &weight, &bias);
            for (a, b) in got.data().iter().zip(want.data()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hand_worked_example() {
        let input = Tensor::new(vec![1, 2], vec![2.0, -1.0]).unwrap();
        let weight = Tensor::new(vec![2, 2], vec![1.0, 0.5, -2.0, 3.0]).unwrap();
        let bias = Tensor::new(vec![2], vec![0.25, 1.0]).unwrap();
        let out = dense(&input, &weight, &bias).unwrap();
        assert_eq!(out.data(), &[2.0 - 0.5 + 0.25, -4.0 - 3.0 + 1.0]);
    }

    #[test]
    fn backward_matches_central_differences() {
        let mut input = Tensor::zeros(vec![2, 3]);
        let mut weight = Tensor::zeros(vec![4, 3]);
        let mut bias = Tensor::zeros(vec![4]);
        fill(&mut input, 0.3);
        fill(&mut weight, 1.1);
        fill(&mut bias, 2.2);
        let proj: Vec<f64> = (0..8).map(|i| ((i * 3 + 1) as f64 * 0.27).cos()).collect();

        let loss = |x: &Tensor<f64>, w: &Tensor<f64>, b: &Tensor<f64>| -> f64 {
            let out = dense(x, w, b).unwrap();
            out.data().iter().zip(&proj).map(|(a, p)| a * p).sum()
        };

        let grad = Tensor::new(vec![2, 4], proj.clone()).unwrap();
        let (dx, dw, db) = dense_backward(&input, &weight, &grad).unwrap();
        let h = 1e-6;
        for i in 0..input.len() {
            let mut p = input.clone();
            p.data_mut()[i] += h;
            let mut m = input.clone();
            m.data_mut()[i] -= h;
            let num = (loss(&p, &weight, &bias) - loss(&m, &weight, &bias)) / (2.0 * h);
            assert!((num - dx.data()[i]).abs() < 1e-7);
        }
        for i in 0..weight.len() {
            let mut p = weight.clone();
            p.data_mut()[i] += h;
            let mut m = weight.clone();
            m.data_mut()[i] -= h;
            let num = (loss(&input, &p, &bias) - loss(&input, &m, &bias)) / (2.0 * h);
            assert!((num - dw.data()[i]).abs() < 1e-7);
        }
        for i in 0..bias.len() {
            let mut p = bias.clone();
            p.data_mut()[i] += h;
            let mut m = bias.clone();
            m.data_mut()[i] -= h;
            let num = (loss(&input, &weight, &p) - loss(&input, &weight, &m)) / (2.0 * h);
            assert!((num - db.data()[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn rejects_mismatched_widths() {
        let input = Tensor::<f64>::zeros(vec![2, 3]);
        let weight = Tensor::<f64>::zeros(vec![4, 5]);
        let bias = Tensor::<f64>::zeros(vec![4]);
        assert!(dense(&input, &weight, &bias).is_err());
    }
}
