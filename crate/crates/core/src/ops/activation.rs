//! Element-wise activations and their gradients.

use crate::error::{FerError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// `max(x, 0)` element-wise, any shape.
pub fn relu<F: Scalar>(input: &Tensor<F>) -> Tensor<F> {
    input.map(|x| if x > F::zero() { x } else { F::zero() })
}

/// Gradient of [`relu`]: passes the upstream gradient where the *input* was
/// strictly positive, zero elsewhere (the kink at zero takes the left
/// derivative).
pub fn relu_backward<F: Scalar>(input: &Tensor<F>, grad_out: &Tensor<F>) -> Result<Tensor<F>> {
    if input.shape() != grad_out.shape() {
        return Err(FerError::shape(
            "relu_backward",
            format!("grad shape {:?} does not match input {:?}", grad_out.shape(), input.shape()),
        ));
    }
    let data = input
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&x, &g)| if x > F::zero() { g } else { F::zero() })
        .collect();
    Tensor::new(input.shape().to_vec(), data)
}

/// Logistic sigmoid, computed in the numerically stable branch form so large
/// negative inputs never evaluate `exp` of a large positive argument.
pub fn sigmoid<F: Scalar>(input: &Tensor<F>) -> Tensor<F> {
    input.map(|x| {
        if x >= F::zero() {
            F::one() / (F::one() + (-x).exp())
        } else {
            let e = x.exp();
            e / (F::one() + e)
        }
    })
}

/// Gradient of [`sigmoid`] expressed through its *output*:
/// `g * y * (1 - y)`.
pub fn sigmoid_backward<F: Scalar>(output: &Tensor<F>, grad_out: &Tensor<F>) -> Result<Tensor<F>> {
    if output.shape() != grad_out.shape() {
        return Err(FerError::shape(
            "sigmoid_backward",
            format!("grad shape {:?} does not match output {:?}", grad_out.shape(), output.shape()),
        ));
    }
    let data = output
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&y, &g)| g * y * (F::one() - y))
        .collect();
    Tensor::new(output.shape().to_vec(), data)
}
