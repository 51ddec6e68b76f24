//! Batch normalization over the channel axis for `[N,C]` and `[N,C,H,W]`
//! tensors. Training mode normalizes with biased batch statistics and folds
//! them into running estimates; inference mode is a pure function of the
//! running estimates.

use crate::error::{FerError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Variance floor inside the normalizing square root.
pub const BN_EPSILON: f64 = 1e-5;
/// Fraction of the previous running estimate retained per batch.
pub const BN_MOMENTUM: f64 = 0.9;

/// Per-channel view of a `[N,C]` or `[N,C,H,W]` tensor: `(batch, channels,
/// plane)` where `plane` is the number of elements per channel per sample.
fn bn_dims<F: Scalar>(input: &Tensor<F>, op: &'static str) -> Result<(usize, usize, usize)> {
    match *input.shape() {
        [n, c] => Ok((n, c, 1)),
        [n, c, h, w] => Ok((n, c, h * w)),
        _ => Err(FerError::shape(
            op,
            format!("expected [N,C] or [N,C,H,W], got {:?}", input.shape()),
        )),
    }
}

fn check_channel_vec<F: Scalar>(t: &Tensor<F>, c: usize, what: &str, op: &'static str) -> Result<()> {
    if t.shape() != [c] {
        return Err(FerError::shape(
            op,
            format!("{what} must be [{c}], got {:?}", t.shape()),
        ));
    }
    Ok(())
}

/// Values saved by the training-mode forward pass for the backward pass.
#[derive(Debug, Clone)]
pub struct BnCache<F: Scalar> {
    shape: Vec<usize>,
    inv_std: Vec<F>,
    xhat: Vec<F>,
}

fn for_each_channel_elem(n: usize, c: usize, plane: usize, ch: usize, mut f: impl FnMut(usize)) {
    for ni in 0..n {
        let base = (ni * c + ch) * plane;
        for p in 0..plane {
            f(base + p);
        }
    }
}

/// Training-mode batch normalization. Normalizes each channel by its batch
/// mean and biased variance, applies the affine `gamma * xhat + beta`, and
/// updates the running estimates in place:
/// `running = momentum * running + (1 - momentum) * batch`.
///
/// Requires at least two samples in the batch; statistics of a single sample
/// would zero the activations and detach the gradient.
pub fn batchnorm_train<F: Scalar>(
    input: &Tensor<F>,
    gamma: &Tensor<F>,
    beta: &Tensor<F>,
    running_mean: &mut Tensor<F>,
    running_var: &mut Tensor<F>,
    momentum: F,
) -> Result<(Tensor<F>, BnCache<F>)> {
    let (n, c, plane) = bn_dims(input, "batchnorm_train")?;
    if n < 2 {
        return Err(FerError::invalid(format!(
            "batchnorm_train needs a batch of at least 2 samples, got {n}"
        )));
    }
    check_channel_vec(gamma, c, "gamma", "batchnorm_train")?;
    check_channel_vec(beta, c, "beta", "batchnorm_train")?;
    check_channel_vec(running_mean, c, "running_mean", "batchnorm_train")?;
    check_channel_vec(running_var, c, "running_var", "batchnorm_train")?;

    let m = F::from_usize(n * plane);
    let eps = F::from_f64(BN_EPSILON);
    let mut out = vec![F::zero(); input.len()];
    let mut inv_std = vec![F::zero(); c];
    let mut xhat = vec![F::zero(); input.len()];

    for ch in 0..c {
        let mut sum = F::zero();
        for_each_channel_elem(n, c, plane, ch, |i| sum += input.data()[i]);
        let mean = sum / m;
        let mut var_sum = F::zero();
        for_each_channel_elem(n, c, plane, ch, |i| {
            let d = input.data()[i] - mean;
            var_sum += d * d;
        });
        let var = var_sum / m;
        let istd = F::one() / (var + eps).sqrt();
        inv_std[ch] = istd;
        let (g, b) = (gamma.data()[ch], beta.data()[ch]);
        for_each_channel_elem(n, c, plane, ch, |i| {
            let xh = (input.data()[i] - mean) * istd;
            xhat[i] = xh;
            out[i] = g * xh + b;
        });
        let keep = momentum;
        let blend = F::one() - momentum;
        running_mean.data_mut()[ch] = keep * running_mean.data()[ch] + blend * mean;
        running_var.data_mut()[ch] = keep * running_var.data()[ch] + blend * var;
    }

    let cache = BnCache { shape: input.shape().to_vec(), inv_std, xhat };
    Ok((Tensor::new(input.shape().to_vec(), out)?, cache))
}

/// Inference-mode batch normalization: a pure per-element affine map using
/// the running estimates. Works for any batch size, including one.
pub fn batchnorm<F: Scalar>(
    input: &Tensor<F>,
    gamma: &Tensor<F>,
    beta: &Tensor<F>,
    running_mean: &Tensor<F>,
    running_var: &Tensor<F>,
) -> Result<Tensor<F>> {
    let (n, c, plane) = bn_dims(input, "batchnorm")?;
    check_channel_vec(gamma, c, "gamma", "batchnorm")?;
    check_channel_vec(beta, c, "beta", "batchnorm")?;
    check_channel_vec(running_mean, c, "running_mean", "batchnorm")?;
    check_channel_vec(running_var, c, "running_var", "batchnorm")?;
    let eps = F::from_f64(BN_EPSILON);
    let mut out = vec![F::zero(); input.len()];
    for ch in 0..c {
        let istd = F::one() / (running_var.data()[ch] + eps).sqrt();
        let scale = gamma.data()[ch] * istd;
        let shift = beta.data()[ch] - running_mean.data()[ch] * scale;
        for_each_channel_elem(n, c, plane, ch, |i| {
            out[i] = input.data()[i] * scale + shift;
        });
    }
    Tensor::new(input.shape().to_vec(), out)
}

/// Gradients of [`batchnorm_train`] with respect to input, gamma and beta.
/// Uses the batch statistics captured in the cache; the running-estimate
/// update does not participate in the gradient.
pub fn batchnorm_backward<F: Scalar>(
    gamma: &Tensor<F>,
    cache: &BnCache<F>,
    grad_out: &Tensor<F>,
) -> Result<(Tensor<F>, Tensor<F>, Tensor<F>)> {
    if grad_out.shape() != cache.shape.as_slice() {
        return Err(FerError::shape(
            "batchnorm_backward",
            format!("grad shape {:?} does not match input {:?}", grad_out.shape(), cache.shape),
        ));
    }
    let probe = Tensor::new(cache.shape.clone(), cache.xhat.clone())?;
    let (n, c, plane) = bn_dims(&probe, "batchnorm_backward")?;
    check_channel_vec(gamma, c, "gamma", "batchnorm_backward")?;

    let m = F::from_usize(n * plane);
    let mut d_input = vec![F::zero(); cache.xhat.len()];
    let mut d_gamma = vec![F::zero(); c];
    let mut d_beta = vec![F::zero(); c];

    for ch in 0..c {
        let mut sum_g = F::zero();
        let mut sum_gx = F::zero();
        for_each_channel_elem(n, c, plane, ch, |i| {
            sum_g += grad_out.data()[i];
            sum_gx += grad_out.data()[i] * cache.xhat[i];
        });
        d_gamma[ch] = sum_gx;
        d_beta[ch] = sum_g;
        let scale = gamma.data()[ch] * cache.inv_std[ch];
        let mean_g = sum_g / m;
        let mean_gx = sum_gx / m;
        for_each_channel_elem(n, c, plane, ch, |i| {
            d_input[i] = scale * (grad_out.data()[i] - mean_g - cache.xhat[i] * mean_gx);
        });
    }

    Ok((
        Tensor::new(cache.shape.clone(), d_input)?,
        Tensor::new(vec![c], d_gamma)?,
        Tensor::new(vec![c], d_beta)?,
    ))
}
