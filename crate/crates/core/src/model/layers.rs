//! Parameterized layer building blocks. Each layer owns its parameter
//! tensors; backward passes accumulate parameter gradients into the tensors'
//! gradient buffers and return the gradient with respect to the layer input.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::ops;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Uniform Kaiming-style init: `U(-sqrt(6 / fan_in), +sqrt(6 / fan_in))`.
pub(crate) fn kaiming_fill<F: Scalar>(t: &mut Tensor<F>, fan_in: usize, rng: &mut ChaCha8Rng) {
    let bound = (6.0 / fan_in as f64).sqrt();
    for v in t.data_mut() {
        *v = F::from_f64(rng.random_range(-bound..=bound));
    }
}

/// Convolution layer with weight `[Cout, Cin, K, K]` and bias `[Cout]`.
#[derive(Debug, Clone)]
pub struct ConvLayer<F: Scalar> {
    pub weight: Tensor<F>,
    pub bias: Tensor<F>,
}

impl<F: Scalar> ConvLayer<F> {
    pub fn new(c_in: usize, c_out: usize, k: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut weight = Tensor::zeros(vec![c_out, c_in, k, k]);
        kaiming_fill(&mut weight, c_in * k * k, rng);
        ConvLayer { weight, bias: Tensor::zeros(vec![c_out]) }
    }

    pub fn forward(&self, input: &Tensor<F>) -> Result<Tensor<F>> {
        ops::conv2d(input, &self.weight, &self.bias)
    }

    /// Accumulates weight/bias gradients; returns the input gradient.
    pub fn backward(&mut self, input: &Tensor<F>, grad_out: &Tensor<F>) -> Result<Tensor<F>> {
        let (d_in, d_w, d_b) = ops::conv2d_backward(input, &self.weight, grad_out)?;
        self.weight.accumulate_grad(&d_w)?;
        self.bias.accumulate_grad(&d_b)?;
        Ok(d_in)
    }
}

/// Fully-connected layer with weight `[Dout, Din]` and bias `[Dout]`.
#[derive(Debug, Clone)]
pub struct DenseLayer<F: Scalar> {
    pub weight: Tensor<F>,
    pub bias: Tensor<F>,
}

impl<F: Scalar> DenseLayer<F> {
    pub fn new(d_in: usize, d_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut weight = Tensor::zeros(vec![d_out, d_in]);
        kaiming_fill(&mut weight, d_in, rng);
        DenseLayer { weight, bias: Tensor::zeros(vec![d_out]) }
    }

    pub fn forward(&self, input: &Tensor<F>) -> Result<Tensor<F>> {
        ops::dense(input, &self.weight, &self.bias)
    }

    pub fn backward(&mut self, input: &Tensor<F>, grad_out: &Tensor<F>) -> Result<Tensor<F>> {
        let (d_in, d_w, d_b) = ops::dense_backward(input, &self.weight, grad_out)?;
        self.weight.accumulate_grad(&d_w)?;
        self.bias.accumulate_grad(&d_b)?;
        Ok(d_in)
    }
}

/// Batch normalization parameters plus running statistics. The running
/// estimates are state, not trainable parameters, but they serialize with
/// the checkpoint so inference is self-contained.
#[derive(Debug, Clone)]
pub struct BatchNormLayer<F: Scalar> {
    pub gamma: Tensor<F>,
    pub beta: Tensor<F>,
    pub running_mean: Tensor<F>,
    pub running_var: Tensor<F>,
}

impl<F: Scalar> BatchNormLayer<F> {
    pub fn new(channels: usize) -> Self {
        BatchNormLayer {
            gamma: Tensor::filled(vec![channels], F::one()),
            beta: Tensor::zeros(vec![channels]),
            running_mean: Tensor::zeros(vec![channels]),
            running_var: Tensor::filled(vec![channels], F::one()),
        }
    }

    pub fn forward_train(&mut self, input: &Tensor<F>) -> Result<(Tensor<F>, ops::BnCache<F>)> {
        ops::batchnorm_train(
            input,
            &self.gamma,
            &self.beta,
            &mut self.running_mean,
            &mut self.running_var,
            F::from_f64(ops::BN_MOMENTUM),
        )
    }

    pub fn forward_infer(&self, input: &Tensor<F>) -> Result<Tensor<F>> {
        ops::batchnorm(input, &self.gamma, &self.beta, &self.running_mean, &self.running_var)
    }

    pub fn backward(&mut self, cache: &ops::BnCache<F>, grad_out: &Tensor<F>) -> Result<Tensor<F>> {
        let (d_in, d_gamma, d_beta) = ops::batchnorm_backward(&self.gamma, cache, grad_out)?;
        self.gamma.accumulate_grad(&d_gamma)?;
        self.beta.accumulate_grad(&d_beta)?;
        Ok(d_in)
    }
}

/// Dense layer followed by batch normalization and ReLU, the repeating unit
/// of every fully-connected stack in the network.
#[derive(Debug, Clone)]
pub struct DenseBlock<F: Scalar> {
    pub fc: DenseLayer<F>,
    pub bn: BatchNormLayer<F>,
}

/// Forward-pass values a [`DenseBlock`] needs for its backward pass.
#[derive(Debug, Clone)]
pub struct DenseBlockCache<F: Scalar> {
    pub(crate) input: Tensor<F>,
    pub(crate) bn: ops::BnCache<F>,
    /// Batch-norm output, i.e. the ReLU preactivation.
    pub(crate) preact: Tensor<F>,
}

impl<F: Scalar> DenseBlock<F> {
    pub fn new(d_in: usize, d_out: usize, rng: &mut ChaCha8Rng) -> Self {
        DenseBlock { fc: DenseLayer::new(d_in, d_out, rng), bn: BatchNormLayer::new(d_out) }
    }

    pub fn forward_train(&mut self, input: &Tensor<F>) -> Result<(Tensor<F>, DenseBlockCache<F>)> {
        let lin = self.fc.forward(input)?;
        let (preact, bn) = self.bn.forward_train(&lin)?;
        let out = ops::relu(&preact);
        Ok((out, DenseBlockCache { input: input.clone(), bn, preact }))
    }

    pub fn forward_infer(&self, input: &Tensor<F>) -> Result<Tensor<F>> {
        let lin = self.fc.forward(input)?;
        Ok(ops::relu(&self.bn.forward_infer(&lin)?))
    }

    pub fn backward(&mut self, cache: &DenseBlockCache<F>, grad_out: &Tensor<F>) -> Result<Tensor<F>> {
        let g = ops::relu_backward(&cache.preact, grad_out)?;
        let g = self.bn.backward(&cache.bn, &g)?;
        self.fc.backward(&cache.input, &g)
    }

    /// Smallest |ReLU preactivation| in the cached batch.
    pub(crate) fn kink_margin(cache: &DenseBlockCache<F>) -> F {
        super::margin::min_abs(&cache.preact)
    }
}
