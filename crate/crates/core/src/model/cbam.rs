//! Convolutional block attention: a channel gate driven by pooled channel
//! statistics through a shared bottleneck MLP, followed by a spatial gate
//! driven by a 7x7 convolution over the channel-wise mean and max maps.
//! Neither gate has bias terms.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{FerError, Result};
use crate::ops::{self, PoolKind};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

use super::margin;

const SPATIAL_KERNEL: usize = 7;

/// Attention block parameters. `channel_w0`/`channel_w1` form the shared
/// `C -> C/r -> C` MLP applied to both pooled descriptors; `spatial_w` is
/// the `[1, 2, 7, 7]` kernel of the spatial gate.
#[derive(Debug, Clone)]
pub struct CbamBlock<F: Scalar> {
    pub channel_w0: Tensor<F>,
    pub channel_w1: Tensor<F>,
    pub spatial_w: Tensor<F>,
}

/// Forward-pass values a [`CbamBlock`] needs for its backward pass.
#[derive(Debug, Clone)]
pub struct CbamCache<F: Scalar> {
    input: Tensor<F>,
    avg: Tensor<F>,
    max: Tensor<F>,
    avg_hidden_pre: Tensor<F>,
    avg_hidden: Tensor<F>,
    max_hidden_pre: Tensor<F>,
    max_hidden: Tensor<F>,
    /// Channel gate, `[N, C]`.
    channel_gate: Tensor<F>,
    /// Input scaled by the channel gate, `[N, C, H, W]`.
    gated: Tensor<F>,
    /// Stacked mean/max maps fed to the spatial convolution, `[N, 2, H, W]`.
    stacked: Tensor<F>,
    /// Spatial gate, `[N, 1, H, W]`.
    spatial_gate: Tensor<F>,
}

fn stack_two_channel<F: Scalar>(a: &Tensor<F>, b: &Tensor<F>) -> Result<Tensor<F>> {
    let &[n, 1, h, w] = a.shape() else {
        return Err(FerError::shape(
            "cbam",
            format!("expected [N,1,H,W] maps, got {:?}", a.shape()),
        ));
    };
    if b.shape() != a.shape() {
        return Err(FerError::shape(
            "cbam",
            format!("map shapes differ: {:?} vs {:?}", a.shape(), b.shape()),
        ));
    }
    let plane = h * w;
    let mut data = Vec::with_capacity(n * 2 * plane);
    for ni in 0..n {
        data.extend_from_slice(&a.data()[ni * plane..][..plane]);
        data.extend_from_slice(&b.data()[ni * plane..][..plane]);
    }
    Tensor::new(vec![n, 2, h, w], data)
}

fn split_two_channel<F: Scalar>(t: &Tensor<F>) -> Result<(Tensor<F>, Tensor<F>)> {
    let &[n, 2, h, w] = t.shape() else {
        return Err(FerError::shape(
            "cbam",
            format!("expected [N,2,H,W], got {:?}", t.shape()),
        ));
    };
    let plane = h * w;
    let mut a = Vec::with_capacity(n * plane);
    let mut b = Vec::with_capacity(n * plane);
    for ni in 0..n {
        a.extend_from_slice(&t.data()[(ni * 2) * plane..][..plane]);
        b.extend_from_slice(&t.data()[(ni * 2 + 1) * plane..][..plane]);
    }
    Ok((Tensor::new(vec![n, 1, h, w], a)?, Tensor::new(vec![n, 1, h, w], b)?))
}

impl<F: Scalar> CbamBlock<F> {
    /// Build a block for `channels` feature channels with the given
    /// bottleneck reduction; `channels` must be divisible by `reduction`.
    pub fn new(channels: usize, reduction: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if reduction == 0 || channels % reduction != 0 {
            return Err(FerError::invalid(format!(
                "cbam reduction {reduction} must divide the channel count {channels}"
            )));
        }
        let hidden = channels / reduction;
        let bound0 = (6.0 / channels as f64).sqrt();
        let bound1 = (6.0 / hidden as f64).sqrt();
        let bound_sp = (6.0 / (2 * SPATIAL_KERNEL * SPATIAL_KERNEL) as f64).sqrt();
        let mut channel_w0 = Tensor::zeros(vec![hidden, channels]);
        for v in channel_w0.data_mut() {
            *v = F::from_f64(rng.random_range(-bound0..=bound0));
        }
        let mut channel_w1 = Tensor::zeros(vec![channels, hidden]);
        for v in channel_w1.data_mut() {
            *v = F::from_f64(rng.random_range(-bound1..=bound1));
        }
        let mut spatial_w = Tensor::zeros(vec![1, 2, SPATIAL_KERNEL, SPATIAL_KERNEL]);
        for v in spatial_w.data_mut() {
            *v = F::from_f64(rng.random_range(-bound_sp..=bound_sp));
        }
        Ok(CbamBlock { channel_w0, channel_w1, spatial_w })
    }

    fn widths(&self) -> (usize, usize) {
        (self.channel_w0.shape()[1], self.channel_w0.shape()[0])
    }

    /// Apply both attention gates to a `[N,C,H,W]` feature map. The same
    /// math serves training and inference; the cache is only needed for the
    /// backward pass.
    pub fn forward(&self, input: &Tensor<F>) -> Result<(Tensor<F>, CbamCache<F>)> {
        let (channels, hidden) = self.widths();
        let &[n, c, _, _] = input.shape() else {
            return Err(FerError::shape(
                "cbam",
                format!("expected [N,C,H,W], got {:?}", input.shape()),
            ));
        };
        if c != channels {
            return Err(FerError::shape(
                "cbam",
                format!("block built for {channels} channels, input has {c}"),
            ));
        }
        let zero_hidden = Tensor::zeros(vec![hidden]);
        let zero_out = Tensor::zeros(vec![channels]);

        let avg = ops::global_pool(input, PoolKind::Avg)?;
        let max = ops::global_pool(input, PoolKind::Max)?;
        let avg_hidden_pre = ops::dense(&avg, &self.channel_w0, &zero_hidden)?;
        let avg_hidden = ops::relu(&avg_hidden_pre);
        let avg_out = ops::dense(&avg_hidden, &self.channel_w1, &zero_out)?;
        let max_hidden_pre = ops::dense(&max, &self.channel_w0, &zero_hidden)?;
        let max_hidden = ops::relu(&max_hidden_pre);
        let max_out = ops::dense(&max_hidden, &self.channel_w1, &zero_out)?;
        let channel_gate = ops::sigmoid(&avg_out.add(&max_out)?);

        let gate4 = channel_gate.clone().reshaped(vec![n, c, 1, 1])?;
        let gated = ops::broadcast_mul(&gate4, input)?;

        let mean_map = ops::channel_mean(&gated)?;
        let max_map = ops::channel_max(&gated)?;
        let stacked = stack_two_channel(&mean_map, &max_map)?;
        let zero_one = Tensor::zeros(vec![1]);
        let spatial_pre = ops::conv2d(&stacked, &self.spatial_w, &zero_one)?;
        let spatial_gate = ops::sigmoid(&spatial_pre);
        let out = ops::broadcast_mul(&spatial_gate, &gated)?;

        let cache = CbamCache {
            input: input.clone(),
            avg,
            max,
            avg_hidden_pre,
            avg_hidden,
            max_hidden_pre,
            max_hidden,
            channel_gate,
            gated,
            stacked,
            spatial_gate,
        };
        Ok((out, cache))
    }

    /// Accumulates gradients for the three weight tensors; returns the
    /// gradient with respect to the block input.
    pub fn backward(&mut self, cache: &CbamCache<F>, grad_out: &Tensor<F>) -> Result<Tensor<F>> {
        let &[n, c, _, _] = cache.input.shape() else {
            return Err(FerError::shape("cbam", "cache input lost its shape".to_string()));
        };

        // Spatial gate.
        let (d_sgate, d_gated_direct) =
            ops::broadcast_mul_backward(&cache.spatial_gate, &cache.gated, grad_out)?;
        let d_spatial_pre = ops::sigmoid_backward(&cache.spatial_gate, &d_sgate)?;
        let (d_stacked, d_spatial_w, _) =
            ops::conv2d_backward(&cache.stacked, &self.spatial_w, &d_spatial_pre)?;
        self.spatial_w.accumulate_grad(&d_spatial_w)?;
        let (d_mean_map, d_max_map) = split_two_channel(&d_stacked)?;
        let d_gated_mean = ops::channel_mean_backward(&cache.gated, &d_mean_map)?;
        let d_gated_max = ops::channel_max_backward(&cache.gated, &d_max_map)?;
        let d_gated = d_gated_direct.add(&d_gated_mean)?.add(&d_gated_max)?;

        // Channel gate.
        let gate4 = cache.channel_gate.clone().reshaped(vec![n, c, 1, 1])?;
        let (d_gate4, d_input_direct) =
            ops::broadcast_mul_backward(&gate4, &cache.input, &d_gated)?;
        let d_gate = d_gate4.reshaped(vec![n, c])?;
        let d_sum = ops::sigmoid_backward(&cache.channel_gate, &d_gate)?;

        let (d_avg_hidden, d_w1_avg, _) =
            ops::dense_backward(&cache.avg_hidden, &self.channel_w1, &d_sum)?;
        let d_avg_hidden_pre = ops::relu_backward(&cache.avg_hidden_pre, &d_avg_hidden)?;
        let (d_avg, d_w0_avg, _) =
            ops::dense_backward(&cache.avg, &self.channel_w0, &d_avg_hidden_pre)?;

        let (d_max_hidden, d_w1_max, _) =
            ops::dense_backward(&cache.max_hidden, &self.channel_w1, &d_sum)?;
        let d_max_hidden_pre = ops::relu_backward(&cache.max_hidden_pre, &d_max_hidden)?;
        let (d_max, d_w0_max, _) =
            ops::dense_backward(&cache.max, &self.channel_w0, &d_max_hidden_pre)?;

        self.channel_w1.accumulate_grad(&d_w1_avg.add(&d_w1_max)?)?;
        self.channel_w0.accumulate_grad(&d_w0_avg.add(&d_w0_max)?)?;

        let d_input_avg = ops::global_pool_backward(&cache.input, &d_avg, PoolKind::Avg)?;
        let d_input_max = ops::global_pool_backward(&cache.input, &d_max, PoolKind::Max)?;
        d_input_direct.add(&d_input_avg)?.add(&d_input_max)
    }

    /// Distance of the cached forward pass to the nearest ReLU kink or
    /// max-selection tie inside the block.
    pub(crate) fn kink_margin(cache: &CbamCache<F>) -> F {
        let mut m = margin::min_abs(&cache.avg_hidden_pre);
        m = m.min(margin::min_abs(&cache.max_hidden_pre));
        m = m.min(margin::min_global_max_gap(&cache.input));
        m.min(margin::min_channel_max_gap(&cache.gated))
    }
}
