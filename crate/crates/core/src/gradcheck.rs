//! Central-difference verification of every backward pass, from single
//! operations to the full network. Checks run in 64-bit precision.
//!
//! Finite differences are only meaningful away from ReLU kinks and
//! max-selection ties: a probe step that crosses one measures the wrong
//! one-sided slope. Operations with kinks therefore redraw their random
//! points until the forward pass keeps a minimum margin from every kink,
//! and the probe step stays well below that margin.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::synthetic_dataset;
use crate::error::{FerError, Result};
use crate::model::{margin, ArchPreset, CbamBlock, DenseBlock, FerNetwork};
use crate::ops;
use crate::tensor::Tensor;
use crate::train::{softmax_cross_entropy, softmax_cross_entropy_grad};

/// Largest acceptable relative error for a single operation's backward.
pub const LAYER_TOLERANCE: f64 = 1e-5;
/// Largest acceptable relative error for the full-network gradient.
pub const END_TO_END_TOLERANCE: f64 = 1e-4;
/// Default number of random evaluation points per operation.
pub const DEFAULT_POINTS: usize = 100;
/// Default number of parameter coordinates probed on the full network.
pub const DEFAULT_END_TO_END_COORDS: usize = 100;

const LAYER_STEP: f64 = 1e-5;
const LAYER_KINK_MARGIN: f64 = 1e-4;
const CONV_RELU_KINK_MARGIN: f64 = 5e-4;
const BN_RELU_KINK_MARGIN: f64 = 1e-3;
const BN_MIN_BATCH_STD: f64 = 0.3;
const LAYER_GRAD_FLOOR: f64 = 1e-8;
// Train-mode normalization cancels a bias shift exactly, so the bias
// gradient through it is identically zero; central differences report
// rounding noise (~1e-11) on those coordinates, never a relative error.
const BN_SHADOWED_FLOOR: f64 = 1e-5;
const E2E_KINK_MARGIN: f64 = 1.5e-6;
const E2E_GRAD_FLOOR: f64 = 2e-5;
const MAX_POINT_REDRAWS: u64 = 10_000;
const MAX_E2E_REDRAWS: u64 = 4_096;
const E2E_PARAM_SEED: u64 = 11;

/// Relative disagreement with a configurable magnitude floor. Coordinates
/// whose gradient sits below the floor are in effect judged absolutely, at
/// `floor * tolerance`; central differences cannot resolve a relative error
/// underneath the evaluation noise there.
fn floored_relative_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Outcome of checking one operation's analytic gradient against central
/// differences.
#[derive(Debug, Clone)]
pub struct GradCheckReport {
    /// Operation name.
    pub layer: String,
    /// Number of random points (or probed coordinates) evaluated.
    pub points: usize,
    /// Worst relative disagreement across all points and coordinates.
    pub max_rel_error: f64,
    /// Threshold this check is judged against.
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }
}

/// Relative disagreement `|a − n| / max(|a|, |n|, 1e-8)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    floored_relative_error(analytic, numeric, 1e-8)
}

/// Names of every operation covered by [`run_layer_suite`], in run order.
pub fn layer_names() -> Vec<&'static str> {
    LAYER_CHECKS.iter().map(|(name, _)| *name).collect()
}

/// Checks every operation's backward at `points` random points each and
/// returns one report per operation.
pub fn run_layer_suite(points: usize) -> Result<Vec<GradCheckReport>> {
    LAYER_CHECKS
        .iter()
        .map(|&(name, check)| {
            let mut worst = 0.0f64;
            for point in 0..points {
                worst = worst.max(check(point as u64)?);
            }
            Ok(GradCheckReport {
                layer: name.to_string(),
                points,
                max_rel_error: worst,
                tolerance: LAYER_TOLERANCE,
            })
        })
        .collect()
}

/// Checks the full tiny-preset training gradient at one non-degenerate
/// input point, probing `coords` parameter coordinates spread over every
/// tensor.
///
/// The probe step is half the batch's kink margin, so no central
/// difference crosses a ReLU kink or max-selection tie. Disagreements are
/// judged relative to `max(|analytic|, |numeric|, 2e-5)`: the network is
/// full of gated-off coordinates with vanishing gradients, and below that
/// floor the check bounds the absolute disagreement instead (at the floor
/// times the tolerance), which is what finite differences can resolve.
pub fn run_end_to_end(coords: usize) -> Result<GradCheckReport> {
    let mut net = FerNetwork::<f64>::new(ArchPreset::Tiny, E2E_PARAM_SEED)?;

    let mut chosen = None;
    for attempt in 0..MAX_E2E_REDRAWS {
        let data = synthetic_dataset::<f64>(2, attempt)?;
        let (images, landmarks, hog, labels) = data.batch(&[0, 1])?;
        let (_, cache) = net.forward_train(&images, &landmarks, &hog)?;
        let margin = cache.kink_margin();
        if margin >= E2E_KINK_MARGIN {
            chosen = Some((images, landmarks, hog, labels, margin));
            break;
        }
    }
    let (images, landmarks, hog, labels, margin) = chosen.ok_or_else(|| {
        FerError::invalid("no synthetic batch kept enough margin from activation kinks")
    })?;
    let step = margin / 2.0;

    net.zero_grads();
    let (logits, cache) = net.forward_train(&images, &landmarks, &hog)?;
    net.backward(&cache, &softmax_cross_entropy_grad(&ops::softmax(&logits)?, &labels)?)?;
    let analytic: Vec<Vec<f64>> = net
        .named_trainable()
        .iter()
        .map(|(name, t)| {
            t.grad()
                .map(<[f64]>::to_vec)
                .ok_or_else(|| FerError::invalid(format!("{name} has no gradient")))
        })
        .collect::<Result<_>>()?;
    let lens: Vec<usize> = analytic.iter().map(Vec::len).collect();

    let mut rng = point_rng("full_network", 0, 0);
    let targets = sample_coordinates(&lens, coords, &mut rng);

    let loss_at = |net: &mut FerNetwork<f64>| -> Result<f64> {
        let (logits, _) = net.forward_train(&images, &landmarks, &hog)?;
        let (loss, _) = softmax_cross_entropy(&logits, &labels)?;
        Ok(loss)
    };
    let mut worst = 0.0f64;
    for &(ti, ci) in &targets {
        let saved = net.named_trainable()[ti].1.data()[ci];
        net.named_trainable_mut()[ti].1.data_mut()[ci] = saved + step;
        let plus = loss_at(&mut net)?;
        net.named_trainable_mut()[ti].1.data_mut()[ci] = saved - step;
        let minus = loss_at(&mut net)?;
        net.named_trainable_mut()[ti].1.data_mut()[ci] = saved;
        let numeric = (plus - minus) / (2.0 * step);
        worst = worst.max(floored_relative_error(analytic[ti][ci], numeric, E2E_GRAD_FLOOR));
    }
    Ok(GradCheckReport {
        layer: "full_network".to_string(),
        points: targets.len(),
        max_rel_error: worst,
        tolerance: END_TO_END_TOLERANCE,
    })
}

/// The complete suite: every operation plus the full network.
pub fn run_full_suite(points: usize, e2e_coords: usize) -> Result<Vec<GradCheckReport>> {
    let mut reports = run_layer_suite(points)?;
    reports.push(run_end_to_end(e2e_coords)?);
    Ok(reports)
}

type LayerCheck = fn(u64) -> Result<f64>;

const LAYER_CHECKS: &[(&str, LayerCheck)] = &[
    ("conv2d", check_conv2d),
    ("maxpool2d", check_maxpool2d),
    ("batchnorm_features", check_batchnorm_features),
    ("batchnorm_spatial", check_batchnorm_spatial),
    ("dense", check_dense),
    ("relu", check_relu),
    ("conv_relu", check_conv_relu),
    ("dense_bn_relu", check_dense_bn_relu),
    ("sigmoid", check_sigmoid),
    ("softmax_cross_entropy", check_softmax_cross_entropy),
    ("cbam", check_cbam),
    ("fuse", check_fuse),
    ("broadcast_mul_channel", check_broadcast_mul_channel),
    ("broadcast_mul_pixel", check_broadcast_mul_pixel),
    ("global_avg_pool", check_global_avg_pool),
    ("global_max_pool", check_global_max_pool),
    ("channel_mean", check_channel_mean),
    ("channel_max", check_channel_max),
];

fn point_rng(op: &str, point: u64, attempt: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&point.to_le_bytes());
    key[8..16].copy_from_slice(&attempt.to_le_bytes());
    let name = op.as_bytes();
    let n = name.len().min(16);
    key[16..16 + n].copy_from_slice(&name[..n]);
    ChaCha8Rng::from_seed(key)
}

fn draw(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-scale..=scale)).collect()
}

fn tensor(shape: &[usize], data: Vec<f64>) -> Result<Tensor<f64>> {
    Tensor::new(shape.to_vec(), data)
}

fn project(out: &Tensor<f64>, u: &[f64]) -> f64 {
    out.data().iter().zip(u).map(|(a, b)| a * b).sum()
}

/// Worst relative error between `analytic` and central differences of
/// `loss` over every coordinate of `x`, with `floor` as the magnitude
/// floor of the error denominator.
fn compare_gradients(
    x: &mut [f64],
    analytic: &[f64],
    step: f64,
    floor: f64,
    mut loss: impl FnMut(&[f64]) -> Result<f64>,
) -> Result<f64> {
    debug_assert_eq!(x.len(), analytic.len());
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        let saved = x[i];
        x[i] = saved + step;
        let plus = loss(x)?;
        x[i] = saved - step;
        let minus = loss(x)?;
        x[i] = saved;
        let numeric = (plus - minus) / (2.0 * step);
        worst = worst.max(floored_relative_error(analytic[i], numeric, floor));
    }
    Ok(worst)
}

fn concat(parts: &[&[f64]]) -> Vec<f64> {
    let mut out = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
    for p in parts {
        out.extend_from_slice(p);
    }
    out
}

fn min_column_std(t: &Tensor<f64>) -> f64 {
    let &[n, d] = t.shape() else { return f64::INFINITY };
    let mut worst = f64::INFINITY;
    for col in 0..d {
        let mean: f64 = (0..n).map(|r| t.data()[r * d + col]).sum::<f64>() / n as f64;
        let var: f64 =
            (0..n).map(|r| (t.data()[r * d + col] - mean).powi(2)).sum::<f64>() / n as f64;
        worst = worst.min(var.sqrt());
    }
    worst
}

fn sample_coordinates(lens: &[usize], coords: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let total: usize = lens.iter().sum();
    let mut out = Vec::with_capacity(coords.max(lens.len()));
    for (i, &len) in lens.iter().enumerate() {
        out.push((i, rng.random_range(0..len)));
    }
    while out.len() < coords {
        let mut flat = rng.random_range(0..total);
        for (i, &len) in lens.iter().enumerate() {
            if flat < len {
                out.push((i, flat));
                break;
            }
            flat -= len;
        }
    }
    out
}

fn check_conv2d(point: u64) -> Result<f64> {
    let mut rng = point_rng("conv2d", point, 0);
    let (n, c_in, c_out, k, h, w) = (2, 2, 3, 3, 4, 5);
    let input = tensor(&[n, c_in, h, w], draw(&mut rng, n * c_in * h * w, 1.0))?;
    let weight = tensor(&[c_out, c_in, k, k], draw(&mut rng, c_out * c_in * k * k, 0.5))?;
    let bias = tensor(&[c_out], draw(&mut rng, c_out, 0.5))?;
    let u = draw(&mut rng, n * c_out * h * w, 1.0);

    let grad = tensor(&[n, c_out, h, w], u.clone())?;
    let (d_in, d_w, d_b) = ops::conv2d_backward(&input, &weight, &grad)?;
    let analytic = concat(&[d_in.data(), d_w.data(), d_b.data()]);

    let mut x = concat(&[input.data(), weight.data(), bias.data()]);
    compare_gradients(&mut x, &analytic, LAYER_STEP, LAYER_GRAD_FLOOR, |x| {
        let (xi, rest) = x.split_at(input.len());
        let (xw, xb) = rest.split_at(weight.len());
        let out = ops::conv2d(
            &tensor(&[n, c_in, h, w], xi.to_vec())?,
            &tensor(&[c_out, c_in, k, k], xw.to_vec())?,
            &tensor(&[c_out], xb.to_vec())?,
        )?;
        Ok(project(&out, &u))
    })
}

fn check_maxpool2d(point: u64) -> Result<f64> {
    let (n, c, h, w) = (2, 2, 4, 4);
    let (input, mut rng) = redraw(point, "maxpool2d", |rng| {
        let t = tensor(&[n, c, h, w], draw(rng, n * c * h * w, 1.0))?;
        let ok = margin::min_pool_gap(&t) >= LAYER_KINK_MARGIN;
        Ok((t, ok))
    })?;
    let u = draw(&mut rng, n * c * (h / 2) * (w / 2), 1.0);

    let grad = tensor(&[n, c, h / 2, w / 2], u.clone())?;
    let analytic = ops::maxpool2d_backward(&input, &grad)?;

    let mut x = input.data().to_vec();
    compare_gradients(&mut x, analytic.data(), LAYER_STEP, LAYER_GRAD_FLOOR, |x| {
        let out = ops::maxpool2d(&tensor(&[n, c, h, w], x.to_vec())?)?;
        Ok(project(&out, &u))
    })
}

fn check_batchnorm(point: u64, op: &'static str, shape: &[usize]) -> Result<f64> {
    let mut rng = point_rng(op, point, 0);
    let c = shape[1];
    let len: usize = shape.iter().product();
    let input = tensor(shape, draw(&mut rng, len, 1.0))?;
    let gamma = tensor(&[c], (0..c).map(|_| rng.random_range(0.5..=1.5)).collect())?;
    let beta = tensor(&[c], draw(&mut rng, c, 1.0))?;
    let u = draw(&mut rng, len, 1.0);

    let mut rm = Tensor::zeros(vec![c]);
    let mut rv = Tensor::filled(vec![c], 1.0);
    let (_, cache) =
        ops::batchnorm_train(&input, &gamma, &beta, &mut rm, &mut rv, ops::BN_MOMENTUM)?;
    let grad = tensor(shape, u.clone())?;
    let (d_in, d_gamma, d_beta) = ops::batchnorm_backward(&gamma, &cache, &grad)?;
    let analytic = concat(&[d_in.data(), d_gamma.data(), d_beta.data()]);

    let mut x = concat(&[input.data(), gamma.data(), beta.data()]);
    compare_gradients(&mut x, &analytic, LAYER_STEP, LAYER_GRAD_FLOOR, |x| {
        let (xi, rest) = x.split_at(len);
        let (xg, xb) = rest.split_at(c);
        let mut rm = Tensor::zeros(vec![c]);
        let mut rv = Tensor::filled(vec![c], 1.0);
        let (out, _) = ops::batchnorm_train(
            &tensor(shape, xi.to_vec())?,
            &tensor(&[c], xg.to_vec())?,
            &tensor(&[c], xb.to_vec())?,
            &mut rm,
            &mut rv,
            ops::BN_MOMENTUM,
        )?;
        Ok(project(&out, &u))
    })
}

fn check_batchnorm_features(point: u64) -> Result<f64> {
    check_batchnorm(point, "batchnorm_features", &[4, 3])
}

fn check_batchnorm_spatial(point: u64) -> Result<f64> {
    check_batchnorm(point, "batchnorm_spatial", &[2, 3, 2, 2])
}

fn check_dense(point: u64) -> Result<f64> {
    let mut rng = point_rng("dense", point, 0);
    let (n, d_in, d_out) = (3, 4, 5);
    let input = tensor(&[n, d_in], draw(&mut rng, n * d_in, 1.0))?;
    let weight = tensor(&[d_out, d_in], draw(&mut rng, d_out * d_in, 0.7))?;
    let bias = tensor(&[d_out], draw(&mut rng, d_out, 0.7))?;
    let u = draw(&mut rng, n * d_out, 1.0);

    let grad = tensor(&[n, d_out], u.clone())?;
    let (d_input, d_weight, d_bias) = ops::dense_backward(&input, &weight, &grad)?;
    let analytic = concat(&[d_input.data(), d_weight.data(), d_bias.data()]);

    let mut x = concat(&[input.data(), weight.data(), bias.data()]);
    compare_gradients(&mut x, &analytic, LAYER_STEP, LAYER_GRAD_FLOOR, |x| {
        let (xi, rest) = x.split_at(n * d_in);
        let (xw, xb) = rest.split_at(d_out * d_in);
        let out = ops::dense(
            &tensor(&[n, d_in], xi.to_vec())?,
            &tensor(&[d_out, d_in], xw.to_vec())?,
            &tensor(&[d_out], xb.to_vec())?,
        )?;
        Ok(project(&out, &u))
    })
}

fn check_relu(point: u64) -> Result<f64> {
    let shape = [3, 4];
    let (input, mut rng) = redraw(point, "relu", |rng| {
        let t = tensor(&shape, draw(rng, 12, 1.0))?;
        let ok = margin::min_abs(&t) >= LAYER_KINK_MARGIN;
        Ok((t, ok))
    })?;
    let u = draw(&mut rng, 12, 1.0);

    let grad = tensor(&shape, u.clone())?;
    let analytic = ops::relu_backward(&input, &grad)?;

    let mut x = input.data().to_vec();
    compare_gradients(&mut x, analytic.data(), LAYER_STEP, LAYER_GRAD_FLOOR, |x| {
        Ok(project(&ops::relu(&tensor(&shape, x.to_vec())?), &u))
    })
}

fn check_conv_relu(point: u64) -> Result<f64> {
    let (n, c_in, c_out, k, h, w) = (2, 2, 3, 3, 4, 4);
    let (bundle, mut rng) = redraw(point, "conv_relu", |rng| {
        let input = tensor(&[n, c_in, h, w], draw(rng, n * c_in * h * w, 1.0))?;
        let weight = tensor(&[c_out, c_in, k, k], draw(rng, c_out * c_in * k * k, 0.4))?;
        let bias = tensor(&[c_out], draw(rng, c_out, 0.4))?;
        let preact = ops::conv2d(&input, &weight, &bias)?;
        let ok = margin::min_abs(&preact) >= CONV_RELU_KINK_MARGIN;
        Ok(((input, weight, bias, preact), ok))
    })?;
    let (input, weight, bias, preact) = bundle;
    let u = draw(&mut rng, preact.len(), 1.0);

    let grad = tensor(preact.shape(), u.clone())?;
    let d_pre = ops::relu_backward(&preact, &grad)?;
    let (d_in, d_w, d_b) = ops::conv2d_backward(&input, &weight, &d_pre)?;
    let analytic = concat(&[d_in.data(), d_w.data(), d_b.data()]);

    let mut x = concat(&[input.data(), weight.data(), bias.data()]);
    compare_gradients(&mut x, &analytic, LAYER_STEP, LAYER_GRAD_FLOOR, |x| {
        let (xi, rest) = x.split_at(input.len());
        let (xw, xb) = rest.split_at(weight.len());
        let out = ops::relu(&ops::conv2d(
            &tensor(&[n, c_in, h, w], xi.to_vec())?,
            &tensor(&[c_out, c_in, k, k], xw.to_vec())?,
            &tensor(&[c_out], xb.to_vec())?,
        )?);
        Ok(project(&out, &u))
    })
}

fn check_dense_bn_relu(point: u64) -> Result<f64> {
    let (n, d_in, d_out) = (4, 3, 5);
    let mut seed_rng = point_rng("dense_bn_relu", point, u64::MAX);
    let mut block = DenseBlock::<f64>::new(d_in, d_out, &mut seed_rng);

    let (bundle, mut rng) = redraw(point, "dense_bn_relu", |rng| {
        let input = tensor(&[n, d_in], draw(rng, n * d_in, 1.0))?;
        let weight = draw(rng, d_out * d_in, 0.7);
        let bias = draw(rng, d_out, 0.7);
        let gamma: Vec<f64> = (0..d_out).map(|_| rng.random_range(0.5..=1.5)).collect();
        let beta = draw(rng, d_out, 0.7);
        block.fc.weight.data_mut().copy_from_slice(&weight);
        block.fc.bias.data_mut().copy_from_slice(&bias);
        block.bn.gamma.data_mut().copy_from_slice(&gamma);
        block.bn.beta.data_mut().copy_from_slice(&beta);
        let lin = block.fc.forward(&input)?;
        let (_, cache) = block.forward_train(&input)?;
        // Normalization scales a parameter step by gamma / batch-std, so a
        // small batch std would let the probe step cross the ReLU kink.
        let ok = min_column_std(&lin) >= BN_MIN_BATCH_STD
            && DenseBlock::kink_margin(&cache) >= BN_RELU_KINK_MARGIN;
        Ok(((input, weight, bias, gamma, beta), ok))
    })?;
    let (input, weight, bias, gamma, beta) = bundle;
    let u = draw(&mut rng, n * d_out, 1.0);

    block.fc.weight.zero_grad();
    block.fc.bias.zero_grad();
    block.bn.gamma.zero_grad();
    block.bn.beta.zero_grad();
    let (_, cache) = block.forward_train(&input)?;
    let grad = tensor(&[n, d_out], u.clone())?;
    let d_input = block.backward(&cache, &grad)?;
    let analytic = concat(&[
        d_input.data(),
        block.fc.weight.grad().expect("backward fills it"),
        block.fc.bias.grad().expect("backward fills it"),
        block.bn.gamma.grad().expect("backward fills it"),
        block.bn.beta.grad().expect("backward fills it"),
    ]);

    let mut x = concat(&[input.data(), &weight, &bias, &gamma, &beta]);
    compare_gradients(&mut x, &analytic, LAYER_STEP, BN_SHADOWED_FLOOR, |x| {
        let (xi, rest) = x.split_at(n * d_in);
        let (xw, rest) = rest.split_at(d_out * d_in);
        let (xb, rest) = rest.split_at(d_out);
        let (xg, xbeta) = rest.split_at(d_out);
        block.fc.weight.data_mut().copy_from_slice(xw);
        block.fc.bias.data_mut().copy_from_slice(xb);
        block.bn.gamma.data_mut().copy_from_slice(xg);
        block.bn.beta.data_mut().copy_from_slice(xbeta);
        let (out, _) = block.forward_train(&tensor(&[n, d_in], xi.to_vec())?)?;
        Ok(project(&out, &u))
    })
}

fn check_sigmoid(point: u64) -> Result<f64> {
    let mut rng = point_rng("sigmoid", point, 0);
    let shape = [2, 3, 4];
    let input = tensor(&shape, draw(&mut rng, 24, 2.0))?;
    let u = draw(&mut rng, 24, 1.0);

    let out = ops::sigmoid(&input);
    let grad = tensor(&shape, u.clone())?;
    let analytic = ops::sigmoid_backward(&out, &grad)?;

    let mut x = input.data().to_vec();
    compare_gradients(&mut x, analytic.data(), LAYER_STEP, LAYER_GRAD_FLOOR, |x| {
        Ok(project(&ops::sigmoid(&tensor(&shape, x.to_vec())?), &u))
    })
}

fn check_softmax_cross_entropy(point: u64) -> Result<f64> {
    let mut rng = point_rng("softmax_cross_entropy", point, 0);
    let (n, k) = (4, 7);
    let logits = tensor(&[n, k], draw(&mut rng, n * k, 2.0))?;
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();

    let (_, analytic) = softmax_cross_entropy(&logits, &labels)?;

    let mut x = logits.data().to_vec();
    compare_gradients(&mut x, analytic.data(), LAYER_STEP, LAYER_GRAD_FLOOR, |x| {
        let (loss, _) = softmax_cross_entropy(&tensor(&[n, k], x.to_vec())?, &labels)?;
        Ok(loss)
    })
}

fn check_cbam(point: u64) -> Result<f64> {
    let (n, c, h, w, reduction) = (2, 8, 4, 4, 4);
    let mut seed_rng = point_rng("cbam", point, u64::MAX);
    let mut block = CbamBlock::<f64>::new(c, reduction, &mut seed_rng)?;
    let hidden = c / reduction;

    let (bundle, mut rng) = redraw(point, "cbam", |rng| {
        let input = tensor(&[n, c, h, w], draw(rng, n * c * h * w, 1.0))?;
        let w0 = draw(rng, hidden * c, 0.6);
        let w1 = draw(rng, c * hidden, 0.6);
        let ws = draw(rng, 2 * 7 * 7, 0.3);
        block.channel_w0.data_mut().copy_from_slice(&w0);
        block.channel_w1.data_mut().copy_from_slice(&w1);
        block.spatial_w.data_mut().copy_from_slice(&ws);
        let (_, cache) = block.forward(&input)?;
        let ok = CbamBlock::kink_margin(&cache) >= LAYER_KINK_MARGIN;
        Ok(((input, w0, w1, ws), ok))
    })?;
    let (input, w0, w1, ws) = bundle;
    let u = draw(&mut rng, n * c * h * w, 1.0);

    block.channel_w0.zero_grad();
    block.channel_w1.zero_grad();
    block.spatial_w.zero_grad();
    let (_, cache) = block.forward(&input)?;
    let grad = tensor(&[n, c, h, w], u.clone())?;
    let d_input = block.backward(&cache, &grad)?;
    let analytic = concat(&[
        d_input.data(),
        block.channel_w0.grad().expect("backward fills it"),
        block.channel_w1.grad().expect("backward fills it"),
        block.spatial_w.grad().expect("backward fills it"),
    ]);

    let mut x = concat(&[input.data(), &w0, &w1, &ws]);
    compare_gradients(&mut x, &analytic, LAYER_STEP, LAYER_GRAD_FLOOR, |x| {
        let (xi, rest) = x.split_at(input.len());
        let (x0, rest) = rest.split_at(hidden * c);
        let (x1, xs) = rest.split_at(c * hidden);
        block.channel_w0.data_mut().copy_from_slice(x0);
        block.channel_w1.data_mut().copy_from_slice(x1);
        block.spatial_w.data_mut().copy_from_slice(xs);
        let (out, _) = block.forward(&tensor(&[n, c, h, w], xi.to_vec())?)?;
        Ok(project(&out, &u))
    })
}

fn check_fuse(point: u64) -> Result<f64> {
    let mut rng = point_rng("fuse", point, 0);
    let n = 2;
    let widths = [3usize, 4, 2];
    let parts: Vec<Tensor<f64>> = widths
        .iter()
        .map(|&d| tensor(&[n, d], draw(&mut rng, n * d, 1.0)))
        .collect::<Result<_>>()?;
    let total: usize = widths.iter().sum();
    let u = draw(&mut rng, n * total, 1.0);

    let grad = tensor(&[n, total], u.clone())?;
    let d_parts = ops::concat_features_backward(&grad, &widths)?;
    let analytic = concat(&d_parts.iter().map(|t| t.data()).collect::<Vec<_>>());

    let mut x = concat(&parts.iter().map(|t| t.data()).collect::<Vec<_>>());
    compare_gradients(&mut x, &analytic, LAYER_STEP, LAYER_GRAD_FLOOR, |x| {
        let mut offset = 0;
        let mut views = Vec::with_capacity(widths.len());
        for &d in &widths {
            views.push(tensor(&[n, d], x[offset..offset + n * d].to_vec())?);
            offset += n * d;
        }
        let refs: Vec<&Tensor<f64>> = views.iter().collect();
        Ok(project(&ops::concat_features(&refs)?, &u))
    })
}

fn check_broadcast_mul(point: u64, op: &'static str, map_shape: &[usize]) -> Result<f64> {
    let mut rng = point_rng(op, point, 0);
    let feature_shape = [2usize, 3, 3, 3];
    let map_len: usize = map_shape.iter().product();
    let feat_len: usize = feature_shape.iter().product();
    let map = tensor(map_shape, draw(&mut rng, map_len, 1.0))?;
    let feature = tensor(&feature_shape, draw(&mut rng, feat_len, 1.0))?;
    let u = draw(&mut rng, feat_len, 1.0);

    let grad = tensor(&feature_shape, u.clone())?;
    let (d_map, d_feature) = ops::broadcast_mul_backward(&map, &feature, &grad)?;
    let analytic = concat(&[d_map.data(), d_feature.data()]);

    let mut x = concat(&[map.data(), feature.data()]);
    compare_gradients(&mut x, &analytic, LAYER_STEP, LAYER_GRAD_FLOOR, |x| {
        let (xm, xf) = x.split_at(map_len);
        let out = ops::broadcast_mul(
            &tensor(map_shape, xm.to_vec())?,
            &tensor(&feature_shape, xf.to_vec())?,
        )?;
        Ok(project(&out, &u))
    })
}

fn check_broadcast_mul_channel(point: u64) -> Result<f64> {
    check_broadcast_mul(point, "broadcast_mul_channel", &[2, 3, 1, 1])
}

fn check_broadcast_mul_pixel(point: u64) -> Result<f64> {
    check_broadcast_mul(point, "broadcast_mul_pixel", &[2, 1, 3, 3])
}

fn check_global_pool(
    point: u64,
    op: &'static str,
    kind: ops::PoolKind,
    needs_margin: bool,
) -> Result<f64> {
    let shape = [2usize, 3, 4, 4];
    let len: usize = shape.iter().product();
    let (input, mut rng) = redraw(point, op, |rng| {
        let t = tensor(&shape, draw(rng, len, 1.0))?;
        let ok = !needs_margin || margin::min_global_max_gap(&t) >= LAYER_KINK_MARGIN;
        Ok((t, ok))
    })?;
    let u = draw(&mut rng, 2 * 3, 1.0);

    let grad = tensor(&[2, 3], u.clone())?;
    let analytic = ops::global_pool_backward(&input, &grad, kind)?;

    let mut x = input.data().to_vec();
    compare_gradients(&mut x, analytic.data(), LAYER_STEP, LAYER_GRAD_FLOOR, |x| {
        Ok(project(&ops::global_pool(&tensor(&shape, x.to_vec())?, kind)?, &u))
    })
}

fn check_global_avg_pool(point: u64) -> Result<f64> {
    check_global_pool(point, "global_avg_pool", ops::PoolKind::Avg, false)
}

fn check_global_max_pool(point: u64) -> Result<f64> {
    check_global_pool(point, "global_max_pool", ops::PoolKind::Max, true)
}

fn check_channel_mean(point: u64) -> Result<f64> {
    let mut rng = point_rng("channel_mean", point, 0);
    let shape = [2usize, 3, 3, 3];
    let input = tensor(&shape, draw(&mut rng, 54, 1.0))?;
    let u = draw(&mut rng, 2 * 9, 1.0);

    let grad = tensor(&[2, 1, 3, 3], u.clone())?;
    let analytic = ops::channel_mean_backward(&input, &grad)?;

    let mut x = input.data().to_vec();
    compare_gradients(&mut x, analytic.data(), LAYER_STEP, LAYER_GRAD_FLOOR, |x| {
        Ok(project(&ops::channel_mean(&tensor(&shape, x.to_vec())?)?, &u))
    })
}

fn check_channel_max(point: u64) -> Result<f64> {
    let shape = [2usize, 3, 3, 3];
    let (input, mut rng) = redraw(point, "channel_max", |rng| {
        let t = tensor(&shape, draw(rng, 54, 1.0))?;
        let ok = margin::min_channel_max_gap(&t) >= LAYER_KINK_MARGIN;
        Ok((t, ok))
    })?;
    let u = draw(&mut rng, 2 * 9, 1.0);

    let grad = tensor(&[2, 1, 3, 3], u.clone())?;
    let analytic = ops::channel_max_backward(&input, &grad)?;

    let mut x = input.data().to_vec();
    compare_gradients(&mut x, analytic.data(), LAYER_STEP, LAYER_GRAD_FLOOR, |x| {
        Ok(project(&ops::channel_max(&tensor(&shape, x.to_vec())?)?, &u))
    })
}

/// Draws via `attempt`-keyed generators until `build` reports a point far
/// enough from every kink, returning the point and a generator for the
/// projection draw.
fn redraw<T>(
    point: u64,
    op: &'static str,
    mut build: impl FnMut(&mut ChaCha8Rng) -> Result<(T, bool)>,
) -> Result<(T, ChaCha8Rng)> {
    for attempt in 0..MAX_POINT_REDRAWS {
        let mut rng = point_rng(op, point, attempt);
        let (value, ok) = build(&mut rng)?;
        if ok {
            return Ok((value, rng));
        }
    }
    Err(FerError::invalid(format!(
        "{op}: no random point kept enough margin from activation kinks"
    )))
}
