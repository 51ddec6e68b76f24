//! The full three-branch network: a convolutional branch with attention over
//! the raw image, dense branches over landmark and HOG features, and a
//! fusion head that concatenates the three embeddings and classifies them.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{FerError, Result};
use crate::features::{extract_hog, normalize_landmarks, GrayImage, LandmarkSet};
use crate::ops;
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use crate::{HOG_DIM, IMAGE_SIDE, LANDMARK_DIM, NUM_CLASSES};

use super::cbam::{CbamBlock, CbamCache};
use super::layers::{BatchNormLayer, ConvLayer, DenseBlock, DenseBlockCache, DenseLayer};
use super::margin;

const CONV_KERNEL: usize = 3;
const CBAM_REDUCTION: usize = 8;
const POOL_STAGES: usize = 3;

/// Network size preset. `Full` is the full-size configuration; `Tiny`
/// shrinks every width for fast tests and gradient verification while
/// keeping the exact same topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArchPreset {
    Full,
    Tiny,
}

impl ArchPreset {
    pub fn name(self) -> &'static str {
        match self {
            ArchPreset::Full => "full",
            ArchPreset::Tiny => "tiny",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "full" => Ok(ArchPreset::Full),
            "tiny" => Ok(ArchPreset::Tiny),
            other => Err(FerError::invalid(format!("unknown preset {other:?}"))),
        }
    }

    fn conv_channels(self) -> [usize; 3] {
        match self {
            ArchPreset::Full => [32, 64, 128],
            ArchPreset::Tiny => [8, 16, 32],
        }
    }

    fn cnn_fc_widths(self) -> [usize; 3] {
        match self {
            ArchPreset::Full => [4096, 1024, 128],
            ArchPreset::Tiny => [256, 64, 32],
        }
    }

    fn lnn_widths(self) -> [usize; 2] {
        match self {
            ArchPreset::Full => [1024, 128],
            ArchPreset::Tiny => [64, 32],
        }
    }

    fn hnn_widths(self) -> [usize; 3] {
        match self {
            ArchPreset::Full => [4096, 1024, 128],
            ArchPreset::Tiny => [256, 64, 32],
        }
    }

    /// Width of each branch's output embedding.
    pub fn embedding_dim(self) -> usize {
        self.cnn_fc_widths()[2]
    }

    /// Width of the concatenated fusion vector (three embeddings).
    pub fn fused_dim(self) -> usize {
        3 * self.embedding_dim()
    }

    /// Spatial side length after the three pool stages.
    pub fn final_spatial(self) -> usize {
        IMAGE_SIDE >> POOL_STAGES
    }

    fn cnn_flat_dim(self) -> usize {
        let s = self.final_spatial();
        self.conv_channels()[2] * s * s
    }

    /// Canonical `(name, shape)` listing of every serialized tensor, sorted
    /// by name. This defines the checkpoint layout and must stay in lockstep
    /// with the parameters a constructed network actually owns.
    pub fn parameter_shapes(self) -> Vec<(String, Vec<usize>)> {
        let mut out: Vec<(String, Vec<usize>)> = Vec::new();
        let bn = |out: &mut Vec<(String, Vec<usize>)>, prefix: String, c: usize| {
            out.push((format!("{prefix}.gamma"), vec![c]));
            out.push((format!("{prefix}.beta"), vec![c]));
            out.push((format!("{prefix}.running_mean"), vec![c]));
            out.push((format!("{prefix}.running_var"), vec![c]));
        };
        let chans = self.conv_channels();
        let mut c_in = 1;
        for (i, &c) in chans.iter().enumerate() {
            let n = i + 1;
            out.push((format!("cnn.conv{n}.weight"), vec![c, c_in, CONV_KERNEL, CONV_KERNEL]));
            out.push((format!("cnn.conv{n}.bias"), vec![c]));
            bn(&mut out, format!("cnn.bn{n}"), c);
            out.push((format!("cnn.cbam{n}.channel_w0"), vec![c / CBAM_REDUCTION, c]));
            out.push((format!("cnn.cbam{n}.channel_w1"), vec![c, c / CBAM_REDUCTION]));
            out.push((format!("cnn.cbam{n}.spatial_w"), vec![1, 2, 7, 7]));
            c_in = c;
        }
        let mut d_in = self.cnn_flat_dim();
        for (i, &d) in self.cnn_fc_widths().iter().enumerate() {
            let n = i + 1;
            out.push((format!("cnn.fc{n}.weight"), vec![d, d_in]));
            out.push((format!("cnn.fc{n}.bias"), vec![d]));
            bn(&mut out, format!("cnn.fcbn{n}"), d);
            d_in = d;
        }
        let mut d_in = LANDMARK_DIM;
        for (i, &d) in self.lnn_widths().iter().enumerate() {
            let n = i + 1;
            out.push((format!("lnn.fc{n}.weight"), vec![d, d_in]));
            out.push((format!("lnn.fc{n}.bias"), vec![d]));
            bn(&mut out, format!("lnn.fcbn{n}"), d);
            d_in = d;
        }
        let mut d_in = HOG_DIM;
        for (i, &d) in self.hnn_widths().iter().enumerate() {
            let n = i + 1;
            out.push((format!("hnn.fc{n}.weight"), vec![d, d_in]));
            out.push((format!("hnn.fc{n}.bias"), vec![d]));
            bn(&mut out, format!("hnn.fcbn{n}"), d);
            d_in = d;
        }
        let fused = self.fused_dim();
        out.push(("head.fc1.weight".to_string(), vec![fused, fused]));
        out.push(("head.fc1.bias".to_string(), vec![fused]));
        bn(&mut out, "head.fcbn1".to_string(), fused);
        out.push(("head.out.weight".to_string(), vec![NUM_CLASSES, fused]));
        out.push(("head.out.bias".to_string(), vec![NUM_CLASSES]));
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

/// One stage of the convolutional branch:
/// convolution, batch norm, ReLU, attention, 2x2 max-pool.
#[derive(Debug, Clone)]
struct ConvBlock<F: Scalar> {
    conv: ConvLayer<F>,
    bn: BatchNormLayer<F>,
    cbam: CbamBlock<F>,
}

#[derive(Debug, Clone)]
struct ConvBlockCache<F: Scalar> {
    conv_in: Tensor<F>,
    bn: ops::BnCache<F>,
    preact: Tensor<F>,
    cbam: CbamCache<F>,
    pool_in: Tensor<F>,
}

impl<F: Scalar> ConvBlock<F> {
    fn new(c_in: usize, c_out: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        Ok(ConvBlock {
            conv: ConvLayer::new(c_in, c_out, CONV_KERNEL, rng),
            bn: BatchNormLayer::new(c_out),
            cbam: CbamBlock::new(c_out, CBAM_REDUCTION, rng)?,
        })
    }

    fn forward_train(&mut self, input: &Tensor<F>) -> Result<(Tensor<F>, ConvBlockCache<F>)> {
        let lin = self.conv.forward(input)?;
        let (preact, bn) = self.bn.forward_train(&lin)?;
        let act = ops::relu(&preact);
        let (pool_in, cbam) = self.cbam.forward(&act)?;
        let out = ops::maxpool2d(&pool_in)?;
        Ok((out, ConvBlockCache { conv_in: input.clone(), bn, preact, cbam, pool_in }))
    }

    fn forward_infer(&self, input: &Tensor<F>) -> Result<Tensor<F>> {
        let lin = self.conv.forward(input)?;
        let act = ops::relu(&self.bn.forward_infer(&lin)?);
        let (gated, _) = self.cbam.forward(&act)?;
        ops::maxpool2d(&gated)
    }

    fn backward(&mut self, cache: &ConvBlockCache<F>, grad_out: &Tensor<F>) -> Result<Tensor<F>> {
        let g = ops::maxpool2d_backward(&cache.pool_in, grad_out)?;
        let g = self.cbam.backward(&cache.cbam, &g)?;
        let g = ops::relu_backward(&cache.preact, &g)?;
        let g = self.bn.backward(&cache.bn, &g)?;
        self.conv.backward(&cache.conv_in, &g)
    }

    fn kink_margin(cache: &ConvBlockCache<F>) -> F {
        margin::min_abs(&cache.preact)
            .min(CbamBlock::kink_margin(&cache.cbam))
            .min(margin::min_pool_gap(&cache.pool_in))
    }
}

/// The complete model. Generic over the scalar so gradients can be verified
/// in `f64` while training runs in `f32`.
#[derive(Debug, Clone)]
pub struct FerNetwork<F: Scalar> {
    preset: ArchPreset,
    conv_blocks: Vec<ConvBlock<F>>,
    cnn_fcs: Vec<DenseBlock<F>>,
    lnn_fcs: Vec<DenseBlock<F>>,
    hnn_fcs: Vec<DenseBlock<F>>,
    head_fc: DenseBlock<F>,
    head_out: DenseLayer<F>,
}

/// Every intermediate a training-mode forward pass must retain so the
/// backward pass can run.
#[derive(Debug, Clone)]
pub struct FullCache<F: Scalar> {
    conv: Vec<ConvBlockCache<F>>,
    conv_out_shape: Vec<usize>,
    cnn_fc: Vec<DenseBlockCache<F>>,
    lnn: Vec<DenseBlockCache<F>>,
    hnn: Vec<DenseBlockCache<F>>,
    head_fc: DenseBlockCache<F>,
    head_in: Tensor<F>,
    branch_widths: [usize; 3],
}

impl<F: Scalar> FullCache<F> {
    /// Distance of this forward pass to the nearest ReLU kink or
    /// max-selection tie anywhere in the network. Finite-difference
    /// verification requires this to be comfortably larger than the probe
    /// step.
    pub fn kink_margin(&self) -> F {
        let mut m = F::infinity();
        for c in &self.conv {
            m = m.min(ConvBlock::kink_margin(c));
        }
        for c in self.cnn_fc.iter().chain(&self.lnn).chain(&self.hnn) {
            m = m.min(DenseBlock::kink_margin(c));
        }
        m.min(DenseBlock::kink_margin(&self.head_fc))
    }
}

/// Argmax decision over the class probabilities of one sample.
#[derive(Debug, Clone)]
pub struct Prediction<F: Scalar> {
    pub class_index: usize,
    pub probabilities: Vec<F>,
}

fn init_rng(seed: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[24..32].copy_from_slice(b"net-init");
    ChaCha8Rng::from_seed(key)
}

impl<F: Scalar> FerNetwork<F> {
    /// Build a freshly initialized network. Weights draw from a seeded
    /// Kaiming-uniform scheme; biases start at zero, batch-norm scales at
    /// one. The same `(preset, seed)` always yields identical parameters.
    pub fn new(preset: ArchPreset, seed: u64) -> Result<Self> {
        let mut rng = init_rng(seed);
        let chans = preset.conv_channels();
        let mut conv_blocks = Vec::with_capacity(chans.len());
        let mut c_in = 1;
        for &c in &chans {
            conv_blocks.push(ConvBlock::new(c_in, c, &mut rng)?);
            c_in = c;
        }
        let mut cnn_fcs = Vec::new();
        let mut d_in = preset.cnn_flat_dim();
        for &d in &preset.cnn_fc_widths() {
            cnn_fcs.push(DenseBlock::new(d_in, d, &mut rng));
            d_in = d;
        }
        let mut lnn_fcs = Vec::new();
        let mut d_in = LANDMARK_DIM;
        for &d in &preset.lnn_widths() {
            lnn_fcs.push(DenseBlock::new(d_in, d, &mut rng));
            d_in = d;
        }
        let mut hnn_fcs = Vec::new();
        let mut d_in = HOG_DIM;
        for &d in &preset.hnn_widths() {
            hnn_fcs.push(DenseBlock::new(d_in, d, &mut rng));
            d_in = d;
        }
        let fused = preset.fused_dim();
        let head_fc = DenseBlock::new(fused, fused, &mut rng);
        let head_out = DenseLayer::new(fused, NUM_CLASSES, &mut rng);
        Ok(FerNetwork { preset, conv_blocks, cnn_fcs, lnn_fcs, hnn_fcs, head_fc, head_out })
    }

    pub fn preset(&self) -> ArchPreset {
        self.preset
    }

    fn check_inputs(
        &self,
        images: &Tensor<F>,
        landmarks: &Tensor<F>,
        hog: &Tensor<F>,
    ) -> Result<usize> {
        let &[n, 1, ih, iw] = images.shape() else {
            return Err(FerError::shape(
                "FerNetwork",
                format!("images must be [N,1,{IMAGE_SIDE},{IMAGE_SIDE}], got {:?}", images.shape()),
            ));
        };
        if ih != IMAGE_SIDE || iw != IMAGE_SIDE {
            return Err(FerError::shape(
                "FerNetwork",
                format!("images must be {IMAGE_SIDE}x{IMAGE_SIDE}, got {ih}x{iw}"),
            ));
        }
        if landmarks.shape() != [n, LANDMARK_DIM] {
            return Err(FerError::shape(
                "FerNetwork",
                format!("landmarks must be [{n},{LANDMARK_DIM}], got {:?}", landmarks.shape()),
            ));
        }
        if hog.shape() != [n, HOG_DIM] {
            return Err(FerError::shape(
                "FerNetwork",
                format!("hog must be [{n},{HOG_DIM}], got {:?}", hog.shape()),
            ));
        }
        Ok(n)
    }

    /// Training-mode forward pass over a batch: returns raw logits `[N, 7]`
    /// and the cache consumed by [`FerNetwork::backward`]. Batch norm uses
    /// batch statistics and updates its running estimates.
    pub fn forward_train(
        &mut self,
        images: &Tensor<F>,
        landmarks: &Tensor<F>,
        hog: &Tensor<F>,
    ) -> Result<(Tensor<F>, FullCache<F>)> {
        let n = self.check_inputs(images, landmarks, hog)?;
        let e = self.preset.embedding_dim();

        let mut x = images.clone();
        let mut conv_caches = Vec::with_capacity(self.conv_blocks.len());
        for block in &mut self.conv_blocks {
            let (next, cache) = block.forward_train(&x)?;
            conv_caches.push(cache);
            x = next;
        }
        let conv_out_shape = x.shape().to_vec();
        let mut flat = x.reshaped(vec![n, self.preset.cnn_flat_dim()])?;
        let mut cnn_fc_caches = Vec::with_capacity(self.cnn_fcs.len());
        for fc in &mut self.cnn_fcs {
            let (next, cache) = fc.forward_train(&flat)?;
            cnn_fc_caches.push(cache);
            flat = next;
        }

        let mut lm = landmarks.clone();
        let mut lnn_caches = Vec::with_capacity(self.lnn_fcs.len());
        for fc in &mut self.lnn_fcs {
            let (next, cache) = fc.forward_train(&lm)?;
            lnn_caches.push(cache);
            lm = next;
        }

        let mut hg = hog.clone();
        let mut hnn_caches = Vec::with_capacity(self.hnn_fcs.len());
        for fc in &mut self.hnn_fcs {
            let (next, cache) = fc.forward_train(&hg)?;
            hnn_caches.push(cache);
            hg = next;
        }

        let fused = ops::concat_features(&[&flat, &lm, &hg])?;
        let (head_in, head_fc_cache) = self.head_fc.forward_train(&fused)?;
        let logits = self.head_out.forward(&head_in)?;

        let cache = FullCache {
            conv: conv_caches,
            conv_out_shape,
            cnn_fc: cnn_fc_caches,
            lnn: lnn_caches,
            hnn: hnn_caches,
            head_fc: head_fc_cache,
            head_in,
            branch_widths: [e, e, e],
        };
        Ok((logits, cache))
    }

    /// Inference-mode forward pass: batch norm uses running statistics, no
    /// cache is produced, and the network is not mutated. Works for any
    /// batch size, including a single sample.
    pub fn forward_infer(
        &self,
        images: &Tensor<F>,
        landmarks: &Tensor<F>,
        hog: &Tensor<F>,
    ) -> Result<Tensor<F>> {
        let n = self.check_inputs(images, landmarks, hog)?;

        let mut x = images.clone();
        for block in &self.conv_blocks {
            x = block.forward_infer(&x)?;
        }
        let mut flat = x.reshaped(vec![n, self.preset.cnn_flat_dim()])?;
        for fc in &self.cnn_fcs {
            flat = fc.forward_infer(&flat)?;
        }
        let mut lm = landmarks.clone();
        for fc in &self.lnn_fcs {
            lm = fc.forward_infer(&lm)?;
        }
        let mut hg = hog.clone();
        for fc in &self.hnn_fcs {
            hg = fc.forward_infer(&hg)?;
        }
        let fused = ops::concat_features(&[&flat, &lm, &hg])?;
        let head_in = self.head_fc.forward_infer(&fused)?;
        self.head_out.forward(&head_in)
    }

    /// Backpropagate the loss gradient through the whole network,
    /// accumulating parameter gradients into every layer's gradient buffer.
    pub fn backward(&mut self, cache: &FullCache<F>, d_logits: &Tensor<F>) -> Result<()> {
        let g = self.head_out.backward(&cache.head_in, d_logits)?;
        let g = self.head_fc.backward(&cache.head_fc, &g)?;
        let parts = ops::concat_features_backward(&g, &cache.branch_widths)?;
        let [mut g_cnn, mut g_lnn, mut g_hnn]: [Tensor<F>; 3] =
            parts.try_into().map_err(|_| FerError::invalid("fusion split arity"))?;

        for (fc, c) in self.hnn_fcs.iter_mut().zip(&cache.hnn).rev() {
            g_hnn = fc.backward(c, &g_hnn)?;
        }
        for (fc, c) in self.lnn_fcs.iter_mut().zip(&cache.lnn).rev() {
            g_lnn = fc.backward(c, &g_lnn)?;
        }
        for (fc, c) in self.cnn_fcs.iter_mut().zip(&cache.cnn_fc).rev() {
            g_cnn = fc.backward(c, &g_cnn)?;
        }
        let mut g4 = g_cnn.reshaped(cache.conv_out_shape.clone())?;
        for (block, c) in self.conv_blocks.iter_mut().zip(&cache.conv).rev() {
            g4 = block.backward(c, &g4)?;
        }
        Ok(())
    }

    /// Classify one sample from its raw modalities: preprocessed image,
    /// landmark set. The HOG and normalized-landmark features are derived
    /// here. Rejects non-finite logits; ties resolve to the lowest index.
    pub fn predict_expression(
        &self,
        image: &GrayImage<F>,
        landmarks: &LandmarkSet<F>,
    ) -> Result<Prediction<F>> {
        let pixels = Tensor::new(vec![1, 1, IMAGE_SIDE, IMAGE_SIDE], image.pixels().to_vec())?;
        let lm = Tensor::new(vec![1, LANDMARK_DIM], normalize_landmarks(landmarks)?)?;
        let hog = Tensor::new(vec![1, HOG_DIM], extract_hog(image)?)?;
        let logits = self.forward_infer(&pixels, &lm, &hog)?;
        if !logits.all_finite() {
            return Err(FerError::non_finite("classifier logits"));
        }
        let probs = ops::softmax(&logits)?;
        let row = probs.data();
        Ok(Prediction { class_index: crate::tensor::argmax(row), probabilities: row.to_vec() })
    }

    /// All serialized tensors (trainable parameters plus batch-norm running
    /// statistics), sorted by canonical name.
    pub fn named_params(&self) -> Vec<(String, &Tensor<F>)> {
        let mut out: Vec<(String, &Tensor<F>)> = Vec::new();
        for (i, b) in self.conv_blocks.iter().enumerate() {
            let n = i + 1;
            out.push((format!("cnn.conv{n}.weight"), &b.conv.weight));
            out.push((format!("cnn.conv{n}.bias"), &b.conv.bias));
            out.push((format!("cnn.bn{n}.gamma"), &b.bn.gamma));
            out.push((format!("cnn.bn{n}.beta"), &b.bn.beta));
            out.push((format!("cnn.bn{n}.running_mean"), &b.bn.running_mean));
            out.push((format!("cnn.bn{n}.running_var"), &b.bn.running_var));
            out.push((format!("cnn.cbam{n}.channel_w0"), &b.cbam.channel_w0));
            out.push((format!("cnn.cbam{n}.channel_w1"), &b.cbam.channel_w1));
            out.push((format!("cnn.cbam{n}.spatial_w"), &b.cbam.spatial_w));
        }
        for (prefix, blocks) in [
            ("cnn", &self.cnn_fcs),
            ("lnn", &self.lnn_fcs),
            ("hnn", &self.hnn_fcs),
        ] {
            for (i, b) in blocks.iter().enumerate() {
                let n = i + 1;
                out.push((format!("{prefix}.fc{n}.weight"), &b.fc.weight));
                out.push((format!("{prefix}.fc{n}.bias"), &b.fc.bias));
                out.push((format!("{prefix}.fcbn{n}.gamma"), &b.bn.gamma));
                out.push((format!("{prefix}.fcbn{n}.beta"), &b.bn.beta));
                out.push((format!("{prefix}.fcbn{n}.running_mean"), &b.bn.running_mean));
                out.push((format!("{prefix}.fcbn{n}.running_var"), &b.bn.running_var));
            }
        }
        out.push(("head.fc1.weight".to_string(), &self.head_fc.fc.weight));
        out.push(("head.fc1.bias".to_string(), &self.head_fc.fc.bias));
        out.push(("head.fcbn1.gamma".to_string(), &self.head_fc.bn.gamma));
        out.push(("head.fcbn1.beta".to_string(), &self.head_fc.bn.beta));
        out.push(("head.fcbn1.running_mean".to_string(), &self.head_fc.bn.running_mean));
        out.push(("head.fcbn1.running_var".to_string(), &self.head_fc.bn.running_var));
        out.push(("head.out.weight".to_string(), &self.head_out.weight));
        out.push(("head.out.bias".to_string(), &self.head_out.bias));
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Mutable view of the same tensors as [`FerNetwork::named_params`], in
    /// the same order.
    pub fn named_params_mut(&mut self) -> Vec<(String, &mut Tensor<F>)> {
        let mut out: Vec<(String, &mut Tensor<F>)> = Vec::new();
        for (i, b) in self.conv_blocks.iter_mut().enumerate() {
            let n = i + 1;
            out.push((format!("cnn.conv{n}.weight"), &mut b.conv.weight));
            out.push((format!("cnn.conv{n}.bias"), &mut b.conv.bias));
            out.push((format!("cnn.bn{n}.gamma"), &mut b.bn.gamma));
            out.push((format!("cnn.bn{n}.beta"), &mut b.bn.beta));
            out.push((format!("cnn.bn{n}.running_mean"), &mut b.bn.running_mean));
            out.push((format!("cnn.bn{n}.running_var"), &mut b.bn.running_var));
            out.push((format!("cnn.cbam{n}.channel_w0"), &mut b.cbam.channel_w0));
            out.push((format!("cnn.cbam{n}.channel_w1"), &mut b.cbam.channel_w1));
            out.push((format!("cnn.cbam{n}.spatial_w"), &mut b.cbam.spatial_w));
        }
        for (prefix, blocks) in [
            ("cnn", &mut self.cnn_fcs),
            ("lnn", &mut self.lnn_fcs),
            ("hnn", &mut self.hnn_fcs),
        ] {
            for (i, b) in blocks.iter_mut().enumerate() {
                let n = i + 1;
                out.push((format!("{prefix}.fc{n}.weight"), &mut b.fc.weight));
                out.push((format!("{prefix}.fc{n}.bias"), &mut b.fc.bias));
                out.push((format!("{prefix}.fcbn{n}.gamma"), &mut b.bn.gamma));
                out.push((format!("{prefix}.fcbn{n}.beta"), &mut b.bn.beta));
                out.push((format!("{prefix}.fcbn{n}.running_mean"), &mut b.bn.running_mean));
                out.push((format!("{prefix}.fcbn{n}.running_var"), &mut b.bn.running_var));
            }
        }
        out.push(("head.fc1.weight".to_string(), &mut self.head_fc.fc.weight));
        out.push(("head.fc1.bias".to_string(), &mut self.head_fc.fc.bias));
        out.push(("head.fcbn1.gamma".to_string(), &mut self.head_fc.bn.gamma));
        out.push(("head.fcbn1.beta".to_string(), &mut self.head_fc.bn.beta));
        out.push(("head.fcbn1.running_mean".to_string(), &mut self.head_fc.bn.running_mean));
        out.push(("head.fcbn1.running_var".to_string(), &mut self.head_fc.bn.running_var));
        out.push(("head.out.weight".to_string(), &mut self.head_out.weight));
        out.push(("head.out.bias".to_string(), &mut self.head_out.bias));
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// The tensors the optimizer updates: everything except batch-norm
    /// running statistics.
    pub fn named_trainable(&self) -> Vec<(String, &Tensor<F>)> {
        self.named_params()
            .into_iter()
            .filter(|(name, _)| !is_running_stat(name))
            .collect()
    }

    /// Mutable view of the same tensors as [`FerNetwork::named_trainable`],
    /// in the same order.
    pub fn named_trainable_mut(&mut self) -> Vec<(String, &mut Tensor<F>)> {
        self.named_params_mut()
            .into_iter()
            .filter(|(name, _)| !is_running_stat(name))
            .collect()
    }

    /// Total number of trainable scalar parameters.
    pub fn trainable_len(&self) -> usize {
        self.named_params()
            .iter()
            .filter(|(name, _)| !is_running_stat(name))
            .map(|(_, t)| t.len())
            .sum()
    }

    /// Clear every parameter's gradient buffer.
    pub fn zero_grads(&mut self) {
        for (_, t) in self.named_params_mut() {
            t.zero_grad();
        }
    }
}

pub(crate) fn is_running_stat(name: &str) -> bool {
    name.ends_with(".running_mean") || name.ends_with(".running_var")
}
