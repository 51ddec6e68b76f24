//! The seeded training loop: deterministic augmented batch assembly,
//! forward/backward, Adam updates, divergence rollback, and per-epoch
//! metrics.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{batch_tensors, Dataset, MultimodalSample};
use crate::error::{FerError, Result};
use crate::features::AugmentSpec;
use crate::model::{ArchPreset, FerNetwork};
use crate::scalar::Scalar;
use crate::tensor;

use super::{adam_step, softmax_cross_entropy, AdamState};

/// Hyper-parameters and run controls for [`train`].
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub preset: ArchPreset,
    pub augment: AugmentSpec,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs: 500,
            batch_size: 64,
            seed: 0,
            preset: ArchPreset::Full,
            augment: AugmentSpec::default(),
        }
    }
}

impl TrainConfig {
    /// Rejects out-of-range hyper-parameters.
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(FerError::invalid(format!(
                "learning rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        for (name, beta) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&beta) {
                return Err(FerError::invalid(format!("{name} must be in [0, 1), got {beta}")));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(FerError::invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.epochs == 0 {
            return Err(FerError::invalid("epochs must be at least 1"));
        }
        if self.batch_size < 2 {
            return Err(FerError::invalid(
                "batch size must be at least 2 so batch norm has statistics",
            ));
        }
        if self.augment.expansion == 0 {
            return Err(FerError::invalid("augmentation expansion must be at least 1"));
        }
        if !(self.augment.max_translate_px >= 0.0 && self.augment.max_translate_px.is_finite())
            || !(self.augment.max_rotate_deg >= 0.0 && self.augment.max_rotate_deg.is_finite())
        {
            return Err(FerError::invalid("augmentation bounds must be non-negative and finite"));
        }
        Ok(())
    }
}

/// Metrics captured at the end of one epoch. Accuracies are inference-mode
/// top-1 over the unaugmented datasets.
#[derive(Debug, Clone)]
pub struct EpochRecord<F: Scalar> {
    pub epoch: usize,
    pub loss: F,
    pub train_acc: F,
    pub val_acc: Option<F>,
}

/// A completed training run: one record per epoch plus the total number of
/// optimizer steps taken.
#[derive(Debug, Clone)]
pub struct TrainReport<F: Scalar> {
    pub history: Vec<EpochRecord<F>>,
    pub optimizer_steps: u64,
}

/// Trains `net` on `data` under `config`, reporting validation accuracy
/// per epoch when `val` is given. `on_epoch` sees each record as soon as
/// its epoch finishes. If the loss or any gradient turns non-finite, the
/// parameters are restored to the end of the last finite epoch and an
/// error names the failing epoch.
pub fn train<F: Scalar>(
    net: &mut FerNetwork<F>,
    data: &Dataset<F>,
    val: Option<&Dataset<F>>,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord<F>),
) -> Result<TrainReport<F>> {
    config.validate()?;
    if net.preset() != config.preset {
        return Err(FerError::invalid(format!(
            "config preset {} does not match the network's {}",
            config.preset.name(),
            net.preset().name()
        )));
    }
    if data.is_empty() {
        return Err(FerError::invalid("training dataset is empty"));
    }
    let expansion = config.augment.expansion;
    let effective = data.len() * expansion;
    if effective == 1 {
        return Err(FerError::invalid("a single training sample cannot be batch-normalized"));
    }
    if effective % config.batch_size == 1 {
        return Err(FerError::invalid(format!(
            "{effective} samples with batch size {} leave a final batch of 1, which cannot \
             be batch-normalized; adjust the batch size",
            config.batch_size
        )));
    }

    let mut adam = AdamState::for_network(net);
    let mut history = Vec::with_capacity(config.epochs);
    let mut snapshot = snapshot_params(net);

    for epoch in 1..=config.epochs {
        match run_epoch(net, data, config, &mut adam, epoch) {
            Ok(loss) => {
                let train_acc = dataset_accuracy(net, data, config.batch_size)?;
                let val_acc = match val {
                    Some(v) => Some(dataset_accuracy(net, v, config.batch_size)?),
                    None => None,
                };
                let record = EpochRecord { epoch, loss, train_acc, val_acc };
                on_epoch(&record);
                history.push(record);
                snapshot = snapshot_params(net);
            }
            Err(FerError::NonFinite(detail)) => {
                restore_params(net, &snapshot);
                return Err(FerError::non_finite(format!(
                    "training diverged in epoch {epoch} ({detail}); parameters restored to \
                     the end of epoch {}",
                    epoch - 1
                )));
            }
            Err(other) => return Err(other),
        }
    }
    Ok(TrainReport { history, optimizer_steps: adam.step_count() })
}

fn run_epoch<F: Scalar>(
    net: &mut FerNetwork<F>,
    data: &Dataset<F>,
    config: &TrainConfig,
    adam: &mut AdamState<F>,
    epoch: usize,
) -> Result<F> {
    let expansion = config.augment.expansion;
    let effective = data.len() * expansion;
    let mut order: Vec<usize> = (0..effective).collect();
    order.shuffle(&mut epoch_rng(config.seed, epoch as u64));

    let mut loss_sum = F::zero();
    for chunk in order.chunks(config.batch_size) {
        let mut variants: Vec<MultimodalSample<F>> = Vec::with_capacity(chunk.len());
        for &idx in chunk {
            let sample_id = idx / expansion;
            let draw = idx % expansion;
            let base = data.get(sample_id).expect("index within dataset");
            variants.push(base.augmented(
                &config.augment,
                config.seed,
                sample_id as u64,
                draw as u64,
            )?);
        }
        let refs: Vec<&MultimodalSample<F>> = variants.iter().collect();
        let (images, landmarks, hog, labels) = batch_tensors(&refs)?;

        net.zero_grads();
        let (logits, cache) = net.forward_train(&images, &landmarks, &hog)?;
        let (loss, d_logits) = softmax_cross_entropy(&logits, &labels)?;
        if !loss.is_finite() {
            return Err(FerError::non_finite("batch loss"));
        }
        loss_sum += loss * F::from_usize(chunk.len());
        net.backward(&cache, &d_logits)?;

        let mut params: Vec<&mut crate::tensor::Tensor<F>> =
            net.named_trainable_mut().into_iter().map(|(_, t)| t).collect();
        adam_step(&mut params, adam, config)?;
    }
    Ok(loss_sum / F::from_usize(effective))
}

/// Inference-mode top-1 accuracy over a dataset, evaluated in batches.
pub fn dataset_accuracy<F: Scalar>(
    net: &FerNetwork<F>,
    data: &Dataset<F>,
    batch_size: usize,
) -> Result<F> {
    if data.is_empty() {
        return Err(FerError::invalid("cannot evaluate accuracy on an empty dataset"));
    }
    if batch_size == 0 {
        return Err(FerError::invalid("batch size must be at least 1"));
    }
    let indices: Vec<usize> = (0..data.len()).collect();
    let mut correct = 0usize;
    for chunk in indices.chunks(batch_size) {
        let (images, landmarks, hog, labels) = data.batch(chunk)?;
        let logits = net.forward_infer(&images, &landmarks, &hog)?;
        let k = logits.shape()[1];
        for (row, &label) in logits.data().chunks(k).zip(&labels) {
            if tensor::argmax(row) == label {
                correct += 1;
            }
        }
    }
    Ok(F::from_usize(correct) / F::from_usize(data.len()))
}

fn epoch_rng(seed: u64, epoch: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&epoch.to_le_bytes());
    key[16..24].copy_from_slice(b"ep-order");
    ChaCha8Rng::from_seed(key)
}

fn snapshot_params<F: Scalar>(net: &FerNetwork<F>) -> Vec<Vec<F>> {
    net.named_params().iter().map(|(_, t)| t.data().to_vec()).collect()
}

fn restore_params<F: Scalar>(net: &mut FerNetwork<F>, snapshot: &[Vec<F>]) {
    for ((_, tensor), saved) in net.named_params_mut().into_iter().zip(snapshot) {
        tensor.data_mut().copy_from_slice(saved);
    }
}
