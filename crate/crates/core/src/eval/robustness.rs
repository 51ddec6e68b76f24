//! Prediction robustness under deterministic image perturbations.

use crate::data::Dataset;
use crate::error::{FerError, Result};
use crate::eval::{perturb_image, PerturbSpec};
use crate::features::extract_hog;
use crate::model::FerNetwork;
use crate::ops;
use crate::scalar::Scalar;
use crate::tensor::{self, Tensor};
use crate::{HOG_DIM, LANDMARK_DIM, NUM_CLASSES};

const CHUNK: usize = 64;

/// Which input branches see a perturbed image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PerturbScope {
    /// Recompute downstream image features from the perturbed pixels so
    /// every image-derived modality sees the corruption. Landmark positions
    /// are geometric and pass through unchanged.
    #[default]
    Features,
    /// Feed the perturbed pixels to the image branch only, keeping the
    /// original landmark and HOG features.
    ImageOnly,
}

/// Outcome of one prediction under one perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleOutcome {
    /// Index of the sample within the dataset.
    pub sample: usize,
    /// Predicted class index.
    pub predicted: usize,
    /// The sample's labeled class.
    pub true_class: usize,
    /// Softmax probability assigned to the labeled class.
    pub true_confidence: f64,
    /// Whether the prediction matched the label.
    pub correct: bool,
}

/// Whole-dataset aggregates for one perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecRow {
    /// Human-readable perturbation label; `baseline` for none.
    pub label: String,
    /// Fraction of samples predicted correctly.
    pub accuracy: f64,
    /// Mean softmax probability assigned to the labeled class.
    pub mean_true_confidence: f64,
    /// Per-sample outcomes in dataset order.
    pub outcomes: Vec<SampleOutcome>,
}

/// Evaluates the network on the unperturbed dataset and then once per
/// perturbation, in order. The first row is always the baseline; an empty
/// spec list yields the baseline row alone.
pub fn robustness_eval<F: Scalar>(
    net: &FerNetwork<F>,
    data: &Dataset<F>,
    specs: &[PerturbSpec],
    scope: PerturbScope,
) -> Result<Vec<SpecRow>> {
    if data.is_empty() {
        return Err(FerError::invalid("cannot probe robustness on an empty dataset"));
    }
    for spec in specs {
        spec.validate()?;
    }
    let mut rows = Vec::with_capacity(specs.len() + 1);
    rows.push(evaluate(net, data, None, scope)?);
    for spec in specs {
        rows.push(evaluate(net, data, Some(spec), scope)?);
    }
    Ok(rows)
}

/// Runs inference over the whole dataset under one optional perturbation.
fn evaluate<F: Scalar>(
    net: &FerNetwork<F>,
    data: &Dataset<F>,
    spec: Option<&PerturbSpec>,
    scope: PerturbScope,
) -> Result<SpecRow> {
    let n = data.len();
    let mut outcomes = Vec::with_capacity(n);
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let count = end - start;
        let mut images = Vec::with_capacity(count * data.samples()[0].image().pixels().len());
        let mut landmarks = Vec::with_capacity(count * LANDMARK_DIM);
        let mut hogs = Vec::with_capacity(count * HOG_DIM);
        let mut labels = Vec::with_capacity(count);
        for sample in &data.samples()[start..end] {
            match spec {
                None => {
                    images.extend_from_slice(sample.image().pixels());
                    hogs.extend_from_slice(sample.hog());
                }
                Some(spec) => {
                    let perturbed = perturb_image(sample.image(), spec)?;
                    match scope {
                        PerturbScope::Features => hogs.extend(extract_hog(&perturbed)?),
                        PerturbScope::ImageOnly => hogs.extend_from_slice(sample.hog()),
                    }
                    images.extend_from_slice(perturbed.pixels());
                }
            }
            landmarks.extend_from_slice(sample.landmark_features());
            labels.push(sample.label());
        }
        let side = data.samples()[0].image().height();
        let images = Tensor::new(vec![count, 1, side, side], images)?;
        let landmarks = Tensor::new(vec![count, LANDMARK_DIM], landmarks)?;
        let hogs = Tensor::new(vec![count, HOG_DIM], hogs)?;
        let logits = net.forward_infer(&images, &landmarks, &hogs)?;
        let probabilities = ops::softmax(&logits)?;
        for (offset, row) in probabilities.data().chunks(NUM_CLASSES).enumerate() {
            let predicted = tensor::argmax(row);
            let true_class = labels[offset];
            outcomes.push(SampleOutcome {
                sample: start + offset,
                predicted,
                true_class,
                true_confidence: row[true_class].to_f64(),
                correct: predicted == true_class,
            });
        }
        start = end;
    }
    let correct = outcomes.iter().filter(|outcome| outcome.correct).count();
    let total = outcomes.iter().map(|outcome| outcome.true_confidence).sum::<f64>();
    Ok(SpecRow {
        label: spec.map_or_else(|| "baseline".to_string(), ToString::to_string),
        accuracy: correct as f64 / n as f64,
        mean_true_confidence: total / n as f64,
        outcomes,
    })
}
