//! Sample and dataset containers. Derived features (HOG, normalized
//! landmarks) are computed once at construction so batch assembly is a pure
//! copy.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{FerError, Result};
use crate::features::{
    augment_sample, extract_hog, normalize_landmarks, AugmentSpec, GrayImage, LandmarkSet,
};
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use crate::{HOG_DIM, IMAGE_SIDE, LANDMARK_DIM, NUM_CLASSES};

/// One labelled face carrying all three input modalities.
#[derive(Debug, Clone)]
pub struct MultimodalSample<F: Scalar> {
    image: GrayImage<F>,
    landmarks: LandmarkSet<F>,
    landmark_features: Vec<F>,
    hog: Vec<F>,
    label: usize,
}

impl<F: Scalar> MultimodalSample<F> {
    /// Builds a sample from a 48×48 image, its raw landmarks, and a class
    /// label, deriving the HOG and normalized-landmark features.
    pub fn new(image: GrayImage<F>, landmarks: LandmarkSet<F>, label: usize) -> Result<Self> {
        if image.height() != IMAGE_SIDE || image.width() != IMAGE_SIDE {
            return Err(FerError::invalid(format!(
                "sample image must be {IMAGE_SIDE}x{IMAGE_SIDE}, got {}x{}",
                image.height(),
                image.width()
            )));
        }
        if label >= NUM_CLASSES {
            return Err(FerError::invalid(format!(
                "label {label} outside 0..{NUM_CLASSES}"
            )));
        }
        let hog = extract_hog(&image)?;
        let landmark_features = normalize_landmarks(&landmarks)?;
        Ok(MultimodalSample { image, landmarks, landmark_features, hog, label })
    }

    pub fn image(&self) -> &GrayImage<F> {
        &self.image
    }

    pub fn landmarks(&self) -> &LandmarkSet<F> {
        &self.landmarks
    }

    /// Normalized landmark coordinates, interleaved, length 136.
    pub fn landmark_features(&self) -> &[F] {
        &self.landmark_features
    }

    /// HOG descriptor of the image, length 900.
    pub fn hog(&self) -> &[F] {
        &self.hog
    }

    pub fn label(&self) -> usize {
        self.label
    }

    /// Variant `draw` of this sample under `spec`, with both derived
    /// features recomputed from the transformed image and landmarks. Draw 0
    /// reproduces the sample unchanged.
    pub fn augmented(
        &self,
        spec: &AugmentSpec,
        seed: u64,
        sample_id: u64,
        draw: u64,
    ) -> Result<Self> {
        if draw == 0 {
            return Ok(self.clone());
        }
        let (image, landmarks) =
            augment_sample(&self.image, &self.landmarks, spec, seed, sample_id, draw)?;
        Self::new(image, landmarks, self.label)
    }
}

/// An in-memory labelled dataset.
#[derive(Debug, Clone)]
pub struct Dataset<F: Scalar> {
    samples: Vec<MultimodalSample<F>>,
}

impl<F: Scalar> Dataset<F> {
    pub fn new(samples: Vec<MultimodalSample<F>>) -> Self {
        Dataset { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[MultimodalSample<F>] {
        &self.samples
    }

    pub fn get(&self, index: usize) -> Option<&MultimodalSample<F>> {
        self.samples.get(index)
    }

    /// Splits into `(train, validation)` by a seeded shuffle;
    /// `val_fraction` of the samples (rounded to nearest) go to validation.
    pub fn split(&self, val_fraction: f64, seed: u64) -> Result<(Dataset<F>, Dataset<F>)> {
        if !(0.0..1.0).contains(&val_fraction) {
            return Err(FerError::invalid(format!(
                "validation fraction must be in [0, 1), got {val_fraction}"
            )));
        }
        let n = self.samples.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut split_rng(seed));
        let val_n = ((n as f64) * val_fraction).round() as usize;
        let val = order[..val_n].iter().map(|&i| self.samples[i].clone()).collect();
        let train = order[val_n..].iter().map(|&i| self.samples[i].clone()).collect();
        Ok((Dataset::new(train), Dataset::new(val)))
    }

    /// Stacks the samples at `indices` into batched input tensors plus the
    /// label vector.
    pub fn batch(&self, indices: &[usize]) -> Result<(Tensor<F>, Tensor<F>, Tensor<F>, Vec<usize>)> {
        let mut refs = Vec::with_capacity(indices.len());
        for &i in indices {
            refs.push(self.samples.get(i).ok_or_else(|| {
                FerError::invalid(format!("batch index {i} outside dataset of {}", self.len()))
            })?);
        }
        batch_tensors(&refs)
    }
}

/// Stacks samples into `[N,1,48,48]` image, `[N,136]` landmark, and
/// `[N,900]` HOG tensors plus the label vector.
pub fn batch_tensors<F: Scalar>(
    samples: &[&MultimodalSample<F>],
) -> Result<(Tensor<F>, Tensor<F>, Tensor<F>, Vec<usize>)> {
    if samples.is_empty() {
        return Err(FerError::invalid("cannot batch zero samples"));
    }
    let n = samples.len();
    let mut images = Vec::with_capacity(n * IMAGE_SIDE * IMAGE_SIDE);
    let mut landmarks = Vec::with_capacity(n * LANDMARK_DIM);
    let mut hog = Vec::with_capacity(n * HOG_DIM);
    let mut labels = Vec::with_capacity(n);
    for s in samples {
        images.extend_from_slice(s.image().pixels());
        landmarks.extend_from_slice(s.landmark_features());
        hog.extend_from_slice(s.hog());
        labels.push(s.label());
    }
    Ok((
        Tensor::new(vec![n, 1, IMAGE_SIDE, IMAGE_SIDE], images)?,
        Tensor::new(vec![n, LANDMARK_DIM], landmarks)?,
        Tensor::new(vec![n, HOG_DIM], hog)?,
        labels,
    ))
}

fn split_rng(seed: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..17].copy_from_slice(b"set-split");
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic_dataset;
    use crate::NUM_LANDMARKS;

    fn test_image() -> GrayImage<f64> {
        let pixels = (0..IMAGE_SIDE * IMAGE_SIDE)
            .map(|i| (i % 97) as f64 / 96.0)
            .collect();
        GrayImage::new(IMAGE_SIDE, IMAGE_SIDE, pixels).unwrap()
    }

    fn test_landmarks() -> LandmarkSet<f64> {
        LandmarkSet::new(
            (0..NUM_LANDMARKS)
                .map(|i| (10.0 + (i % 9) as f64, 14.0 + (i / 9) as f64))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn construction_derives_both_feature_vectors() {
        let s = MultimodalSample::new(test_image(), test_landmarks(), 3).unwrap();
        assert_eq!(s.hog(), extract_hog(&test_image()).unwrap().as_slice());
        assert_eq!(
            s.landmark_features(),
            normalize_landmarks(&test_landmarks()).unwrap().as_slice()
        );
        assert_eq!(s.label(), 3);
    }

    #[test]
    fn out_of_range_label_is_rejected() {
        let err = MultimodalSample::new(test_image(), test_landmarks(), 7).unwrap_err();
        assert!(matches!(err, FerError::InvalidArgument(_)));
    }

    #[test]
    fn wrong_image_size_is_rejected() {
        let img = GrayImage::new(24, 24, vec![0.5; 24 * 24]).unwrap();
        let err = MultimodalSample::new(img, test_landmarks(), 0).unwrap_err();
        assert!(matches!(err, FerError::InvalidArgument(_)));
    }

    #[test]
    fn augmented_draw_zero_is_the_sample_itself() {
        let s = MultimodalSample::new(test_image(), test_landmarks(), 2).unwrap();
        let a = s.augmented(&AugmentSpec::default(), 9, 4, 0).unwrap();
        assert_eq!(a.image().pixels(), s.image().pixels());
        assert_eq!(a.hog(), s.hog());
        assert_eq!(a.landmark_features(), s.landmark_features());
    }

    #[test]
    fn augmented_draws_recompute_features_consistently() {
        let s = MultimodalSample::new(test_image(), test_landmarks(), 2).unwrap();
        let a = s.augmented(&AugmentSpec::default(), 9, 4, 3).unwrap();
        assert_ne!(a.image().pixels(), s.image().pixels());
        assert_eq!(a.hog(), extract_hog(a.image()).unwrap().as_slice());
        assert_eq!(
            a.landmark_features(),
            normalize_landmarks(a.landmarks()).unwrap().as_slice()
        );
        assert_eq!(a.label(), 2);
    }

    #[test]
    fn batch_stacks_samples_in_order() {
        let data = synthetic_dataset::<f64>(5, 11).unwrap();
        let (imgs, lms, hogs, labels) = data.batch(&[4, 0, 2]).unwrap();
        assert_eq!(imgs.shape(), [3, 1, IMAGE_SIDE, IMAGE_SIDE]);
        assert_eq!(lms.shape(), [3, LANDMARK_DIM]);
        assert_eq!(hogs.shape(), [3, HOG_DIM]);
        assert_eq!(labels, vec![4, 0, 2]);
        let s4 = data.get(4).unwrap();
        assert_eq!(&imgs.data()[..IMAGE_SIDE * IMAGE_SIDE], s4.image().pixels());
        assert_eq!(&hogs.data()[..HOG_DIM], s4.hog());
        assert_eq!(&lms.data()[..LANDMARK_DIM], s4.landmark_features());
    }

    #[test]
    fn batch_rejects_bad_index_and_empty_selection() {
        let data = synthetic_dataset::<f64>(3, 11).unwrap();
        assert!(data.batch(&[3]).is_err());
        assert!(data.batch(&[]).is_err());
    }

    #[test]
    fn split_partitions_the_dataset_deterministically() {
        let data = synthetic_dataset::<f64>(10, 7).unwrap();
        let (train, val) = data.split(0.3, 5).unwrap();
        assert_eq!(train.len(), 7);
        assert_eq!(val.len(), 3);
        let (train2, val2) = data.split(0.3, 5).unwrap();
        for (a, b) in train.samples().iter().zip(train2.samples()) {
            assert_eq!(a.image().pixels(), b.image().pixels());
        }
        assert_eq!(
            val.samples().iter().map(|s| s.label()).collect::<Vec<_>>(),
            val2.samples().iter().map(|s| s.label()).collect::<Vec<_>>()
        );
        let mut labels: Vec<usize> = train
            .samples()
            .iter()
            .chain(val.samples())
            .map(|s| s.label())
            .collect();
        labels.sort_unstable();
        let mut expected: Vec<usize> = (0..10).map(|i| i % NUM_CLASSES).collect();
        expected.sort_unstable();
        assert_eq!(labels, expected);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let data = synthetic_dataset::<f64>(4, 7).unwrap();
        assert!(data.split(1.0, 0).is_err());
        assert!(data.split(-0.1, 0).is_err());
    }
}
