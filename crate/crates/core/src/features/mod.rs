//! Input feature pipeline: image preprocessing, histogram-of-oriented-
//! gradients extraction, landmark normalization, and the seeded rigid-motion
//! augmentation used to expand the training set.

mod augment;
mod hog;
mod image;
mod landmarks;

pub use augment::{apply_rigid_transform, augment_sample, AugmentSpec};
pub use hog::extract_hog;
pub use image::{preprocess_image, GrayImage};
pub use landmarks::{normalize_landmarks, LandmarkSet};
