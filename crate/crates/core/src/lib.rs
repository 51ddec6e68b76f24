//! Multimodal facial-expression recognition built from first principles.
//!
//! Three sub-networks encode complementary views of a 48x48 grayscale face —
//! a convolutional stack with channel/spatial attention over the raw image, a
//! dense network over normalized landmark coordinates, and a dense network
//! over histogram-of-oriented-gradients features — and their 128-wide
//! embeddings are concatenated and classified into seven expressions by a
//! softmax head.
//!
//! Everything numeric is hand-written: tensors, layer forward/backward
//! passes, the optimizer, the feature extractors. Every gradient path is
//! checked against central finite differences (see [`gradcheck`]), and the
//! evaluation module includes a perturbation harness for probing robustness
//! to occlusion and brightness changes.
//!
//! The numeric kernels are generic over [`Scalar`] so the same code runs in
//! `f64` for gradient verification and `f32` for training.

mod error;
mod scalar;
mod tensor;

pub mod data;
pub mod eval;
pub mod features;
pub mod gradcheck;
pub mod model;
pub mod ops;
pub mod train;

pub use error::{FerError, Result};
pub use scalar::Scalar;
pub use tensor::Tensor;

/// Number of expression classes.
pub const NUM_CLASSES: usize = 7;

/// Class names in label order 0..=6.
pub const CLASS_NAMES: [&str; NUM_CLASSES] =
    ["Angry", "Disgust", "Fear", "Happy", "Sad", "Surprise", "Neutral"];

/// Side length of the square input image in pixels.
pub const IMAGE_SIDE: usize = 48;

/// Number of facial landmark points per face.
pub const NUM_LANDMARKS: usize = 68;

/// Width of the flattened landmark feature vector (x and y per point).
pub const LANDMARK_DIM: usize = 2 * NUM_LANDMARKS;

/// Width of the histogram-of-oriented-gradients feature vector.
pub const HOG_DIM: usize = 900;

/// Training-precision tensor.
pub type Tensor32 = Tensor<f32>;
/// Verification-precision tensor.
pub type Tensor64 = Tensor<f64>;
