//! Labelled multimodal samples, in-memory datasets with seeded splits and
//! batch assembly, and a seeded synthetic dataset for desk-scale runs.

mod sample;
mod synth;

pub use sample::{batch_tensors, Dataset, MultimodalSample};
pub use synth::synthetic_dataset;
