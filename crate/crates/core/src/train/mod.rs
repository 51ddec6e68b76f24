//! Loss, optimizer, and the seeded training loop.

mod adam;
mod loss;
mod trainer;

pub use adam::{adam_step, AdamState};
pub use loss::{cross_entropy, softmax_cross_entropy, softmax_cross_entropy_grad};
pub use trainer::{dataset_accuracy, train, EpochRecord, TrainConfig, TrainReport};
