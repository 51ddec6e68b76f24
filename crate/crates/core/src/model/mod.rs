//! The three-branch expression network: layer building blocks, the CBAM
//! attention module, the network itself, and checkpoint serialization.

mod cbam;
mod checkpoint;
mod layers;
pub(crate) mod margin;
mod network;

pub use cbam::{CbamBlock, CbamCache};
pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use layers::{BatchNormLayer, ConvLayer, DenseBlock, DenseBlockCache, DenseLayer};
pub use network::{ArchPreset, FerNetwork, FullCache, Prediction};
