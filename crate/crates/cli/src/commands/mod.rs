//! Subcommand implementations.

mod eval;
mod gradcheck;
mod perturb;
mod predict;
mod synth;
mod train;

pub use eval::eval;
pub use gradcheck::gradcheck;
pub use perturb::perturb;
pub use predict::predict;
pub use synth::synth;
pub use train::train;
