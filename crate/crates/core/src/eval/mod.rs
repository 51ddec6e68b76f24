//! Model evaluation: confusion tallies, one-vs-rest ROC analysis,
//! perturbation robustness, and multi-seed variance summaries.

mod confusion;
mod multi_seed;
mod perturb;
mod robustness;
mod roc;

pub use confusion::{AccuracyMetrics, ConfusionMatrix};
pub use multi_seed::{multi_seed_eval, MetricSummary, MultiSeedReport, SeedRun};
pub use perturb::{perturb_image, PerturbSpec};
pub use robustness::{robustness_eval, PerturbScope, SampleOutcome, SpecRow};
pub use roc::{roc_auc, roc_csv, RocCurve, RocPoint};
