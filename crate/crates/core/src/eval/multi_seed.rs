//! Repeated training runs under consecutive seeds, summarized per metric.

use crate::data::Dataset;
use crate::error::{FerError, Result};
use crate::eval::{robustness_eval, ConfusionMatrix, PerturbScope};
use crate::model::FerNetwork;
use crate::scalar::Scalar;
use crate::train::{train, TrainConfig};

/// Mean and range of one metric across runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl MetricSummary {
    fn over(values: &[f64]) -> Self {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        MetricSummary { mean, min, max }
    }
}

/// Metrics from a single seeded training run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedRun {
    /// Seed this run trained under.
    pub seed: u64,
    /// Top-1 accuracy over the dataset after training.
    pub overall_accuracy: f64,
    /// Macro-averaged per-class accuracy after training.
    pub macro_accuracy: f64,
    /// Training loss of the final epoch.
    pub final_loss: f64,
}

/// All runs of a seed sweep plus per-metric summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSeedReport {
    /// One entry per run, in seed order.
    pub runs: Vec<SeedRun>,
    pub overall_accuracy: MetricSummary,
    pub macro_accuracy: MetricSummary,
    pub final_loss: MetricSummary,
}

/// Trains `runs` fresh networks under seeds `config.seed`, `config.seed + 1`,
/// ... and evaluates each on `data`, reporting every run and the mean and
/// range of each metric. A single run degenerates to its own values.
pub fn multi_seed_eval<F: Scalar>(
    config: &TrainConfig,
    data: &Dataset<F>,
    runs: usize,
) -> Result<MultiSeedReport> {
    if runs == 0 {
        return Err(FerError::invalid("a seed sweep needs at least one run"));
    }
    let mut seed_runs = Vec::with_capacity(runs);
    for offset in 0..runs as u64 {
        let mut run_config = config.clone();
        run_config.seed = config.seed.wrapping_add(offset);
        let mut net = FerNetwork::new(run_config.preset, run_config.seed)?;
        let report = train(&mut net, data, None, &run_config, |_| {})?;
        let final_loss = report
            .history
            .last()
            .map(|record| record.loss.to_f64())
            .ok_or_else(|| FerError::invalid("training produced no epochs"))?;
        let baseline = &robustness_eval(&net, data, &[], PerturbScope::Features)?[0];
        let predictions: Vec<usize> =
            baseline.outcomes.iter().map(|outcome| outcome.predicted).collect();
        let labels: Vec<usize> =
            baseline.outcomes.iter().map(|outcome| outcome.true_class).collect();
        let metrics = ConfusionMatrix::from_predictions(&predictions, &labels)?.metrics()?;
        seed_runs.push(SeedRun {
            seed: run_config.seed,
            overall_accuracy: metrics.overall,
            macro_accuracy: metrics.macro_average,
            final_loss,
        });
    }
    let column = |pick: fn(&SeedRun) -> f64| -> Vec<f64> { seed_runs.iter().map(pick).collect() };
    Ok(MultiSeedReport {
        overall_accuracy: MetricSummary::over(&column(|run| run.overall_accuracy)),
        macro_accuracy: MetricSummary::over(&column(|run| run.macro_accuracy)),
        final_loss: MetricSummary::over(&column(|run| run.final_loss)),
        runs: seed_runs,
    })
}
