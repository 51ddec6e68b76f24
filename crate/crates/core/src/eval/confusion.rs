//! Prediction-versus-label tallies and the accuracy figures read off them.

use crate::error::{FerError, Result};
use crate::NUM_CLASSES;

/// A 7x7 tally of evaluation outcomes. Cell `[i][j]` counts samples whose
/// true class is `i` and whose predicted class is `j`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    cells: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

/// Accuracy metrics derived from a [`ConfusionMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyMetrics {
    /// Fraction of all tallied samples predicted correctly.
    pub overall: f64,
    /// Per-class recall; `None` for classes with no tallied samples.
    pub per_class: [Option<f64>; NUM_CLASSES],
    /// Mean of the defined per-class values.
    pub macro_average: f64,
}

impl ConfusionMatrix {
    /// An empty tally.
    pub fn new() -> Self {
        Self::default()
    }

    /// Tallies one outcome.
    pub fn record(&mut self, true_class: usize, predicted: usize) -> Result<()> {
        if true_class >= NUM_CLASSES || predicted >= NUM_CLASSES {
            return Err(FerError::invalid(format!(
                "class indices must be below {NUM_CLASSES}, got true {true_class} and \
                 predicted {predicted}"
            )));
        }
        self.cells[true_class][predicted] += 1;
        Ok(())
    }

    /// Tallies a whole prediction run against its labels.
    pub fn from_predictions(predictions: &[usize], labels: &[usize]) -> Result<Self> {
        if predictions.len() != labels.len() {
            return Err(FerError::invalid(format!(
                "{} predictions cannot be tallied against {} labels",
                predictions.len(),
                labels.len()
            )));
        }
        let mut matrix = Self::new();
        for (&predicted, &label) in predictions.iter().zip(labels) {
            matrix.record(label, predicted)?;
        }
        Ok(matrix)
    }

    /// Count of samples with the given true and predicted classes.
    pub fn cell(&self, true_class: usize, predicted: usize) -> u64 {
        self.cells[true_class][predicted]
    }

    /// Total number of tallied samples.
    pub fn total(&self) -> u64 {
        self.cells.iter().flatten().sum()
    }

    /// Overall, per-class, and macro-averaged accuracy. An empty tally has
    /// no accuracy and is rejected.
    pub fn metrics(&self) -> Result<AccuracyMetrics> {
        let total = self.total();
        if total == 0 {
            return Err(FerError::invalid("an empty confusion matrix has no accuracy"));
        }
        let trace: u64 = (0..NUM_CLASSES).map(|i| self.cells[i][i]).sum();
        let mut per_class = [None; NUM_CLASSES];
        let mut sum = 0.0;
        let mut defined = 0u32;
        for (class, row) in self.cells.iter().enumerate() {
            let row_total: u64 = row.iter().sum();
            if row_total > 0 {
                let recall = row[class] as f64 / row_total as f64;
                per_class[class] = Some(recall);
                sum += recall;
                defined += 1;
            }
        }
        Ok(AccuracyMetrics {
            overall: trace as f64 / total as f64,
            per_class,
            macro_average: sum / f64::from(defined),
        })
    }

    /// Seven lines of seven comma-separated counts, true class per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.cells {
            let line: Vec<String> = row.iter().map(u64::to_string).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}
