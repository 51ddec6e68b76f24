//! Run artifacts: the line-delimited epoch log and the whole-run record.
//! Neither carries timestamps, so reruns under the same config and seed
//! are byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

/// One epoch of training, as logged.
#[derive(Debug, Clone, Serialize)]
pub struct EpochLine {
    pub epoch: usize,
    pub loss: f64,
    pub train_acc: f64,
    pub val_acc: Option<f64>,
}

/// Everything needed to reproduce and audit one training run.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    /// Resolved configuration, every field rendered as text.
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    /// Dataset content digest the run trained on.
    pub data_digest: String,
    pub epochs: Vec<EpochLine>,
    /// Path of the final checkpoint, relative to the run directory.
    pub checkpoint: String,
    pub final_train_acc: f64,
    pub final_val_acc: Option<f64>,
}

/// Writes one JSON record per line.
pub fn write_jsonl(path: &Path, lines: &[EpochLine]) -> Result<()> {
    let mut out = String::new();
    for line in lines {
        out.push_str(&serde_json::to_string(line)?);
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// Writes the whole-run record as pretty JSON.
pub fn write_record(path: &Path, record: &RunRecord) -> Result<()> {
    let mut text = serde_json::to_string_pretty(record)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
