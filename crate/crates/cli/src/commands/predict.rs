//! The `predict` subcommand: classify one sample from the dataset.

use std::path::Path;

use anyhow::{bail, Result};
use ferfuse::model::load_checkpoint;
use ferfuse::CLASS_NAMES;

use crate::ingest;

pub fn predict(checkpoint: &Path, data: &Path, landmarks: &Path, index: usize) -> Result<()> {
    let net = load_checkpoint::<f64>(checkpoint)?;
    let ingested = ingest::ingest(data, landmarks)?;
    eprint!("{}", ingested.report());
    let dataset = ingested.all();
    let Some(sample) = dataset.get(index) else {
        bail!("sample index {index} out of range for {} ingested samples", dataset.len());
    };
    let prediction = net.predict_expression(sample.image(), sample.landmarks())?;
    let probabilities: Vec<String> =
        prediction.probabilities.iter().map(|p| format!("{p}")).collect();
    println!(
        "{} {} {}",
        CLASS_NAMES[prediction.class_index],
        prediction.class_index,
        probabilities.join(" ")
    );
    Ok(())
}
