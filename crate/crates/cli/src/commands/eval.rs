//! The `eval` subcommand: confusion and ROC CSVs plus a printed summary.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ferfuse::data::Dataset;
use ferfuse::eval::{roc_auc, roc_csv, ConfusionMatrix};
use ferfuse::model::{load_checkpoint, FerNetwork};
use ferfuse::ops;
use ferfuse::{Tensor, CLASS_NAMES, NUM_CLASSES};

use crate::ingest;

const CHUNK: usize = 64;

pub fn eval(checkpoint: &Path, data: &Path, landmarks: &Path, out_dir: &Path) -> Result<()> {
    let net = load_checkpoint::<f64>(checkpoint)?;
    let ingested = ingest::ingest(data, landmarks)?;
    eprint!("{}", ingested.report());
    let dataset = ingested.all();
    if dataset.is_empty() {
        bail!("no samples survived ingestion");
    }

    let (scores, labels, predictions) = score_matrix(&net, &dataset)?;
    let matrix = ConfusionMatrix::from_predictions(&predictions, &labels)?;
    let metrics = matrix.metrics()?;
    let curves = roc_auc(&scores, &labels)?;

    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    fs::write(out_dir.join("confusion.csv"), matrix.to_csv())?;
    fs::write(out_dir.join("roc.csv"), roc_csv(&curves))?;

    println!("samples: {}", dataset.len());
    println!("overall accuracy: {:.4}", metrics.overall);
    println!("macro accuracy:   {:.4}", metrics.macro_average);
    for (class, name) in CLASS_NAMES.iter().enumerate() {
        let accuracy = metrics.per_class[class]
            .map_or_else(|| "   n/a".to_string(), |v| format!("{v:.4}"));
        let auc = curves[class]
            .as_ref()
            .map_or_else(|| "   n/a".to_string(), |c| format!("{:.4}", c.auc));
        println!("  {name:<9} accuracy {accuracy}  auc {auc}");
    }
    println!("wrote {} and {}", out_dir.join("confusion.csv").display(), out_dir.join("roc.csv").display());
    Ok(())
}

/// Softmax scores for every sample, with labels and argmax predictions.
/// Ties resolve to the lowest class index.
fn score_matrix(
    net: &FerNetwork<f64>,
    data: &Dataset<f64>,
) -> Result<(Tensor<f64>, Vec<usize>, Vec<usize>)> {
    let n = data.len();
    let mut scores = Vec::with_capacity(n * NUM_CLASSES);
    let mut labels = Vec::with_capacity(n);
    let mut predictions = Vec::with_capacity(n);
    let indices: Vec<usize> = (0..n).collect();
    for chunk in indices.chunks(CHUNK) {
        let (images, landmark_t, hog_t, chunk_labels) = data.batch(chunk)?;
        let logits = net.forward_infer(&images, &landmark_t, &hog_t)?;
        let probabilities = ops::softmax(&logits)?;
        for row in probabilities.data().chunks(NUM_CLASSES) {
            predictions.push(argmax(row));
            scores.extend_from_slice(row);
        }
        labels.extend(chunk_labels);
    }
    Ok((Tensor::new(vec![n, NUM_CLASSES], scores)?, labels, predictions))
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (index, &value) in row.iter().enumerate() {
        if value > row[best] {
            best = index;
        }
    }
    best
}
