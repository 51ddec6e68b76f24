//! The `train` subcommand: ingest, train, and write run artifacts.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ferfuse::model::{save_checkpoint, FerNetwork};

use crate::config::{self, Overrides};
use crate::ingest::{self, Split};
use crate::runlog::{self, EpochLine, RunRecord};

pub fn train(
    data: &Path,
    landmarks: &Path,
    config_path: Option<&Path>,
    overrides: &Overrides,
    out_dir: &Path,
) -> Result<()> {
    let config = config::resolve(config_path, overrides)?;
    let ingested = ingest::ingest(data, landmarks)?;
    eprint!("{}", ingested.report());
    let train_set = ingested.split(Split::Train);
    if train_set.is_empty() {
        bail!("no training rows survived ingestion");
    }
    let val_set = ingested.split(Split::PublicTest);
    let val = if val_set.is_empty() { None } else { Some(&val_set) };

    let mut net = FerNetwork::<f64>::new(config.preset, config.seed)?;
    let mut lines: Vec<EpochLine> = Vec::with_capacity(config.epochs);
    ferfuse::train::train(&mut net, &train_set, val, &config, |record| {
        match record.val_acc {
            Some(val_acc) => println!(
                "epoch {:4}  loss {:.6}  train_acc {:.4}  val_acc {:.4}",
                record.epoch, record.loss, record.train_acc, val_acc
            ),
            None => println!(
                "epoch {:4}  loss {:.6}  train_acc {:.4}",
                record.epoch, record.loss, record.train_acc
            ),
        }
        lines.push(EpochLine {
            epoch: record.epoch,
            loss: record.loss,
            train_acc: record.train_acc,
            val_acc: record.val_acc,
        });
    })?;

    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let checkpoint_path = out_dir.join("checkpoint.bin");
    save_checkpoint(&net, &checkpoint_path)?;
    runlog::write_jsonl(&out_dir.join("run.jsonl"), &lines)?;
    let last = lines.last().expect("training always runs at least one epoch");
    let record = RunRecord {
        config: config::snapshot(&config),
        seed: config.seed,
        data_digest: ingested.manifest.digest.clone(),
        checkpoint: "checkpoint.bin".to_string(),
        final_train_acc: last.train_acc,
        final_val_acc: last.val_acc,
        epochs: lines,
    };
    runlog::write_record(&out_dir.join("run.json"), &record)?;
    println!("checkpoint: {}", checkpoint_path.display());
    Ok(())
}
