//! The `perturb` subcommand: robustness report under image corruptions.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ferfuse::eval::{robustness_eval, PerturbScope, PerturbSpec};
use ferfuse::model::load_checkpoint;

use crate::ingest;

pub fn perturb(
    checkpoint: &Path,
    data: &Path,
    landmarks: &Path,
    spec_names: &[String],
    image_only: bool,
    out_dir: Option<&Path>,
) -> Result<()> {
    let net = load_checkpoint::<f64>(checkpoint)?;
    let ingested = ingest::ingest(data, landmarks)?;
    eprint!("{}", ingested.report());
    let dataset = ingested.all();
    if dataset.is_empty() {
        bail!("no samples survived ingestion");
    }

    let specs: Vec<PerturbSpec> = if spec_names.is_empty() {
        vec![
            PerturbSpec::mouth_occlusion(),
            PerturbSpec::eye_occlusion(),
            PerturbSpec::brighten(),
            PerturbSpec::dim(),
        ]
    } else {
        spec_names.iter().map(|name| parse_spec(name)).collect::<Result<_>>()?
    };
    let scope = if image_only { PerturbScope::ImageOnly } else { PerturbScope::Features };
    let rows = robustness_eval(&net, &dataset, &specs, scope)?;

    println!("{:<36} {:>8}  {:>14}", "perturbation", "accuracy", "mean_true_conf");
    let mut csv = String::from("perturbation,accuracy,mean_true_confidence\n");
    for row in &rows {
        println!("{:<36} {:>8.4}  {:>14.4}", row.label, row.accuracy, row.mean_true_confidence);
        let _ = writeln!(csv, "{},{},{}", row.label, row.accuracy, row.mean_true_confidence);
    }
    if let Some(out_dir) = out_dir {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        let path = out_dir.join("robustness.csv");
        fs::write(&path, csv)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Parses a perturbation name: a preset, `occlusion:TOP,LEFT,HEIGHT,WIDTH`,
/// or `brightness:FACTOR`.
fn parse_spec(text: &str) -> Result<PerturbSpec> {
    let spec = match text {
        "mouth-occlusion" => PerturbSpec::mouth_occlusion(),
        "eye-occlusion" => PerturbSpec::eye_occlusion(),
        "full-occlusion" => PerturbSpec::full_occlusion(),
        "brighten" => PerturbSpec::brighten(),
        "dim" => PerturbSpec::dim(),
        other => {
            if let Some(rect) = other.strip_prefix("occlusion:") {
                let fields: Vec<&str> = rect.split(',').collect();
                if fields.len() != 4 {
                    bail!("occlusion wants TOP,LEFT,HEIGHT,WIDTH, got `{rect}`");
                }
                let parse = |s: &str| -> Result<usize> {
                    s.trim().parse().with_context(|| format!("bad occlusion bound `{s}`"))
                };
                PerturbSpec::Occlusion {
                    top: parse(fields[0])?,
                    left: parse(fields[1])?,
                    height: parse(fields[2])?,
                    width: parse(fields[3])?,
                }
            } else if let Some(factor) = other.strip_prefix("brightness:") {
                PerturbSpec::Brightness {
                    factor: factor
                        .trim()
                        .parse()
                        .with_context(|| format!("bad brightness factor `{factor}`"))?,
                }
            } else {
                bail!(
                    "unknown perturbation `{other}`; expected mouth-occlusion, eye-occlusion, \
                     full-occlusion, brighten, dim, occlusion:TOP,LEFT,HEIGHT,WIDTH, or \
                     brightness:FACTOR"
                );
            }
        }
    };
    spec.validate()?;
    Ok(spec)
}
