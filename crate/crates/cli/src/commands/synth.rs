//! The `synth` subcommand: emit the seeded synthetic dataset as a
//! FER2013-layout CSV plus landmark sidecar.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use ferfuse::data::synthetic_dataset;

pub fn synth(seed: u64, count: usize, out_dir: &Path) -> Result<()> {
    let data = synthetic_dataset::<f64>(count, seed)?;
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    let mut csv = String::from("emotion,pixels,Usage\n");
    let mut sidecar = String::new();
    for (id, sample) in data.samples().iter().enumerate() {
        let pixels: Vec<String> = sample
            .image()
            .pixels()
            .iter()
            .map(|&v| (((v * 255.0).round() as i64).clamp(0, 255)).to_string())
            .collect();
        let _ = writeln!(csv, "{},{},Training", sample.label(), pixels.join(" "));
        let coords: Vec<String> = sample
            .landmarks()
            .points()
            .iter()
            .flat_map(|&(x, y)| [format!("{x}"), format!("{y}")])
            .collect();
        let _ = writeln!(sidecar, "{id} {}", coords.join(" "));
    }

    let csv_path = out_dir.join("synth.csv");
    let sidecar_path = out_dir.join("synth_landmarks.txt");
    fs::write(&csv_path, csv)?;
    fs::write(&sidecar_path, sidecar)?;
    println!(
        "wrote {} samples (seed {seed}) to {} and {}",
        data.len(),
        csv_path.display(),
        sidecar_path.display()
    );
    Ok(())
}
