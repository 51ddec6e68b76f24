//! Command-line driver for the ferfuse stack: dataset ingestion, training,
//! evaluation, single-sample prediction, gradient checking, robustness
//! probes, and synthetic dataset generation.

mod commands;
mod config;
mod ingest;
mod runlog;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ferfuse", version, about = "Multimodal facial-expression network toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Dataset file flags shared by every command that reads samples.
#[derive(Args)]
struct DataArgs {
    /// Dataset CSV with header `emotion,pixels,Usage`
    #[arg(long)]
    data: PathBuf,
    /// Landmark sidecar: one line per data row, id plus 136 coordinates
    #[arg(long)]
    landmarks: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Train a network and write a checkpoint plus run logs
    Train {
        #[command(flatten)]
        data: DataArgs,
        /// Flat `key = value` configuration file
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the configured seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured architecture preset
        #[arg(long, value_parser = ["full", "tiny"])]
        preset: Option<String>,
        /// Override the configured epoch count
        #[arg(long)]
        epochs: Option<usize>,
        /// Directory receiving checkpoint.bin, run.jsonl, and run.json
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Evaluate a checkpoint and write metrics CSVs
    Eval {
        #[command(flatten)]
        data: DataArgs,
        /// Checkpoint to evaluate
        #[arg(long)]
        checkpoint: PathBuf,
        /// Directory receiving confusion.csv and roc.csv
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Classify one sample and print its class and probabilities
    Predict {
        #[command(flatten)]
        data: DataArgs,
        /// Checkpoint to predict with
        #[arg(long)]
        checkpoint: PathBuf,
        /// Zero-based row index of the sample to classify
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Verify every backward pass against finite differences
    Gradcheck {
        /// Finite-difference probe points per layer
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Parameter coordinates probed on the full network
        #[arg(long, default_value_t = 100)]
        end_to_end_coords: usize,
    },
    /// Probe prediction robustness under image perturbations
    Perturb {
        #[command(flatten)]
        data: DataArgs,
        /// Checkpoint to probe
        #[arg(long)]
        checkpoint: PathBuf,
        /// Perturbations: mouth-occlusion, eye-occlusion, full-occlusion,
        /// brighten, dim, occlusion:TOP,LEFT,HEIGHT,WIDTH, brightness:FACTOR
        #[arg(value_name = "SPEC")]
        specs: Vec<String>,
        /// Perturb the image branch only, keeping original HOG and
        /// landmark features
        #[arg(long)]
        image_only: bool,
        /// Also write robustness.csv here
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Emit the seeded synthetic dataset as a CSV plus landmark sidecar
    Synth {
        /// Generator seed
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Number of samples to emit
        #[arg(long, default_value_t = 64)]
        count: usize,
        /// Directory receiving synth.csv and synth_landmarks.txt
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train { data, config, seed, preset, epochs, out_dir } => {
            let overrides = config::Overrides { seed, preset, epochs };
            commands::train(&data.data, &data.landmarks, config.as_deref(), &overrides, &out_dir)
        }
        Command::Eval { data, checkpoint, out_dir } => {
            commands::eval(&checkpoint, &data.data, &data.landmarks, &out_dir)
        }
        Command::Predict { data, checkpoint, index } => {
            commands::predict(&checkpoint, &data.data, &data.landmarks, index)
        }
        Command::Gradcheck { points, end_to_end_coords } => {
            commands::gradcheck(points, end_to_end_coords)
        }
        Command::Perturb { data, checkpoint, specs, image_only, out_dir } => commands::perturb(
            &checkpoint,
            &data.data,
            &data.landmarks,
            &specs,
            image_only,
            out_dir.as_deref(),
        ),
        Command::Synth { seed, count, out_dir } => commands::synth(seed, count, &out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}
