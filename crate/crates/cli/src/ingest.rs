//! FER2013-layout CSV ingestion with landmark sidecars. Every input row
//! becomes either a sample or a diagnosed rejection; counts always
//! reconcile.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ferfuse::data::{Dataset, MultimodalSample};
use ferfuse::features::{GrayImage, LandmarkSet};
use ferfuse::{IMAGE_SIDE, LANDMARK_DIM, NUM_CLASSES};
use sha2::{Digest, Sha256};

const PIXELS_PER_IMAGE: usize = IMAGE_SIDE * IMAGE_SIDE;

/// Which split a data row is tagged with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    PublicTest,
    FinalTest,
}

impl Split {
    fn from_usage(tag: &str) -> Option<Self> {
        match tag {
            "Training" => Some(Split::Train),
            "PublicTest" => Some(Split::PublicTest),
            "PrivateTest" => Some(Split::FinalTest),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::PublicTest => "public-test",
            Split::FinalTest => "final-test",
        }
    }
}

/// A rejected input line and the diagnosis.
#[derive(Debug, Clone)]
pub struct Rejection {
    pub file: &'static str,
    pub line: usize,
    pub reason: String,
}

/// Where a dataset came from and what survived ingestion.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub csv: String,
    pub landmarks: String,
    pub rows: usize,
    pub samples: usize,
    pub split_counts: [usize; 3],
    pub digest: String,
}

/// Samples, rejections, and the manifest for one CSV + sidecar pair.
pub struct Ingested {
    pub samples: Vec<(MultimodalSample<f64>, Split)>,
    pub rejections: Vec<Rejection>,
    pub manifest: DatasetManifest,
}

impl Ingested {
    /// The samples tagged with one split, in row order.
    pub fn split(&self, split: Split) -> Dataset<f64> {
        let samples = self
            .samples
            .iter()
            .filter(|(_, tag)| *tag == split)
            .map(|(sample, _)| sample.clone())
            .collect();
        Dataset::new(samples)
    }

    /// All ingested samples regardless of split, in row order.
    pub fn all(&self) -> Dataset<f64> {
        Dataset::new(self.samples.iter().map(|(sample, _)| sample.clone()).collect())
    }

    /// One line per rejection plus a reconciliation summary.
    pub fn report(&self) -> String {
        let mut out = String::new();
        for rejection in &self.rejections {
            let _ = writeln!(
                out,
                "{} line {}: rejected: {}",
                rejection.file, rejection.line, rejection.reason
            );
        }
        let splits: Vec<String> = [Split::Train, Split::PublicTest, Split::FinalTest]
            .iter()
            .map(|&split| {
                format!("{} {}", self.manifest.split_counts[split as usize], split.name())
            })
            .collect();
        let _ = writeln!(
            out,
            "{} + {}: {} data rows -> {} samples ({}) + {} rejected rows (digest {})",
            self.manifest.csv,
            self.manifest.landmarks,
            self.manifest.rows,
            self.manifest.samples,
            splits.join(", "),
            self.manifest.rows - self.manifest.samples,
            self.manifest.digest
        );
        out
    }
}

/// Ingests a dataset CSV and its landmark sidecar. Malformed rows and
/// sidecar lines are collected as rejections, never silently dropped; a
/// data row lacking landmarks is rejected with its row index.
pub fn ingest(csv_path: &Path, landmarks_path: &Path) -> Result<Ingested> {
    let csv_bytes =
        fs::read(csv_path).with_context(|| format!("reading dataset {}", csv_path.display()))?;
    let sidecar_text = fs::read_to_string(landmarks_path)
        .with_context(|| format!("reading landmarks {}", landmarks_path.display()))?;
    let (landmark_map, mut rejections) = parse_landmarks(&sidecar_text);

    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(csv_bytes.as_slice());
    let headers = reader
        .headers()
        .with_context(|| format!("reading header of {}", csv_path.display()))?;
    let expected = ["emotion", "pixels", "Usage"];
    if headers.iter().ne(expected) {
        bail!(
            "{}: header must be `emotion,pixels,Usage`, got `{}`",
            csv_path.display(),
            headers.iter().collect::<Vec<_>>().join(",")
        );
    }

    let mut samples = Vec::new();
    let mut split_counts = [0usize; 3];
    let mut rows = 0usize;
    for (index, record) in reader.records().enumerate() {
        rows += 1;
        let line = index + 2;
        let record = match record {
            Ok(record) => record,
            Err(error) => {
                rejections.push(Rejection { file: "csv", line, reason: error.to_string() });
                continue;
            }
        };
        let (label, image, split) = match parse_row(&record) {
            Ok(parsed) => parsed,
            Err(reason) => {
                rejections.push(Rejection { file: "csv", line, reason });
                continue;
            }
        };
        let Some(landmarks) = landmark_map.get(&index) else {
            rejections.push(Rejection {
                file: "csv",
                line,
                reason: format!("no landmarks for data row {index}"),
            });
            continue;
        };
        match MultimodalSample::new(image, landmarks.clone(), label) {
            Ok(sample) => {
                split_counts[split as usize] += 1;
                samples.push((sample, split));
            }
            Err(error) => {
                rejections.push(Rejection { file: "csv", line, reason: error.to_string() })
            }
        }
    }

    let mut hasher = Sha256::new();
    hasher.update(&csv_bytes);
    hasher.update(sidecar_text.as_bytes());
    let digest: String = hasher.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect();

    let manifest = DatasetManifest {
        csv: csv_path.display().to_string(),
        landmarks: landmarks_path.display().to_string(),
        rows,
        samples: samples.len(),
        split_counts,
        digest,
    };
    Ok(Ingested { samples, rejections, manifest })
}

fn parse_row(record: &csv::StringRecord) -> std::result::Result<(usize, GrayImage<f64>, Split), String> {
    if record.len() != 3 {
        return Err(format!("expected 3 fields, got {}", record.len()));
    }
    let label: usize =
        record[0].parse().map_err(|_| format!("label `{}` is not an integer", &record[0]))?;
    if label >= NUM_CLASSES {
        return Err(format!("label {label} outside 0-{}", NUM_CLASSES - 1));
    }
    let mut pixels = Vec::with_capacity(PIXELS_PER_IMAGE);
    for token in record[1].split_whitespace() {
        let value: u16 =
            token.parse().map_err(|_| format!("pixel `{token}` is not an integer"))?;
        if value > 255 {
            return Err(format!("pixel value {value} outside 0-255"));
        }
        pixels.push(value as u8);
    }
    if pixels.len() != PIXELS_PER_IMAGE {
        return Err(format!("expected {PIXELS_PER_IMAGE} pixels, got {}", pixels.len()));
    }
    let image = GrayImage::from_u8(IMAGE_SIDE, IMAGE_SIDE, &pixels).map_err(|e| e.to_string())?;
    let split = Split::from_usage(&record[2])
        .ok_or_else(|| format!("unknown usage tag `{}`", &record[2]))?;
    Ok((label, image, split))
}

/// Parses the sidecar: each line is an id followed by 136 coordinates.
/// Duplicate ids keep the first record and reject the rest.
fn parse_landmarks(text: &str) -> (BTreeMap<usize, LandmarkSet<f64>>, Vec<Rejection>) {
    let mut map = BTreeMap::new();
    let mut rejections = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let mut reject = |reason: String| {
            rejections.push(Rejection { file: "landmarks", line, reason });
        };
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 1 + LANDMARK_DIM {
            reject(format!("expected id plus {LANDMARK_DIM} coordinates, got {} fields", fields.len()));
            continue;
        }
        let Ok(id) = fields[0].parse::<usize>() else {
            reject(format!("id `{}` is not an integer", fields[0]));
            continue;
        };
        let mut flat = Vec::with_capacity(LANDMARK_DIM);
        let mut bad = None;
        for token in &fields[1..] {
            match token.parse::<f64>() {
                Ok(value) => flat.push(value),
                Err(_) => {
                    bad = Some(format!("coordinate `{token}` is not a number"));
                    break;
                }
            }
        }
        if let Some(reason) = bad {
            reject(reason);
            continue;
        }
        let set = match LandmarkSet::from_flat(&flat) {
            Ok(set) => set,
            Err(error) => {
                reject(error.to_string());
                continue;
            }
        };
        if map.contains_key(&id) {
            reject(format!("duplicate id {id}; keeping the first record"));
            continue;
        }
        map.insert(id, set);
    }
    (map, rejections)
}
