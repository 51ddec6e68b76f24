//! Flat `key = value` configuration files and the command-line overrides
//! layered on top of them.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ferfuse::model::ArchPreset;
use ferfuse::train::TrainConfig;

/// Command-line values that take precedence over the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub preset: Option<String>,
    pub epochs: Option<usize>,
}

/// Layers `path` (when given) over the default configuration, then the
/// command-line overrides over that, and validates the result.
pub fn resolve(path: Option<&Path>, overrides: &Overrides) -> Result<TrainConfig> {
    let mut config = TrainConfig::default();
    if let Some(path) = path {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        apply_text(&mut config, &text)
            .with_context(|| format!("parsing config {}", path.display()))?;
    }
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(name) = &overrides.preset {
        config.preset = ArchPreset::from_name(name)?;
    }
    if let Some(epochs) = overrides.epochs {
        config.epochs = epochs;
    }
    config.validate()?;
    Ok(config)
}

fn apply_text(config: &mut TrainConfig, text: &str) -> Result<()> {
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {}: expected `key = value`, got `{line}`", index + 1);
        };
        set_field(config, key.trim(), value.trim())
            .with_context(|| format!("line {}", index + 1))?;
    }
    Ok(())
}

fn set_field(config: &mut TrainConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "learning_rate" => config.learning_rate = value.parse()?,
        "beta1" => config.beta1 = value.parse()?,
        "beta2" => config.beta2 = value.parse()?,
        "epsilon" => config.epsilon = value.parse()?,
        "epochs" => config.epochs = value.parse()?,
        "batch_size" => config.batch_size = value.parse()?,
        "seed" => config.seed = value.parse()?,
        "preset" => config.preset = ArchPreset::from_name(value)?,
        "augment_translate_px" => config.augment.max_translate_px = value.parse()?,
        "augment_rotate_deg" => config.augment.max_rotate_deg = value.parse()?,
        "augment_expansion" => config.augment.expansion = value.parse()?,
        other => bail!("unknown config key `{other}`"),
    }
    Ok(())
}

/// Every resolved field rendered as text, for the run record.
pub fn snapshot(config: &TrainConfig) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("learning_rate".into(), config.learning_rate.to_string()),
        ("beta1".into(), config.beta1.to_string()),
        ("beta2".into(), config.beta2.to_string()),
        ("epsilon".into(), config.epsilon.to_string()),
        ("epochs".into(), config.epochs.to_string()),
        ("batch_size".into(), config.batch_size.to_string()),
        ("seed".into(), config.seed.to_string()),
        ("preset".into(), config.preset.name().to_string()),
        ("augment_translate_px".into(), config.augment.max_translate_px.to_string()),
        ("augment_rotate_deg".into(), config.augment.max_rotate_deg.to_string()),
        ("augment_expansion".into(), config.augment.expansion.to_string()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn files_override_defaults_and_flags_override_files() {
        let mut config = TrainConfig::default();
        apply_text(&mut config, "epochs = 12\nseed = 3\npreset = tiny\n# comment\n\n").unwrap();
        assert_eq!(config.epochs, 12);
        assert_eq!(config.seed, 3);
        assert_eq!(config.preset, ArchPreset::Tiny);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "epochs = 12\nseed = 3\n").unwrap();
        let overrides = Overrides { seed: Some(9), preset: None, epochs: None };
        let resolved = resolve(Some(&path), &overrides).unwrap();
        assert_eq!(resolved.seed, 9);
        assert_eq!(resolved.epochs, 12);
    }

    #[test]
    fn every_field_is_addressable() {
        let mut config = TrainConfig::default();
        let text = "learning_rate = 0.01\nbeta1 = 0.8\nbeta2 = 0.99\nepsilon = 1e-7\n\
                    epochs = 3\nbatch_size = 16\nseed = 5\npreset = tiny\n\
                    augment_translate_px = 2\naugment_rotate_deg = 10\naugment_expansion = 4\n";
        apply_text(&mut config, text).unwrap();
        for (key, value) in snapshot(&config) {
            assert!(text.contains(&key), "snapshot key {key} missing from text");
            assert!(!value.is_empty());
        }
        assert_eq!(config.learning_rate, 0.01);
        assert_eq!(config.augment.expansion, 4);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        let mut config = TrainConfig::default();
        assert!(apply_text(&mut config, "turbo = on\n").is_err());
        assert!(apply_text(&mut config, "epochs = soon\n").is_err());
        assert!(apply_text(&mut config, "no equals sign\n").is_err());
    }
}
