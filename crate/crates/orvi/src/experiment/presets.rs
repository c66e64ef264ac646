//! Built-in experiment configs, shipped as TOML under `presets/`.

use super::ExperimentConfig;
use crate::error::{Error, Result};

const PRESETS: &[(&str, &str)] = &[
    ("reference-e-zero", include_str!("../../presets/reference-e-zero.toml")),
    ("reference-e-zero-joint", include_str!("../../presets/reference-e-zero-joint.toml")),
    ("reference-e-nonzero", include_str!("../../presets/reference-e-nonzero.toml")),
    ("reference-e-nonzero-joint", include_str!("../../presets/reference-e-nonzero-joint.toml")),
    ("state-feedback-demo", include_str!("../../presets/state-feedback-demo.toml")),
    ("output-feedback-demo", include_str!("../../presets/output-feedback-demo.toml")),
    ("unexcited", include_str!("../../presets/unexcited.toml")),
];

/// `(name, one-line description)` for every preset.
pub fn list() -> Vec<(&'static str, &'static str)> {
    PRESETS
        .iter()
        .map(|(name, text)| {
            let desc = text.lines().next().and_then(|l| l.strip_prefix("# ")).unwrap_or("");
            (*name, desc)
        })
        .collect()
}

pub fn source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn load(name: &str) -> Result<ExperimentConfig> {
    let text = source(name).ok_or_else(|| {
        let names: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
        Error::Config(format!("unknown preset `{name}` (available: {})", names.join(", ")))
    })?;
    ExperimentConfig::from_toml(text)
}
