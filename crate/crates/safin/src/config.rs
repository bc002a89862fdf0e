//! Optional TOML configuration; command-line flags take precedence.
//!
//! ```toml
//! seed = 7
//! workers = 4
//!
//! [experiment]
//! class = "custom"
//! a_xl = [-6.0, 0.0]
//! delta_p = [7.0, 17.0]
//! n = 20000
//! ```

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub synth: SynthSection,
    pub train: TrainSection,
    pub run: EpisodeSection,
    pub experiment: EpisodeSection,
    pub assess_sweep: SweepSection,
    pub replay: EpisodeSection,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub n: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub epochs: Option<usize>,
    pub lr: Option<f64>,
    pub batch: Option<usize>,
    pub seed: Option<u64>,
}

/// Shared by `run`, `experiment` and `replay`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeSection {
    pub seed: Option<u64>,
    pub n: Option<u64>,
    pub index: Option<u64>,
    pub class: Option<String>,
    pub planner: Option<String>,
    pub assess: Option<String>,
    pub a_th: Option<f64>,
    pub models: Option<PathBuf>,
    pub a_xl: Option<[f64; 2]>,
    pub delta_p: Option<[f64; 2]>,
    pub horizon: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub n: Option<u64>,
    pub seed: Option<u64>,
    pub models: Option<PathBuf>,
    pub thresholds: Option<Vec<f64>>,
}

impl Config {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("config {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_parse() {
        let c = Config::parse("seed = 3\n[experiment]\nclass = \"custom\"\na_xl = [-6.0, 0.0]\nn = 10\n").unwrap();
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.experiment.class.as_deref(), Some("custom"));
        assert_eq!(c.experiment.a_xl, Some([-6.0, 0.0]));
        assert_eq!(c.run, EpisodeSection::default());
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = Config::parse("[experiment]\nepisodes = 3\n").unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("episodes") && msg.contains("line 2"), "{msg}");
    }
}
