//! Toolkit configuration file (TOML). Every field has a default, so an empty
//! file is a valid configuration.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{ReportFormat, StageConfig};
use crate::miner::MinerParams;
use crate::rules::{default_rcpd_rules, RuleSet};
use crate::segmenter::SegmenterConfig;
use crate::strategy::DEFAULT_DEER_THRESHOLD;
use crate::stream::Cadence;
use crate::synth::SynthParams;
use crate::trace::DEFAULT_RANK_CAP;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToolkitConfig {
    pub rank_cap: u32,
    pub segmenter: SegmenterConfig,
    pub rules: RuleSet,
    pub cadence: Cadence,
    pub report_format: ReportFormat,
    pub deer_threshold: f64,
    pub stage: StageConfig,
    /// Base synth parameters; `preset` selects a named set first.
    pub synth_preset: Option<String>,
    pub synth: Option<SynthParams>,
    pub miner: MinerParams,
}

impl Default for ToolkitConfig {
    fn default() -> Self {
        ToolkitConfig {
            rank_cap: DEFAULT_RANK_CAP,
            segmenter: SegmenterConfig::default(),
            rules: default_rcpd_rules(),
            cadence: Cadence::Sentence,
            report_format: ReportFormat::Table,
            deer_threshold: DEFAULT_DEER_THRESHOLD,
            stage: StageConfig::default(),
            synth_preset: None,
            synth: None,
            miner: MinerParams::default(),
        }
    }
}

impl ToolkitConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: ToolkitConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.rules.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Synth parameters: the named preset (or defaults), then `[synth]` if given.
    pub fn synth_params(&self) -> Result<SynthParams> {
        if let Some(p) = &self.synth {
            return Ok(p.clone());
        }
        SynthParams::preset(self.synth_preset.as_deref().unwrap_or("default"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(
            ToolkitConfig::from_toml("").unwrap(),
            ToolkitConfig::default()
        );
    }

    #[test]
    fn round_trip() {
        let c = ToolkitConfig::default();
        assert_eq!(ToolkitConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn partial_override() {
        let c = ToolkitConfig::from_toml(
            r#"
rank_cap = 2048
cadence = "token"
[segmenter]
blank_line = false
[[rules.rules]]
rule_id = "A"
current_threshold = 3
history = [[1, 40]]
[miner]
depth = 4
"#,
        )
        .unwrap();
        assert_eq!(c.rank_cap, 2048);
        assert!(!c.segmenter.blank_line);
        assert_eq!(c.segmenter.punctuation, ".?!");
        assert_eq!(c.rules.rules.len(), 1);
        assert_eq!(c.rules.rules[0].history, vec![(1, 40)]);
        assert_eq!(c.miner.depth, 4);
        assert_eq!(c.miner.n_trees, 50);
        assert_eq!(c.cadence, Cadence::Token);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_rules() {
        assert!(ToolkitConfig::from_toml("nope = 1").is_err());
        assert!(ToolkitConfig::from_toml(
            "[[rules.rules]]\nrule_id = \"A\"\ncurrent_threshold = 0\n"
        )
        .is_err());
    }
}
