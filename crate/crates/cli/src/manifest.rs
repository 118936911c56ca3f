//! JSON manifests written next to every command's outputs.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use pnmf_core::synth::SynthConfig;
use pnmf_core::UnmixConfig;
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to rerun a command. Field order is fixed by the struct
/// and maps are sorted, so equal runs produce byte-identical files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub endmembers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub synth: Option<SynthConfig>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub unmix: Option<UnmixConfig>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    /// Command-specific settings and results.
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            tool: "pnmf".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            endmembers: None,
            synth: None,
            unmix: None,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            extra: BTreeMap::new(),
        }
    }

    pub fn input(&mut self, key: &str, path: &Path) {
        self.inputs.insert(key.into(), path.display().to_string());
    }

    pub fn output(&mut self, key: &str, name: &str) {
        self.outputs.insert(key.into(), name.into());
    }

    pub fn extra(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.extra.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
