//! Run manifest: what a pipeline run produced and under which identity.
//!
//! The manifest records the config hash, toolkit version, master seed,
//! timestamps, and the artifacts of every executed stage. Artifacts are
//! deterministic given (config, master seed); the manifest's timestamps are
//! the only fields allowed to differ between identical runs.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    /// `"complete"` or `"incomplete"` (the stage failed after producing the
    /// listed partial artifacts).
    pub status: String,
    /// Paths relative to the output directory.
    pub artifacts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub started_unix: u64,
    pub finished_unix: u64,
    /// `"complete"`, `"running"`, or `"failed at stage '<name>'"`.
    pub status: String,
    /// Family carried into the training and optimization stages; equals the
    /// rank stage's winner unless the config pinned one.
    pub winner_family: String,
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    pub fn new(config_hash: String, master_seed: u64) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            master_seed,
            started_unix: unix_now(),
            finished_unix: 0,
            status: "running".into(),
            winner_family: String::new(),
            stages: Vec::new(),
        }
    }

    pub fn stage(&self, name: &str) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.name == name)
    }

    /// Absolute path of `name`'s first artifact ending in `suffix`, if the
    /// stage completed.
    pub fn artifact(&self, root: &Path, stage: &str, suffix: &str) -> Option<PathBuf> {
        let record = self.stage(stage)?;
        if record.status != "complete" {
            return None;
        }
        record
            .artifacts
            .iter()
            .find(|a| a.ends_with(suffix))
            .map(|a| root.join(a))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).context("serializing manifest")?;
        std::fs::write(dir.join(MANIFEST_FILE), text).context("writing manifest")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

pub fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
