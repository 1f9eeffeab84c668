//! Limits and paths, from a TOML file overridden by flags.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use serde::Deserialize;

/// Every field optional; see [`Settings`] for defaults.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingsFile {
    pub jobs: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    /// Seconds per operation.
    pub time_limit: Option<u64>,
    pub format: Option<String>,
    pub catalog: Option<PathBuf>,
    /// Fraction of cached records recomputed per run.
    pub resample: Option<f64>,
}

impl SettingsFile {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    pub jobs: usize,
    pub cache_dir: Option<PathBuf>,
    pub time_limit: Option<Duration>,
    pub catalog: PathBuf,
    pub resample: f64,
}

/// Catalog shipped with the crate.
pub fn default_catalog() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("catalog")
}

pub fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl Default for Settings {
    fn default() -> Self {
        Settings { jobs: default_jobs(), cache_dir: None, time_limit: None, catalog: default_catalog(), resample: 0.1 }
    }
}

impl Settings {
    /// File values over defaults. Flags are applied by the caller.
    pub fn from_file(file: &SettingsFile) -> anyhow::Result<Self> {
        let d = Settings::default();
        let resample = file.resample.unwrap_or(d.resample);
        anyhow::ensure!((0.0..=1.0).contains(&resample), "resample must lie in [0, 1], got {resample}");
        anyhow::ensure!(file.jobs != Some(0), "jobs must be at least 1");
        Ok(Settings {
            jobs: file.jobs.unwrap_or(d.jobs),
            cache_dir: file.cache_dir.clone(),
            time_limit: file.time_limit.map(Duration::from_secs),
            catalog: file.catalog.clone().unwrap_or(d.catalog),
            resample,
        })
    }
}
