//! On-disk results keyed by a SHA-256 of the operation and its definitions.

use std::collections::hash_map::RandomState;
use std::hash::BuildHasher;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ops::{Operation, Outcome};

/// A cached run. `config_hash` is also the file name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub config_hash: String,
    #[serde(flatten)]
    pub outcome: Outcome,
    pub wall_time_ms: u64,
}

/// Key over the tool version, the definitions text and the operation.
pub fn cache_key(op: &Operation, defs: &str) -> String {
    let payload = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "defs": defs,
        "op": op,
    });
    hex::encode(Sha256::digest(payload.to_string().as_bytes()))
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: &Path) -> anyhow::Result<Cache> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating cache directory {}", dir.display()))?;
        Ok(Cache { dir: dir.to_path_buf() })
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    /// A missing or unreadable record is a miss.
    pub fn get(&self, key: &str) -> Option<RunRecord> {
        let text = std::fs::read_to_string(self.path(key)).ok()?;
        serde_json::from_str::<RunRecord>(&text).ok().filter(|r| r.config_hash == key)
    }

    /// Written to a temporary file and renamed, so readers never see a
    /// partial record.
    pub fn put(&self, record: &RunRecord) -> anyhow::Result<()> {
        let path = self.path(&record.config_hash);
        let parent = path.parent().expect("keyed path has a parent");
        std::fs::create_dir_all(parent)?;
        let tmp = parent.join(format!(".{}.{}.tmp", record.config_hash, std::process::id()));
        std::fs::write(&tmp, serde_json::to_string_pretty(record)?)?;
        std::fs::rename(&tmp, &path)?;
        Ok(())
    }
}

/// Whether a hit is recomputed this run. The hasher is seeded per process,
/// so each run draws a fresh sample of about `fraction` of the keys.
pub fn resample(key: &str, fraction: f64, seed: &RandomState) -> bool {
    (seed.hash_one(key) % 10_000) as f64 / 10_000.0 < fraction
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::Status;

    #[test]
    fn records_round_trip_under_their_key() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let op = Operation::CheckHp { class: "builtin graphs".into(), size: 3 };
        let key = cache_key(&op, "");
        assert_eq!(key.len(), 64);
        assert_ne!(key, cache_key(&op, "let X = set 1"));
        assert!(cache.get(&key).is_none());
        let rec = RunRecord {
            command: op.name(),
            config_hash: key.clone(),
            outcome: Outcome { verdict: Status::Pass, detail: "ok".into(), witnesses: vec![] },
            wall_time_ms: 5,
        };
        cache.put(&rec).unwrap();
        assert_eq!(cache.get(&key), Some(rec));
    }

    #[test]
    fn resampling_rate_is_roughly_the_fraction() {
        let seed = RandomState::new();
        let hits = (0..10_000).filter(|i| resample(&format!("k{i}"), 0.1, &seed)).count();
        assert!((700..1300).contains(&hits), "{hits}");
        assert!(!resample("x", 0.0, &seed));
        assert!(resample("x", 1.0, &seed));
    }
}
