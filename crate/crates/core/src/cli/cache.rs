//! On-disk store of finished runs, keyed by subcommand and parameters.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const CACHE_ENV: &str = "WORKBENCH_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".workbench-cache";

/// Bumped whenever a cached result's meaning changes.
const CACHE_SCHEMA: u32 = 1;

pub type Params = BTreeMap<String, Value>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub subcommand: String,
    pub params: Params,
    pub result: Value,
    pub wall_secs: f64,
    pub nodes: u64,
    pub version: String,
}

impl RunRecord {
    pub fn new(subcommand: &str, params: Params, result: Value, wall_secs: f64, nodes: u64) -> Self {
        RunRecord { subcommand: subcommand.to_string(), params, result, wall_secs, nodes, version: version_hash() }
    }

    pub fn key(&self) -> String {
        cache_key(&self.subcommand, &self.params)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Identifies the toolkit build whose results a cache entry holds.
pub fn version_hash() -> String {
    let digest = Sha256::digest(format!("{}:{}", env!("CARGO_PKG_VERSION"), CACHE_SCHEMA));
    hex(&digest[..8])
}

/// SHA-256 of the subcommand and its sorted parameter map.
pub fn cache_key(subcommand: &str, params: &Params) -> String {
    let body = serde_json::to_string(&(subcommand, params)).expect("params serialise");
    hex(&Sha256::digest(body))
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new<P: Into<PathBuf>>(dir: P) -> Self {
        Cache { dir: dir.into() }
    }

    /// Directory from `WORKBENCH_CACHE_DIR`, else `.workbench-cache/`.
    pub fn from_env() -> Self {
        Cache::new(std::env::var_os(CACHE_ENV).map_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR), PathBuf::from))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A stored record for this key, ignoring unreadable entries and entries
    /// written by another toolkit version.
    pub fn lookup(&self, subcommand: &str, params: &Params) -> Option<RunRecord> {
        let path = self.path(&cache_key(subcommand, params));
        let text = fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<RunRecord>(&text) {
            Ok(rec) if rec.version == version_hash() && rec.subcommand == subcommand && &rec.params == params => Some(rec),
            Ok(_) => None,
            Err(e) => {
                log::warn!("ignoring corrupt cache entry {}: {e}", path.display());
                None
            }
        }
    }

    pub fn store(&self, record: &RunRecord) -> Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path(&record.key());
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(record)?)?;
        fs::rename(tmp, path)?;
        Ok(())
    }
}
