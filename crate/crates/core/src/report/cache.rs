//! Content-addressed store of computed rows. Keys are sha256 digests of
//! the tool version, the scene description and the method parameters;
//! entries from another tool version are stale. Writers and the garbage
//! collector hold an exclusive advisory lock, readers a shared one.

use crate::cycles::{IntegralResult, LevelTrace};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const CACHE_ENV: &str = "VRES_CACHE_DIR";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache directory {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CacheError + '_ {
    move |source| CacheError::Io { path: path.display().to_string(), source }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Entry {
    tool_version: String,
    key: String,
    value: [f64; 2],
    error: f64,
    count: usize,
    converged: bool,
    trace: Vec<(usize, [f64; 2], f64, usize)>,
}

impl Entry {
    fn from_result(key: &str, r: &IntegralResult, version: &str) -> Self {
        Entry {
            tool_version: version.into(),
            key: key.into(),
            value: [r.value.re, r.value.im],
            error: r.error,
            count: r.count,
            converged: r.converged,
            trace: r.trace.iter().map(|t| (t.level, [t.value.re, t.value.im], t.error, t.nodes)).collect(),
        }
    }

    fn result(&self) -> IntegralResult {
        IntegralResult {
            value: Complex64::new(self.value[0], self.value[1]),
            error: self.error,
            count: self.count,
            converged: self.converged,
            trace: self.trace.iter().map(|&(level, v, error, nodes)| LevelTrace { level, value: Complex64::new(v[0], v[1]), error, nodes }).collect(),
        }
    }
}

/// Outcome of a lookup.
#[derive(Debug, Clone, PartialEq)]
pub enum Lookup {
    Hit(IntegralResult),
    Miss,
    /// Unreadable entry, ignored.
    Corrupt(String),
    /// Entry written by another tool version.
    Stale(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GcReport {
    pub kept: usize,
    pub removed_stale: usize,
    pub removed_corrupt: usize,
}

#[derive(Debug, Clone)]
pub struct Cache {
    dir: PathBuf,
    version: String,
}

/// sha256 of the given parts, separated so that concatenations cannot
/// collide.
pub fn digest(parts: &[&str]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl Cache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Cache, CacheError> {
        Cache::with_version(dir, TOOL_VERSION)
    }

    /// The cache at `$VRES_CACHE_DIR`, if set.
    pub fn from_env() -> Result<Option<Cache>, CacheError> {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Cache::open(PathBuf::from(d)).map(Some),
            _ => Ok(None),
        }
    }

    /// A cache that treats entries of any other `version` as stale.
    pub fn with_version(dir: impl Into<PathBuf>, version: &str) -> Result<Cache, CacheError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        Ok(Cache { dir, version: version.into() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Key for a row: version, scene digest, method and parameters.
    pub fn key(&self, scene: &str, method: &str, params: &str) -> String {
        digest(&[&self.version, scene, method, params])
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    fn lock(&self, exclusive: bool) -> Result<File, CacheError> {
        let p = self.dir.join(".lock");
        let f = OpenOptions::new().create(true).truncate(false).write(true).open(&p).map_err(io(&p))?;
        if exclusive { f.lock() } else { f.lock_shared() }.map_err(io(&p))?;
        Ok(f)
    }

    pub fn lookup(&self, key: &str) -> Result<Lookup, CacheError> {
        let _guard = self.lock(false)?;
        let p = self.path(key);
        let text = match fs::read_to_string(&p) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Lookup::Miss),
            Err(e) => return Ok(Lookup::Corrupt(format!("{}: {e}", p.display()))),
        };
        Ok(match serde_json::from_str::<Entry>(&text) {
            Ok(e) if e.key != key => Lookup::Corrupt(format!("{}: key mismatch", p.display())),
            Ok(e) if e.tool_version != self.version => Lookup::Stale(e.tool_version),
            Ok(e) => Lookup::Hit(e.result()),
            Err(e) => Lookup::Corrupt(format!("{}: {e}", p.display())),
        })
    }

    pub fn store(&self, key: &str, r: &IntegralResult) -> Result<(), CacheError> {
        let _guard = self.lock(true)?;
        let p = self.path(key);
        let parent = p.parent().expect("entry path has a parent");
        fs::create_dir_all(parent).map_err(io(parent))?;
        let tmp = p.with_extension("tmp");
        let body = serde_json::to_string(&Entry::from_result(key, r, &self.version)).expect("entries serialize");
        let mut f = File::create(&tmp).map_err(io(&tmp))?;
        f.write_all(body.as_bytes()).map_err(io(&tmp))?;
        fs::rename(&tmp, &p).map_err(io(&p))
    }

    /// Removes stale, corrupt and half-written entries.
    pub fn gc(&self) -> Result<GcReport, CacheError> {
        let _guard = self.lock(true)?;
        let mut report = GcReport::default();
        for shard in fs::read_dir(&self.dir).map_err(io(&self.dir))? {
            let shard = shard.map_err(io(&self.dir))?.path();
            if !shard.is_dir() {
                continue;
            }
            for entry in fs::read_dir(&shard).map_err(io(&shard))? {
                let p = entry.map_err(io(&shard))?.path();
                let keep = p.extension().is_some_and(|e| e == "json")
                    && match fs::read_to_string(&p).ok().and_then(|t| serde_json::from_str::<Entry>(&t).ok()) {
                        Some(e) if e.tool_version == self.version => true,
                        Some(_) => {
                            report.removed_stale += 1;
                            false
                        }
                        None => {
                            report.removed_corrupt += 1;
                            false
                        }
                    };
                if keep {
                    report.kept += 1;
                } else {
                    if !p.extension().is_some_and(|e| e == "json") {
                        report.removed_corrupt += 1;
                    }
                    fs::remove_file(&p).map_err(io(&p))?;
                }
            }
        }
        Ok(report)
    }
}
