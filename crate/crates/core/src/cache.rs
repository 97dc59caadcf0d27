//! Radial-integral cache: an in-memory index backed by an optional
//! append-only binary file.
//!
//! Record layout (36 bytes, little-endian):
//! `[n, l, n', l', kind]: 5 x i32`, `power: i32`, `value: f64`,
//! `crc32: u32` over the preceding 32 bytes. A truncated or corrupt tail
//! is ignored on load. The file lives in the directory named by
//! `RYDQED_CACHE_DIR`; without it the cache is memory-only.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use parking_lot::{Mutex, RwLock};

use crate::radial::{RadialIntegralKey, RadialKind};
use crate::Result;

pub const CACHE_DIR_ENV: &str = "RYDQED_CACHE_DIR";
pub const CACHE_FILE: &str = "rydqed-radial.bin";
const RECORD: usize = 36;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct CacheStats {
    pub hits: u64,
    pub misses: u64,
    pub entries: usize,
}

pub struct RadialCache {
    map: RwLock<HashMap<RadialIntegralKey, f64>>,
    file: Option<Mutex<File>>,
    path: Option<PathBuf>,
    hits: AtomicU64,
    misses: AtomicU64,
}

pub fn encode(key: &RadialIntegralKey, value: f64) -> [u8; RECORD] {
    let mut buf = [0u8; RECORD];
    let ints = [key.n as i32, key.l as i32, key.n_prime as i32, key.l_prime as i32, key.kind.code(), key.power];
    for (i, v) in ints.iter().enumerate() {
        buf[4 * i..4 * i + 4].copy_from_slice(&v.to_le_bytes());
    }
    buf[24..32].copy_from_slice(&value.to_le_bytes());
    let crc = crc32fast::hash(&buf[..32]);
    buf[32..36].copy_from_slice(&crc.to_le_bytes());
    buf
}

pub fn decode(buf: &[u8]) -> Option<(RadialIntegralKey, f64)> {
    if buf.len() < RECORD {
        return None;
    }
    let crc = u32::from_le_bytes(buf[32..36].try_into().ok()?);
    if crc != crc32fast::hash(&buf[..32]) {
        return None;
    }
    let int = |i: usize| i32::from_le_bytes(buf[4 * i..4 * i + 4].try_into().unwrap());
    let kind = RadialKind::from_code(int(4))?;
    let key = RadialIntegralKey {
        n: u32::try_from(int(0)).ok()?,
        l: u32::try_from(int(1)).ok()?,
        n_prime: u32::try_from(int(2)).ok()?,
        l_prime: u32::try_from(int(3)).ok()?,
        power: int(5),
        kind,
    };
    let value = f64::from_le_bytes(buf[24..32].try_into().unwrap());
    Some((key, value))
}

impl RadialCache {
    pub fn in_memory() -> Self {
        Self {
            map: RwLock::new(HashMap::new()),
            file: None,
            path: None,
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        }
    }

    /// Open (or create) the cache file in `dir` and load valid records.
    pub fn open(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(CACHE_FILE);
        let mut map = HashMap::new();
        if let Ok(mut f) = File::open(&path) {
            let mut bytes = Vec::new();
            f.read_to_end(&mut bytes)?;
            for chunk in bytes.chunks(RECORD) {
                match decode(chunk) {
                    Some((k, v)) => {
                        map.insert(k, v);
                    }
                    None => break,
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            map: RwLock::new(map),
            file: Some(Mutex::new(file)),
            path: Some(path),
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, key: &RadialIntegralKey) -> Option<f64> {
        self.map.read().get(key).copied()
    }

    pub fn get_or_compute<F>(&self, key: RadialIntegralKey, compute: F) -> Result<f64>
    where
        F: FnOnce(&RadialIntegralKey) -> Result<f64>,
    {
        if let Some(v) = self.get(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(v);
        }
        self.misses.fetch_add(1, Ordering::Relaxed);
        let value = compute(&key)?;
        let fresh = {
            let mut map = self.map.write();
            match map.get(&key) {
                Some(_) => false,
                None => {
                    map.insert(key, value);
                    true
                }
            }
        };
        if fresh {
            if let Some(f) = &self.file {
                // One write_all per record keeps entries atomic under the lock.
                f.lock().write_all(&encode(&key, value))?;
            }
        }
        Ok(value)
    }

    pub fn stats(&self) -> CacheStats {
        CacheStats {
            hits: self.hits.load(Ordering::Relaxed),
            misses: self.misses.load(Ordering::Relaxed),
            entries: self.map.read().len(),
        }
    }

    pub fn clear_memory(&self) {
        self.map.write().clear();
    }
}

/// Process-wide cache, opened from `RYDQED_CACHE_DIR` on first use.
pub fn global() -> &'static RadialCache {
    static CACHE: OnceLock<RadialCache> = OnceLock::new();
    CACHE.get_or_init(|| match std::env::var_os(CACHE_DIR_ENV) {
        Some(dir) => RadialCache::open(Path::new(&dir)).unwrap_or_else(|e| {
            eprintln!("warning: radial cache at {dir:?} unavailable ({e}); using memory only");
            RadialCache::in_memory()
        }),
        None => RadialCache::in_memory(),
    })
}
