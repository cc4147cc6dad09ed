//! Content-addressed on-disk cache for linearization rows.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use polyhyp::hypergroup::Linearization;
use polyhyp::scalar::Scalar;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

const FORMAT: &str = "polyhyp-linearization";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Entry {
    format: String,
    version: u32,
    library: String,
    key: String,
    lo: usize,
    values: Vec<String>,
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn open(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Cache { dir: dir.to_path_buf() })
    }

    /// Key over the library version, family, parameters, scalar mode,
    /// precision and the requested product.
    pub fn key(parts: &[String]) -> String {
        let mut h = Sha256::new();
        h.update(format!("{FORMAT}/{FORMAT_VERSION}/{}", env!("CARGO_PKG_VERSION")));
        for p in parts {
            h.update([0u8]);
            h.update(p.as_bytes());
        }
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// Stale, foreign or unreadable files count as misses.
    pub fn get(&self, key: &str) -> Option<Linearization> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let e: Entry = serde_json::from_str(&text).ok()?;
        if e.format != FORMAT || e.version != FORMAT_VERSION || e.library != env!("CARGO_PKG_VERSION") || e.key != key {
            return None;
        }
        let values = e.values.iter().map(|v| Scalar::decode(v)).collect::<Result<Vec<_>, _>>().ok()?;
        Some(Linearization { lo: e.lo, values })
    }

    /// Write-to-temp then rename, so readers never see a partial file.
    pub fn put(&self, key: &str, g: &Linearization) -> std::io::Result<()> {
        let e = Entry {
            format: FORMAT.into(),
            version: FORMAT_VERSION,
            library: env!("CARGO_PKG_VERSION").into(),
            key: key.into(),
            lo: g.lo,
            values: g.values.iter().map(Scalar::encode).collect(),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(serde_json::to_string(&e).expect("cache entry serializes").as_bytes())?;
        tmp.persist(self.path(key)).map_err(|e| e.error)?;
        Ok(())
    }
}
