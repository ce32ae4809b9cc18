//! On-disk store of `P^k_{a,b}(N)` polynomials.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use kp_core::asymptotics::{p_poly_memo_entries, p_poly_product_fresh, seed_p_poly_memo, PPolyKey};
use kp_core::PolyN;
use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub const CACHE_SCHEMA: &str = "kp-ppoly-cache/v1";
const FILE_NAME: &str = "ppoly-v1.json";
const VERIFIED_KEYS: usize = 3;

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    a: i64,
    b: i64,
    k: u64,
    poly: PolyN,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    schema: String,
    entries: Vec<CacheEntry>,
}

/// Directory from `KP_CACHE_DIR`, else the user cache directory.
pub fn default_dir() -> Option<PathBuf> {
    if let Some(dir) = std::env::var_os("KP_CACHE_DIR") {
        return Some(PathBuf::from(dir));
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME") {
        return Some(PathBuf::from(dir).join("kp"));
    }
    std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("kp"))
}

pub struct PolyCache {
    path: PathBuf,
    loaded: BTreeSet<PPolyKey>,
}

impl PolyCache {
    /// Loads the cache in `dir` into the memo. Missing files are silent; unreadable,
    /// malformed or unverifiable ones are ignored with a warning.
    pub fn open(dir: &Path) -> PolyCache {
        let path = dir.join(FILE_NAME);
        let loaded = match std::fs::read_to_string(&path) {
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeSet::new(),
            Err(e) => {
                warn!("ignoring cache {}: {e}", path.display());
                BTreeSet::new()
            }
            Ok(text) => match parse_and_verify(&text) {
                Ok(entries) => {
                    let keys = entries.iter().map(|(k, _)| *k).collect();
                    seed_p_poly_memo(entries);
                    keys
                }
                Err(why) => {
                    warn!("ignoring cache {}: {why}", path.display());
                    BTreeSet::new()
                }
            },
        };
        PolyCache { path, loaded }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes the memo back if it gained entries.
    pub fn save(&self) -> std::io::Result<()> {
        let entries = p_poly_memo_entries();
        if entries.iter().all(|(k, _)| self.loaded.contains(k)) {
            return Ok(());
        }
        let doc = CacheFile {
            schema: CACHE_SCHEMA.to_string(),
            entries: entries
                .into_iter()
                .map(|(key, poly)| CacheEntry { a: key.a, b: key.b, k: key.k, poly })
                .collect(),
        };
        write_atomic(&self.path, crate::output::json_line(&doc).as_bytes())
    }
}

fn parse_and_verify(text: &str) -> Result<Vec<(PPolyKey, PolyN)>, String> {
    let doc: CacheFile = serde_json::from_str(text).map_err(|e| format!("malformed: {e}"))?;
    if doc.schema != CACHE_SCHEMA {
        return Err(format!("unknown schema {:?}", doc.schema));
    }
    let mut entries = Vec::with_capacity(doc.entries.len());
    for e in doc.entries {
        if !(-1..=1).contains(&e.a) || !(-1..=1).contains(&e.b) {
            return Err(format!("invalid key ({}, {}, {})", e.a, e.b, e.k));
        }
        entries.push((PPolyKey::new(e.a, e.b, e.k), e.poly));
    }
    let sample: Vec<_> = entries.choose_multiple(&mut rand::thread_rng(), VERIFIED_KEYS).collect();
    for (key, poly) in sample {
        if p_poly_product_fresh(*key) != *poly {
            return Err(format!("verification failed at (a, b, k) = ({}, {}, {})", key.a, key.b, key.k));
        }
    }
    Ok(entries)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
    }
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(entries: &[(i64, i64, u64, PolyN)]) -> String {
        let doc = CacheFile {
            schema: CACHE_SCHEMA.into(),
            entries: entries.iter().map(|(a, b, k, p)| CacheEntry { a: *a, b: *b, k: *k, poly: p.clone() }).collect(),
        };
        serde_json::to_string(&doc).unwrap()
    }

    #[test]
    fn verified_entries_are_accepted() {
        let keys = [(0, 0, 1), (1, -1, 2), (-1, 0, 3)];
        let entries: Vec<_> =
            keys.iter().map(|&(a, b, k)| (a, b, k, p_poly_product_fresh(PPolyKey::new(a, b, k)))).collect();
        assert_eq!(parse_and_verify(&doc(&entries)).unwrap().len(), 3);
    }

    #[test]
    fn tampered_entry_is_rejected() {
        let mut p = p_poly_product_fresh(PPolyKey::new(0, 0, 2));
        p = &p + &PolyN::one();
        assert!(parse_and_verify(&doc(&[(0, 0, 2, p)])).unwrap_err().contains("verification"));
    }

    #[test]
    fn malformed_documents_are_rejected() {
        assert!(parse_and_verify("{").is_err());
        assert!(parse_and_verify(r#"{"schema":"other","entries":[]}"#).is_err());
        assert!(parse_and_verify(&doc(&[(2, 0, 0, PolyN::one())])).is_err());
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("f.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
