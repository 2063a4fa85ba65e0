//! On-disk embedding cache.
//!
//! One JSON file per entry under the cache directory, named by the hex
//! SHA-256 of `(provider_id, model_id, text)` so a backend or model change
//! invalidates naturally. Writes go through a temp file and rename, which
//! keeps concurrent readers safe while writers are serialized per key.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::EmbeddingVector;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache io error: {0}")]
    Io(#[from] io::Error),
    #[error("corrupt cache entry {path}: {reason}")]
    Corrupt { path: String, reason: String },
}

#[derive(Serialize, Deserialize)]
struct Entry {
    dim: usize,
    values: Vec<f64>,
}

pub struct EmbeddingCache {
    dir: PathBuf,
}

impl EmbeddingCache {
    /// Opens (creating if needed) a cache rooted at `dir`.
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, CacheError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn key(provider_id: &str, model_id: &str, text: &str) -> String {
        let mut hasher = Sha256::new();
        hasher.update(provider_id.as_bytes());
        hasher.update([0]);
        hasher.update(model_id.as_bytes());
        hasher.update([0]);
        hasher.update(text.as_bytes());
        format!("{:x}", hasher.finalize())
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(
        &self,
        provider_id: &str,
        model_id: &str,
        text: &str,
    ) -> Result<Option<EmbeddingVector>, CacheError> {
        let path = self.path_for(&Self::key(provider_id, model_id, text));
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let entry: Entry = serde_json::from_slice(&bytes).map_err(|e| CacheError::Corrupt {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        if entry.values.len() != entry.dim {
            return Err(CacheError::Corrupt {
                path: path.display().to_string(),
                reason: format!("dim {} but {} values", entry.dim, entry.values.len()),
            });
        }
        let v = EmbeddingVector::new(entry.values).map_err(|e| CacheError::Corrupt {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Ok(Some(v))
    }

    pub fn put(
        &self,
        provider_id: &str,
        model_id: &str,
        text: &str,
        vector: &EmbeddingVector,
    ) -> Result<(), CacheError> {
        let key = Self::key(provider_id, model_id, text);
        let path = self.path_for(&key);
        let tmp = self.dir.join(format!("{key}.tmp"));
        let entry = Entry {
            dim: vector.dim(),
            values: vector.values().to_vec(),
        };
        fs::write(&tmp, serde_json::to_vec(&entry).expect("serializable"))?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{embed, MockEmbeddingProvider};

    #[test]
    fn round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EmbeddingCache::open(dir.path()).unwrap();
        let v = EmbeddingVector::new(vec![0.1, -0.25, 1e-17, 3.0]).unwrap();
        cache.put("p", "m", "hello", &v).unwrap();
        let back = cache.get("p", "m", "hello").unwrap().unwrap();
        assert_eq!(back, v);
        for (a, b) in back.values().iter().zip(v.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn key_distinguishes_backend_and_model() {
        let k1 = EmbeddingCache::key("p1", "m", "t");
        let k2 = EmbeddingCache::key("p2", "m", "t");
        let k3 = EmbeddingCache::key("p1", "m2", "t");
        assert_ne!(k1, k2);
        assert_ne!(k1, k3);
    }

    #[test]
    fn fully_cached_run_makes_zero_provider_calls() {
        let dir = tempfile::tempdir().unwrap();
        let cache = EmbeddingCache::open(dir.path()).unwrap();
        let provider = MockEmbeddingProvider::new("m", 8);
        let texts = vec![
            ("a".to_string(), "first".to_string()),
            ("b".to_string(), "second".to_string()),
        ];
        let first = embed(&texts, &provider, Some(&cache), 16).unwrap();
        assert_eq!(first.cache_hits, 0);

        struct Panicking;
        impl crate::embedding::EmbeddingProvider for Panicking {
            fn provider_id(&self) -> &str {
                "mock"
            }
            fn model_id(&self) -> &str {
                "m"
            }
            fn embed_batch(
                &self,
                _: &[(String, String)],
            ) -> Result<Vec<(String, EmbeddingVector)>, crate::embedding::provider::EmbedError>
            {
                panic!("network call on a fully cached run");
            }
        }
        let second = embed(&texts, &Panicking, Some(&cache), 16).unwrap();
        assert_eq!(second.cache_hits, 2);
        assert_eq!(second.vectors, first.vectors);
    }
}
