//! Precomputed-embedding file format.
//!
//! Binary layout, little-endian throughout:
//!
//! ```text
//! magic   4 bytes  b"EVEC"
//! version 1 byte   0x01
//! dim     u32      shared vector dimension
//! count   u32      number of records
//! then per record:
//!   id_len u32, id bytes (UTF-8), dim x f64 values
//! ```
//!
//! The loader rejects wrong magic, unknown versions and truncated payloads.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::EmbeddingVector;

const MAGIC: &[u8; 4] = b"EVEC";
const VERSION: u8 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic header")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("record id is not valid UTF-8")]
    BadId,
    #[error("vector for id {id} has dimension {got}, file header says {expected}")]
    DimensionMismatch {
        id: String,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value in vector for id {0}")]
    NonFinite(String),
    #[error("empty embedding set")]
    Empty,
}

/// Writes `(id, vector)` pairs in deterministic (sorted-id) order.
pub fn write_embedding_file(
    path: impl AsRef<Path>,
    vectors: &BTreeMap<String, EmbeddingVector>,
) -> Result<(), FileError> {
    let dim = vectors.values().next().ok_or(FileError::Empty)?.dim();
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    w.write_all(&(dim as u32).to_le_bytes())?;
    w.write_all(&(vectors.len() as u32).to_le_bytes())?;
    for (id, v) in vectors {
        if v.dim() != dim {
            return Err(FileError::DimensionMismatch {
                id: id.clone(),
                expected: dim,
                got: v.dim(),
            });
        }
        w.write_all(&(id.len() as u32).to_le_bytes())?;
        w.write_all(id.as_bytes())?;
        for x in v.values() {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_embedding_file(
    path: impl AsRef<Path>,
) -> Result<BTreeMap<String, EmbeddingVector>, FileError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(FileError::BadMagic);
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version)?;
    if version[0] != VERSION {
        return Err(FileError::UnsupportedVersion(version[0]));
    }
    let dim = read_u32(&mut r)? as usize;
    let count = read_u32(&mut r)? as usize;
    let mut out = BTreeMap::new();
    for _ in 0..count {
        let id_len = read_u32(&mut r)? as usize;
        let mut id_bytes = vec![0u8; id_len];
        r.read_exact(&mut id_bytes)?;
        let id = String::from_utf8(id_bytes).map_err(|_| FileError::BadId)?;
        let mut values = Vec::with_capacity(dim);
        let mut buf = [0u8; 8];
        for _ in 0..dim {
            r.read_exact(&mut buf)?;
            values.push(f64::from_le_bytes(buf));
        }
        let v = EmbeddingVector::new(values).map_err(|_| FileError::NonFinite(id.clone()))?;
        out.insert(id, v);
    }
    Ok(out)
}

fn read_u32(r: &mut impl Read) -> Result<u32, io::Error> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn round_trip_preserves_bits() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut vectors = BTreeMap::new();
        for i in 0..20 {
            let v = EmbeddingVector::new((0..12).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .unwrap();
            vectors.insert(format!("speech-{i}"), v);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("refs.evec");
        write_embedding_file(&path, &vectors).unwrap();
        let back = read_embedding_file(&path).unwrap();
        assert_eq!(back.len(), vectors.len());
        for (id, v) in &vectors {
            let b = &back[id];
            for (x, y) in v.values().iter().zip(b.values()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.evec");
        std::fs::write(&path, b"NOPE\x01rest").unwrap();
        assert!(matches!(read_embedding_file(&path), Err(FileError::BadMagic)));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v9.evec");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(MAGIC);
        bytes.push(9);
        bytes.extend_from_slice(&0u32.to_le_bytes());
        bytes.extend_from_slice(&0u32.to_le_bytes());
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(
            read_embedding_file(&path),
            Err(FileError::UnsupportedVersion(9))
        ));
    }

    #[test]
    fn truncated_file_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.evec");
        let mut vectors = BTreeMap::new();
        vectors.insert(
            "a".to_string(),
            EmbeddingVector::new(vec![1.0, 2.0]).unwrap(),
        );
        write_embedding_file(&path, &vectors).unwrap();
        let full = std::fs::read(&path).unwrap();
        std::fs::write(&path, &full[..full.len() - 3]).unwrap();
        assert!(matches!(read_embedding_file(&path), Err(FileError::Io(_))));
    }
}
