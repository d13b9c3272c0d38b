//! Binary embedding container (`.qemb`).
//!
//! Layout, all little-endian, no padding:
//!
//! ```text
//! 0..4    magic  b"QEMB"
//! 4..8    u32    version (= 1)
//! 8..16   u64    n
//! 16..20  u32    d
//! 20..    n x u64 ids, then n*d x f32 row-major matrix
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use super::{EmbeddingSet, QueryRecord};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"QEMB";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 20;

pub fn encode(set: &EmbeddingSet) -> Vec<u8> {
    let n = set.len();
    let d = set.dim();
    let mut out = Vec::with_capacity(HEADER_LEN + n * 8 + n * d * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(d as u32).to_le_bytes());
    for id in set.ids() {
        out.extend_from_slice(&id.to_le_bytes());
    }
    for v in set.matrix().iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<EmbeddingSet> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing QEMB magic".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedFile {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported qemb version {version}")));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let d = u32::from_le_bytes(bytes[16..20].try_into().unwrap()) as u64;
    if d == 0 {
        return Err(Error::Format("dimension must be positive".into()));
    }
    let payload = (bytes.len() - HEADER_LEN) as u64;
    let expected = n
        .checked_mul(8)
        .and_then(|ids| n.checked_mul(d)?.checked_mul(4)?.checked_add(ids))
        .ok_or_else(|| Error::Format("header sizes overflow".into()))?;
    if payload < expected {
        return Err(Error::TruncatedFile {
            expected,
            found: payload,
        });
    }
    if payload > expected {
        return Err(Error::Format(format!(
            "{} trailing bytes after payload",
            payload - expected
        )));
    }
    let (n, d) = (n as usize, d as usize);
    let mut cursor = HEADER_LEN;
    let mut ids = Vec::with_capacity(n);
    for _ in 0..n {
        ids.push(u64::from_le_bytes(
            bytes[cursor..cursor + 8].try_into().unwrap(),
        ));
        cursor += 8;
    }
    let values: Vec<f32> = bytes[cursor..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let matrix = Array2::from_shape_vec((n, d), values)
        .map_err(|e| Error::Format(format!("bad matrix shape: {e}")))?;
    EmbeddingSet::new(ids, matrix)
}

pub fn write(path: impl AsRef<Path>, set: &EmbeddingSet) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&encode(set))?;
    Ok(())
}

pub fn read(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    decode(&fs::read(path)?)
}

/// Checks an encoder's output against the encoder's dimension and the query
/// file it embedded: one row per query, same ids, same order.
pub fn check_encoded(set: &EmbeddingSet, model_dim: usize, queries: &[QueryRecord]) -> Result<()> {
    if set.dim() != model_dim {
        return Err(Error::DimMismatch {
            expected: model_dim,
            found: set.dim(),
        });
    }
    if set.len() != queries.len() {
        return Err(Error::LengthMismatch {
            left: queries.len(),
            right: set.len(),
        });
    }
    if let Some((q, id)) = queries.iter().zip(set.ids()).find(|(q, id)| q.id != **id) {
        return Err(Error::Format(format!("row for query {} holds id {id}", q.id)));
    }
    Ok(())
}
