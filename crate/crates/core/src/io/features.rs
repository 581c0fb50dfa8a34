//! Binary feature files.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic   4 bytes  "TDFF"
//! version u16      1
//! dim     u32      > 0
//! count   u64
//! count × { id_len u32, id UTF-8 bytes, dim × f32 }
//! ```
//!
//! Vectors are stored as `f32`; writing narrows each `f64` coordinate.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::binary::{put_string, Cursor};
use crate::model::{Embedding, FeatureMap};

pub const FEATURE_MAGIC: [u8; 4] = *b"TDFF";
pub const FEATURE_VERSION: u16 = 1;

/// Serializes `features` (all of dimension `dim`) in ascending id order.
pub fn encode_features(features: &FeatureMap, dim: usize) -> Result<Vec<u8>> {
    if dim == 0 || dim > u32::MAX as usize {
        return Err(Error::InvalidInput(format!(
            "invalid feature dimension {dim}"
        )));
    }
    let mut out = Vec::with_capacity(18 + features.len() * (dim * 4 + 16));
    out.extend_from_slice(&FEATURE_MAGIC);
    out.extend_from_slice(&FEATURE_VERSION.to_le_bytes());
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.extend_from_slice(&(features.len() as u64).to_le_bytes());
    for (id, v) in features {
        if v.dim() != dim {
            return Err(Error::dim(format!("feature {id}"), dim, v.dim()));
        }
        put_string(&mut out, id);
        for &x in v.values() {
            out.extend_from_slice(&(x as f32).to_le_bytes());
        }
    }
    Ok(out)
}

/// Parses a feature file image, returning its dimension and vectors.
pub fn decode_features(buf: &[u8]) -> Result<(usize, FeatureMap)> {
    let mut cur = Cursor::new(buf);
    cur.magic(FEATURE_MAGIC)?;
    let version = cur.u16()?;
    if version != FEATURE_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dim = cur.u32()? as usize;
    if dim == 0 {
        return Err(Error::InvalidInput("feature dimension is 0".into()));
    }
    let count = cur.u64()?;
    let mut features = BTreeMap::new();
    for _ in 0..count {
        let id = cur.string()?;
        let mut values = Vec::with_capacity(dim);
        for _ in 0..dim {
            values.push(cur.f32()? as f64);
        }
        if features
            .insert(id.clone(), Embedding::raw(values))
            .is_some()
        {
            return Err(Error::DuplicateMediaId(id));
        }
    }
    if cur.remaining() > 0 {
        return Err(Error::InvalidInput(format!(
            "{} trailing bytes after record {count} at byte offset {}",
            cur.remaining(),
            cur.offset()
        )));
    }
    Ok((dim, features))
}

pub fn write_feature_file(path: &Path, features: &FeatureMap, dim: usize) -> Result<()> {
    let bytes = encode_features(features, dim)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_feature_file(path: &Path) -> Result<(usize, FeatureMap)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_features(&bytes)
}

/// Rounds every coordinate to the nearest `f32`, the precision a feature
/// file stores.
pub fn quantize(v: &Embedding) -> Embedding {
    Embedding::raw(v.values().iter().map(|&x| x as f32 as f64).collect())
}
