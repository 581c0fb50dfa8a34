//! Binary SVM model records and bundles.
//!
//! One record, integers and floats little-endian:
//!
//! ```text
//! magic   4 bytes  "TDSM"
//! version u16      1
//! dim     u32
//! weights dim × f64
//! bias    f64
//! owner   u32 length + UTF-8 template id
//! ```
//!
//! A bundle file is `"TDSB"`, version `u16`, count `u64`, then `count`
//! records back to back.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::binary::{put_string, Cursor};
use crate::model::Embedding;
use crate::svm::SvmModel;

pub const MODEL_MAGIC: [u8; 4] = *b"TDSM";
pub const BUNDLE_MAGIC: [u8; 4] = *b"TDSB";
pub const MODEL_VERSION: u16 = 1;

pub fn encode_model(model: &SvmModel, out: &mut Vec<u8>) {
    out.extend_from_slice(&MODEL_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.extend_from_slice(&(model.dim() as u32).to_le_bytes());
    for w in model.weights().values() {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out.extend_from_slice(&model.bias().to_le_bytes());
    put_string(out, model.owner_template());
}

fn decode_model(cur: &mut Cursor<'_>) -> Result<SvmModel> {
    cur.magic(MODEL_MAGIC)?;
    let version = cur.u16()?;
    if version != MODEL_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dim = cur.u32()? as usize;
    let mut weights = Vec::with_capacity(dim);
    for _ in 0..dim {
        weights.push(cur.f64()?);
    }
    let bias = cur.f64()?;
    let owner = cur.string()?;
    SvmModel::new(Embedding::raw(weights), bias, owner)
}

pub fn decode_single_model(buf: &[u8]) -> Result<SvmModel> {
    let mut cur = Cursor::new(buf);
    let model = decode_model(&mut cur)?;
    if cur.remaining() > 0 {
        return Err(Error::InvalidInput(format!(
            "trailing bytes at byte offset {}",
            cur.offset()
        )));
    }
    Ok(model)
}

pub fn encode_bundle(models: &[SvmModel]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&BUNDLE_MAGIC);
    out.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    out.extend_from_slice(&(models.len() as u64).to_le_bytes());
    for m in models {
        encode_model(m, &mut out);
    }
    out
}

pub fn decode_bundle(buf: &[u8]) -> Result<Vec<SvmModel>> {
    let mut cur = Cursor::new(buf);
    cur.magic(BUNDLE_MAGIC)?;
    let version = cur.u16()?;
    if version != MODEL_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let count = cur.u64()?;
    let mut models = Vec::new();
    for _ in 0..count {
        models.push(decode_model(&mut cur)?);
    }
    if cur.remaining() > 0 {
        return Err(Error::InvalidInput(format!(
            "trailing bytes at byte offset {}",
            cur.offset()
        )));
    }
    Ok(models)
}

pub fn write_models(path: &Path, models: &[SvmModel]) -> Result<()> {
    std::fs::write(path, encode_bundle(models)).map_err(|e| Error::io(path, e))
}

pub fn read_models(path: &Path) -> Result<Vec<SvmModel>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_bundle(&bytes)
}
