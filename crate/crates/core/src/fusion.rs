//! First-stage fusion: unit normalization, stream concatenation, video
//! pooling and template assembly.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Embedding, EncodingSource, FeatureMap, MediaEncoding, MediaKind, MediaRecord, Template,
};

/// Norms at or below this are treated as zero.
pub const NORM_EPSILON: f64 = 1e-12;

/// Below this many terms, pairwise summation falls back to a plain loop.
const PAIRWISE_BLOCK: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamDim {
    pub name: String,
    pub dim: usize,
}

/// Ordered list of extractor streams and the dimension of their concatenation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureStreamSpec {
    streams: Vec<StreamDim>,
}

impl FeatureStreamSpec {
    pub fn new(streams: Vec<(String, usize)>) -> Result<Self> {
        if streams.is_empty() {
            return Err(Error::InvalidInput(
                "at least one feature stream is required".into(),
            ));
        }
        if let Some((name, _)) = streams.iter().find(|(_, d)| *d == 0) {
            return Err(Error::InvalidInput(format!(
                "stream {name} has dimension 0"
            )));
        }
        Ok(FeatureStreamSpec {
            streams: streams
                .into_iter()
                .map(|(name, dim)| StreamDim { name, dim })
                .collect(),
        })
    }

    pub fn streams(&self) -> &[StreamDim] {
        &self.streams
    }

    pub fn fused_dim(&self) -> usize {
        self.streams.iter().map(|s| s.dim).sum()
    }

    /// Coordinate range occupied by stream `index` in the fused vector.
    pub fn range(&self, index: usize) -> std::ops::Range<usize> {
        let start: usize = self.streams[..index].iter().map(|s| s.dim).sum();
        start..start + self.streams[index].dim
    }
}

/// Scales `v` to unit Euclidean norm.
pub fn l2_normalize(v: &Embedding) -> Result<Embedding> {
    if let Some(index) = v.values().iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let norm = v.norm();
    if norm <= NORM_EPSILON {
        return Err(Error::ZeroVector { norm });
    }
    Ok(Embedding::raw(
        v.values().iter().map(|x| x / norm).collect(),
    ))
}

/// Concatenates per-stream vectors in spec order. The result is not normalized.
pub fn concat_streams(parts: &[&Embedding], spec: &FeatureStreamSpec) -> Result<Embedding> {
    if parts.len() != spec.streams.len() {
        return Err(Error::dim("stream count", spec.streams.len(), parts.len()));
    }
    let mut out = Vec::with_capacity(spec.fused_dim());
    for (part, stream) in parts.iter().zip(&spec.streams) {
        if part.dim() != stream.dim {
            return Err(Error::dim(
                format!("stream {}", stream.name),
                stream.dim,
                part.dim(),
            ));
        }
        out.extend_from_slice(part.values());
    }
    Ok(Embedding::raw(out))
}

/// Normalizes each stream, concatenates, then normalizes the concatenation.
pub fn fuse_media(parts: &[&Embedding], spec: &FeatureStreamSpec) -> Result<Embedding> {
    let normalized = parts
        .iter()
        .map(|p| l2_normalize(p))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Embedding> = normalized.iter().collect();
    l2_normalize(&concat_streams(&refs, spec)?)
}

fn pairwise_sum(frames: &[&Embedding], out: &mut [f64]) {
    if frames.len() <= PAIRWISE_BLOCK {
        out.iter_mut().for_each(|o| *o = 0.0);
        for f in frames {
            for (o, x) in out.iter_mut().zip(f.values()) {
                *o += x;
            }
        }
        return;
    }
    let (left, right) = frames.split_at(frames.len() / 2);
    let mut right_sum = vec![0.0; out.len()];
    pairwise_sum(left, out);
    pairwise_sum(right, &mut right_sum);
    for (o, r) in out.iter_mut().zip(right_sum) {
        *o += r;
    }
}

/// Elementwise mean of the frames, before normalization.
pub fn mean_frames(frames: &[&Embedding]) -> Result<Embedding> {
    let first = frames.first().ok_or(Error::EmptyVideo)?;
    let dim = first.dim();
    for f in frames {
        if f.dim() != dim {
            return Err(Error::dim("video frame", dim, f.dim()));
        }
        if let Some(index) = f.values().iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
    }
    let mut sum = vec![0.0; dim];
    pairwise_sum(frames, &mut sum);
    let n = frames.len() as f64;
    Ok(Embedding::raw(sum.into_iter().map(|s| s / n).collect()))
}

/// Averages the frames of one video and unit-normalizes the mean.
pub fn pool_video(frames: &[&Embedding]) -> Result<Embedding> {
    l2_normalize(&mean_frames(frames)?)
}

/// Assembles one template from its metadata records: one encoding per image
/// and one pooled encoding per distinct video, in order of first appearance.
pub fn build_template(records: &[&MediaRecord], fused: &FeatureMap) -> Result<Template> {
    let first = match records.first() {
        Some(r) => r,
        None => {
            return Err(Error::EmptyTemplate {
                template_id: String::new(),
            })
        }
    };
    for r in records {
        if r.template_id != first.template_id {
            return Err(Error::MixedTemplate {
                field: "template_id",
                first: first.template_id.clone(),
                other: r.template_id.clone(),
            });
        }
        if r.subject_id != first.subject_id {
            return Err(Error::MixedTemplate {
                field: "subject_id",
                first: first.subject_id.clone(),
                other: r.subject_id.clone(),
            });
        }
    }

    enum Slot<'a> {
        Image(&'a str),
        Video(&'a str, Vec<&'a Embedding>),
    }

    let lookup = |id: &str| {
        fused.get(id).ok_or_else(|| Error::MissingFeature {
            media_id: id.to_owned(),
        })
    };

    let mut slots: Vec<Slot> = Vec::new();
    let mut video_slot: HashMap<&str, usize> = HashMap::new();
    for r in records {
        match (r.kind, r.video_id.as_deref()) {
            (MediaKind::Image, _) => {
                lookup(&r.media_id)?;
                slots.push(Slot::Image(&r.media_id));
            }
            (MediaKind::VideoFrame, Some(video_id)) => {
                let frame = lookup(&r.media_id)?;
                let idx = *video_slot.entry(video_id).or_insert_with(|| {
                    slots.push(Slot::Video(video_id, Vec::new()));
                    slots.len() - 1
                });
                if let Slot::Video(_, frames) = &mut slots[idx] {
                    frames.push(frame);
                }
            }
            (MediaKind::VideoFrame, None) => {
                return Err(Error::InvalidInput(format!(
                    "frame {} has no video_id",
                    r.media_id
                )))
            }
        }
    }

    let encodings = slots
        .into_iter()
        .map(|slot| match slot {
            Slot::Image(id) => MediaEncoding::new(
                EncodingSource::SingleImage {
                    media_id: id.to_owned(),
                },
                l2_normalize(lookup(id)?)?,
            ),
            Slot::Video(video_id, frames) => MediaEncoding::new(
                EncodingSource::PooledVideo {
                    video_id: video_id.to_owned(),
                    frame_count: frames.len(),
                },
                pool_video(&frames)?,
            ),
        })
        .collect::<Result<Vec<_>>>()?;

    Template::new(
        first.template_id.clone(),
        first.subject_id.clone(),
        encodings,
    )
}
