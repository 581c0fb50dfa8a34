//! Shared data model: embeddings, media records, templates and protocol splits.
//!
//! Everything here is immutable once built. Constructors enforce the
//! invariants the rest of the crate relies on (finite values, unit-norm
//! encodings, non-empty templates) so downstream code can assume them.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|‖v‖ − 1|` for a vector to count as unit-norm.
pub const UNIT_NORM_TOL: f64 = 1e-5;

/// Media id → raw feature vector.
pub type FeatureMap = BTreeMap<String, Embedding>;

/// A dense feature vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding {
    values: Vec<f64>,
}

impl Embedding {
    /// Builds a checked embedding: non-empty and every coordinate finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyEmbedding);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Embedding { values })
    }

    /// Wraps values without checking them. Used by readers that must be able
    /// to load (and later report) malformed vectors.
    pub fn raw(values: Vec<f64>) -> Self {
        Embedding { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.dot_unchecked(self).sqrt()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_NORM_TOL
    }

    pub fn dot(&self, other: &Embedding) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::dim("dot product", self.dim(), other.dim()));
        }
        Ok(self.dot_unchecked(other))
    }

    pub(crate) fn dot_unchecked(&self, other: &Embedding) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }
}

impl From<Embedding> for Vec<f64> {
    fn from(e: Embedding) -> Self {
        e.values
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MediaKind {
    Image,
    #[serde(rename = "frame")]
    VideoFrame,
}

impl fmt::Display for MediaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MediaKind::Image => f.write_str("image"),
            MediaKind::VideoFrame => f.write_str("frame"),
        }
    }
}

/// One row of dataset metadata: a single image or video frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MediaRecord {
    pub media_id: String,
    pub kind: MediaKind,
    pub video_id: Option<String>,
    pub template_id: String,
    pub subject_id: String,
}

impl MediaRecord {
    pub fn image(media_id: &str, template_id: &str, subject_id: &str) -> Self {
        MediaRecord {
            media_id: media_id.to_owned(),
            kind: MediaKind::Image,
            video_id: None,
            template_id: template_id.to_owned(),
            subject_id: subject_id.to_owned(),
        }
    }

    pub fn frame(media_id: &str, video_id: &str, template_id: &str, subject_id: &str) -> Self {
        MediaRecord {
            media_id: media_id.to_owned(),
            kind: MediaKind::VideoFrame,
            video_id: Some(video_id.to_owned()),
            template_id: template_id.to_owned(),
            subject_id: subject_id.to_owned(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncodingSource {
    SingleImage {
        media_id: String,
    },
    PooledVideo {
        video_id: String,
        frame_count: usize,
    },
}

/// A unit-norm vector standing for one image or one pooled video.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediaEncoding {
    source: EncodingSource,
    vector: Embedding,
}

impl MediaEncoding {
    pub fn new(source: EncodingSource, vector: Embedding) -> Result<Self> {
        if let EncodingSource::PooledVideo { frame_count: 0, .. } = source {
            return Err(Error::EmptyVideo);
        }
        if !vector.is_finite() {
            let index = vector
                .values()
                .iter()
                .position(|v| !v.is_finite())
                .unwrap_or(0);
            return Err(Error::NonFinite { index });
        }
        if !vector.is_unit() {
            return Err(Error::NotUnitNorm {
                norm: vector.norm(),
            });
        }
        Ok(MediaEncoding { source, vector })
    }

    pub fn source(&self) -> &EncodingSource {
        &self.source
    }

    pub fn vector(&self) -> &Embedding {
        &self.vector
    }

    pub fn dim(&self) -> usize {
        self.vector.dim()
    }
}

/// The set of media encodings representing one subject in one enrollment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TemplateRepr", into = "TemplateRepr")]
pub struct Template {
    template_id: String,
    subject_id: String,
    encodings: Vec<MediaEncoding>,
}

#[derive(Serialize, Deserialize)]
struct TemplateRepr {
    template_id: String,
    subject_id: String,
    encodings: Vec<MediaEncoding>,
}

impl TryFrom<TemplateRepr> for Template {
    type Error = Error;

    fn try_from(r: TemplateRepr) -> Result<Self> {
        Template::new(r.template_id, r.subject_id, r.encodings)
    }
}

impl From<Template> for TemplateRepr {
    fn from(t: Template) -> Self {
        TemplateRepr {
            template_id: t.template_id,
            subject_id: t.subject_id,
            encodings: t.encodings,
        }
    }
}

impl Template {
    pub fn new(
        template_id: impl Into<String>,
        subject_id: impl Into<String>,
        encodings: Vec<MediaEncoding>,
    ) -> Result<Self> {
        let template_id = template_id.into();
        if encodings.is_empty() {
            return Err(Error::EmptyTemplate { template_id });
        }
        let dim = encodings[0].dim();
        let mut videos = HashSet::new();
        for e in &encodings {
            if e.dim() != dim {
                return Err(Error::dim(format!("template {template_id}"), dim, e.dim()));
            }
            if let EncodingSource::PooledVideo { video_id, .. } = e.source() {
                if !videos.insert(video_id.as_str()) {
                    return Err(Error::InvalidInput(format!(
                        "video {video_id} pooled twice in template {template_id}"
                    )));
                }
            }
        }
        Ok(Template {
            template_id,
            subject_id: subject_id.into(),
            encodings,
        })
    }

    pub fn template_id(&self) -> &str {
        &self.template_id
    }

    pub fn subject_id(&self) -> &str {
        &self.subject_id
    }

    pub fn encodings(&self) -> &[MediaEncoding] {
        &self.encodings
    }

    /// Number of media encodings (images plus distinct videos).
    pub fn len(&self) -> usize {
        self.encodings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.encodings.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.encodings[0].dim()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitRole {
    Train,
    Gallery,
    Probe,
}

impl fmt::Display for SplitRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SplitRole::Train => "train",
            SplitRole::Gallery => "gallery",
            SplitRole::Probe => "probe",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairLabel {
    Mated,
    Nonmated,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VerificationPair {
    pub template_a: String,
    pub template_b: String,
    pub label: PairLabel,
}

/// Template partitions and comparison list for one evaluation split.
#[derive(Clone, Debug)]
pub struct ProtocolSplit {
    split_id: u32,
    training: Vec<Template>,
    gallery: Vec<Template>,
    probe: Vec<Template>,
    verification_pairs: Vec<VerificationPair>,
}

impl ProtocolSplit {
    pub fn new(
        split_id: u32,
        training: Vec<Template>,
        gallery: Vec<Template>,
        probe: Vec<Template>,
        verification_pairs: Vec<VerificationPair>,
    ) -> Result<Self> {
        let gallery_ids: HashSet<&str> = gallery.iter().map(|t| t.template_id()).collect();
        if let Some(t) = probe.iter().find(|t| gallery_ids.contains(t.template_id())) {
            return Err(Error::InvalidInput(format!(
                "template {} is both gallery and probe in split {split_id}",
                t.template_id()
            )));
        }
        let split = ProtocolSplit {
            split_id,
            training,
            gallery,
            probe,
            verification_pairs,
        };
        for pair in &split.verification_pairs {
            for id in [&pair.template_a, &pair.template_b] {
                if split.template(id).is_none() {
                    return Err(Error::UnknownTemplate(id.clone()));
                }
            }
        }
        Ok(split)
    }

    pub fn split_id(&self) -> u32 {
        self.split_id
    }

    pub fn training(&self) -> &[Template] {
        &self.training
    }

    pub fn gallery(&self) -> &[Template] {
        &self.gallery
    }

    pub fn probe(&self) -> &[Template] {
        &self.probe
    }

    pub fn verification_pairs(&self) -> &[VerificationPair] {
        &self.verification_pairs
    }

    pub fn template(&self, id: &str) -> Option<&Template> {
        self.training
            .iter()
            .chain(&self.gallery)
            .chain(&self.probe)
            .find(|t| t.template_id() == id)
    }

    /// Builds the default 1:1 comparison list: every probe against every
    /// gallery template, mated when the subjects agree.
    pub fn probe_gallery_pairs(gallery: &[Template], probe: &[Template]) -> Vec<VerificationPair> {
        let mut pairs = Vec::with_capacity(gallery.len() * probe.len());
        for p in probe {
            for g in gallery {
                let label = if p.subject_id() == g.subject_id() {
                    PairLabel::Mated
                } else {
                    PairLabel::Nonmated
                };
                pairs.push(VerificationPair {
                    template_a: p.template_id().to_owned(),
                    template_b: g.template_id().to_owned(),
                    label,
                });
            }
        }
        pairs
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum ValidationIssue {
    MissingFeature {
        media_id: String,
    },
    OrphanFeature {
        media_id: String,
    },
    DimMismatch {
        media_id: String,
        expected: usize,
        found: usize,
    },
    NonFinite {
        media_id: String,
    },
    DuplicateMediaId {
        media_id: String,
    },
    FrameWithoutVideo {
        media_id: String,
    },
    ImageWithVideo {
        media_id: String,
    },
    VideoSpansTemplates {
        video_id: String,
    },
    TemplateSubjectConflict {
        template_id: String,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ValidationIssue::*;
        match self {
            MissingFeature { media_id } => write!(f, "media {media_id}: no feature vector"),
            OrphanFeature { media_id } => write!(f, "feature {media_id}: no metadata record"),
            DimMismatch {
                media_id,
                expected,
                found,
            } => write!(f, "feature {media_id}: dim {found}, expected {expected}"),
            NonFinite { media_id } => write!(f, "feature {media_id}: non-finite value"),
            DuplicateMediaId { media_id } => write!(f, "media {media_id}: listed more than once"),
            FrameWithoutVideo { media_id } => write!(f, "frame {media_id}: missing video_id"),
            ImageWithVideo { media_id } => write!(f, "image {media_id}: has a video_id"),
            VideoSpansTemplates { video_id } => {
                write!(f, "video {video_id}: frames belong to several templates")
            }
            TemplateSubjectConflict { template_id } => {
                write!(f, "template {template_id}: records name several subjects")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    /// Sorted, so the report does not depend on input order.
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Cross-checks metadata records against a feature map of declared
/// dimension `dim`. Problems are collected, never raised.
pub fn validate_dataset(
    records: &[MediaRecord],
    features: &FeatureMap,
    dim: usize,
) -> ValidationReport {
    let mut issues = Vec::new();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut video_templates: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut template_subjects: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();

    for r in records {
        let count = seen.entry(r.media_id.as_str()).or_insert(0);
        *count += 1;
        if *count == 2 {
            issues.push(ValidationIssue::DuplicateMediaId {
                media_id: r.media_id.clone(),
            });
        }
        match (r.kind, &r.video_id) {
            (MediaKind::VideoFrame, None) => issues.push(ValidationIssue::FrameWithoutVideo {
                media_id: r.media_id.clone(),
            }),
            (MediaKind::Image, Some(_)) => issues.push(ValidationIssue::ImageWithVideo {
                media_id: r.media_id.clone(),
            }),
            (MediaKind::VideoFrame, Some(v)) => {
                video_templates
                    .entry(v.as_str())
                    .or_default()
                    .insert(r.template_id.as_str());
            }
            (MediaKind::Image, None) => {}
        }
        template_subjects
            .entry(r.template_id.as_str())
            .or_default()
            .insert(r.subject_id.as_str());
        if *count == 1 && !features.contains_key(&r.media_id) {
            issues.push(ValidationIssue::MissingFeature {
                media_id: r.media_id.clone(),
            });
        }
    }

    for (video_id, templates) in video_templates {
        if templates.len() > 1 {
            issues.push(ValidationIssue::VideoSpansTemplates {
                video_id: video_id.to_owned(),
            });
        }
    }
    for (template_id, subjects) in template_subjects {
        if subjects.len() > 1 {
            issues.push(ValidationIssue::TemplateSubjectConflict {
                template_id: template_id.to_owned(),
            });
        }
    }

    for (media_id, v) in features {
        if !seen.contains_key(media_id.as_str()) {
            issues.push(ValidationIssue::OrphanFeature {
                media_id: media_id.clone(),
            });
        }
        if v.dim() != dim {
            issues.push(ValidationIssue::DimMismatch {
                media_id: media_id.clone(),
                expected: dim,
                found: v.dim(),
            });
        }
        if !v.is_finite() {
            issues.push(ValidationIssue::NonFinite {
                media_id: media_id.clone(),
            });
        }
    }

    issues.sort();
    ValidationReport { issues }
}
