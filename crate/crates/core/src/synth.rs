//! Synthetic clustered embeddings for desk-scale runs.
//!
//! Each subject gets a class mean drawn uniformly on the unit sphere; every
//! image and every video frame is `normalize(mean + N(0, σ²I))`. Subjects
//! are split per protocol split into training subjects, enrolled subjects
//! (first template in the gallery, the rest as probes) and unenrolled
//! subjects whose templates are all non-mated probes.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::l2_normalize;
use crate::io::MetadataRow;
use crate::model::{Embedding, FeatureMap, MediaKind, MediaRecord, SplitRole};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_subjects: usize,
    pub media_per_subject: usize,
    pub frames_per_video: usize,
    pub dim: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    pub templates_per_subject: usize,
    /// Every `video_every`-th media item of a subject is a video (0 = none).
    pub video_every: usize,
    pub n_splits: usize,
    pub train_fraction: f64,
    /// Fraction of evaluation subjects left out of the gallery.
    pub nonmated_fraction: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_subjects: 50,
            media_per_subject: 10,
            frames_per_video: 5,
            dim: 64,
            noise_sigma: 0.3,
            seed: 0,
            templates_per_subject: 2,
            video_every: 3,
            n_splits: 1,
            train_fraction: 1.0 / 3.0,
            nonmated_fraction: 0.2,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_subjects", self.n_subjects),
            ("media_per_subject", self.media_per_subject),
            ("frames_per_video", self.frames_per_video),
            ("templates_per_subject", self.templates_per_subject),
            ("n_splits", self.n_splits),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!(
                "synthetic {name} must be at least 1"
            )));
        }
        if self.dim < 2 {
            return Err(Error::Config("synthetic dim must be at least 2".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(
                "noise_sigma must be finite and non-negative".into(),
            ));
        }
        for (name, f) in [
            ("train_fraction", self.train_fraction),
            ("nonmated_fraction", self.nonmated_fraction),
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }

    fn templates(&self) -> usize {
        self.templates_per_subject.min(self.media_per_subject)
    }
}

enum Item {
    Image(String),
    Video(String, Vec<String>),
}

/// Media items of one subject, grouped by template.
fn subject_media(spec: &SyntheticSpec, subject: usize) -> Vec<(String, Vec<Item>)> {
    let n_templates = spec.templates();
    let mut templates: Vec<(String, Vec<Item>)> = (0..n_templates)
        .map(|t| (format!("s{subject:04}_t{t}"), Vec::new()))
        .collect();
    for m in 0..spec.media_per_subject {
        let is_video = spec.video_every > 0 && m % spec.video_every == spec.video_every - 1;
        let item = if is_video {
            let video = format!("s{subject:04}_v{m:03}");
            let frames = (0..spec.frames_per_video)
                .map(|f| format!("{video}_f{f:03}"))
                .collect();
            Item::Video(video, frames)
        } else {
            Item::Image(format!("s{subject:04}_m{m:03}"))
        };
        templates[m % n_templates].1.push(item);
    }
    templates
}

fn subject_id(subject: usize) -> String {
    format!("s{subject:04}")
}

/// Metadata rows for every split. Only the metadata stream of the RNG is used.
pub fn generate_metadata(spec: &SyntheticSpec) -> Result<Vec<MetadataRow>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let media: Vec<_> = (0..spec.n_subjects)
        .map(|s| subject_media(spec, s))
        .collect();
    let n_train =
        ((spec.n_subjects as f64 * spec.train_fraction).round() as usize).min(spec.n_subjects);
    let n_eval = spec.n_subjects - n_train;
    let n_nonmated = (n_eval as f64 * spec.nonmated_fraction).round() as usize;

    let mut rows = Vec::new();
    for split in 0..spec.n_splits {
        let mut order: Vec<usize> = (0..spec.n_subjects).collect();
        order.shuffle(&mut rng);
        // 0 = train, 1 = enrolled, 2 = unenrolled
        let mut group = vec![1u8; spec.n_subjects];
        for &s in &order[..n_train] {
            group[s] = 0;
        }
        for &s in &order[n_train..n_train + n_nonmated] {
            group[s] = 2;
        }
        for (s, templates) in media.iter().enumerate() {
            for (t, (template_id, items)) in templates.iter().enumerate() {
                let role = match (group[s], t) {
                    (0, _) => SplitRole::Train,
                    (1, 0) => SplitRole::Gallery,
                    _ => SplitRole::Probe,
                };
                let push = |rows: &mut Vec<MetadataRow>, media_id: &str, video: Option<&str>| {
                    rows.push(MetadataRow {
                        record: MediaRecord {
                            media_id: media_id.to_owned(),
                            kind: if video.is_some() {
                                MediaKind::VideoFrame
                            } else {
                                MediaKind::Image
                            },
                            video_id: video.map(str::to_owned),
                            template_id: template_id.clone(),
                            subject_id: subject_id(s),
                        },
                        role,
                        split_id: split as u32,
                    });
                };
                for item in items {
                    match item {
                        Item::Image(id) => push(&mut rows, id, None),
                        Item::Video(video, frames) => {
                            for f in frames {
                                push(&mut rows, f, Some(video));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Embedding {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        if let Ok(u) = l2_normalize(&Embedding::raw(v)) {
            return u;
        }
    }
}

/// Feature vectors for one extractor stream. `stream` selects an independent
/// RNG stream, so each stream has its own class means.
pub fn generate_features(spec: &SyntheticSpec, dim: usize, stream: u64) -> Result<FeatureMap> {
    spec.validate()?;
    if dim == 0 {
        return Err(Error::Config("stream dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream + 1);
    let noise = Normal::new(0.0, spec.noise_sigma)
        .map_err(|e| Error::Config(format!("noise_sigma: {e}")))?;
    let mut out = FeatureMap::new();
    for s in 0..spec.n_subjects {
        let mean = random_unit(&mut rng, dim);
        let draw = |rng: &mut ChaCha8Rng| -> Result<Embedding> {
            let v: Vec<f64> = mean
                .values()
                .iter()
                .map(|m| m + noise.sample(rng))
                .collect();
            l2_normalize(&Embedding::raw(v))
        };
        for (_, items) in subject_media(spec, s) {
            for item in items {
                match item {
                    Item::Image(id) => {
                        out.insert(id, draw(&mut rng)?);
                    }
                    Item::Video(_, frames) => {
                        for f in frames {
                            out.insert(f, draw(&mut rng)?);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Metadata plus a single feature map of dimension `spec.dim`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Vec<MetadataRow>, FeatureMap)> {
    Ok((
        generate_metadata(spec)?,
        generate_features(spec, spec.dim, 0)?,
    ))
}

/// Metadata plus one feature map per stream dimension.
pub fn generate_synthetic_streams(
    spec: &SyntheticSpec,
    dims: &[usize],
) -> Result<(Vec<MetadataRow>, Vec<FeatureMap>)> {
    let features = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| generate_features(spec, d, i as u64))
        .collect::<Result<Vec<_>>>()?;
    Ok((generate_metadata(spec)?, features))
}
