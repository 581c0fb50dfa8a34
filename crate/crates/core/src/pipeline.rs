//! End-to-end orchestration and the individually runnable stages behind the
//! CLI subcommands.
//!
//! Every stage is deterministic: parallel work is collected in identifier
//! order before anything is written, so results do not depend on the
//! number of worker threads.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use tracing::{debug, info};

use crate::config::Config;
use crate::error::{Error, Result, StageExt};
use crate::eval::{
    aggregate_splits, cmc_curve, open_set_metrics, roc_curve, tar_at_far, MetricMap, MetricReport,
    ProbeScores, RocPoint, SplitMetrics, SubjectMap,
};
use crate::fusion::{build_template, fuse_media, FeatureStreamSpec};
use crate::io::features::quantize;
use crate::io::metadata::split_ids;
use crate::io::{self, MetadataRow, ScoreRow};
use crate::model::{
    validate_dataset, Embedding, FeatureMap, MediaRecord, PairLabel, ProtocolSplit, SplitRole,
    Template, ValidationReport, VerificationPair,
};
use crate::scoring::{score_template_pair, FusionConfig};
use crate::svm::{
    build_negative_set, train_template_svm, NegativeRole, SolverConfig, SvmModel, TrainingProblem,
};

/// Metadata plus one raw feature map per configured stream.
pub struct Dataset {
    pub rows: Vec<MetadataRow>,
    pub pairs: Option<BTreeMap<u32, Vec<VerificationPair>>>,
    pub streams: Vec<(String, usize, FeatureMap)>,
}

pub fn load_dataset(config: &Config) -> Result<Dataset> {
    let rows = io::read_metadata(&config.data.metadata)?;
    let pairs = config
        .data
        .pairs
        .as_deref()
        .map(io::read_pairs)
        .transpose()?;
    let streams = config
        .data
        .streams
        .iter()
        .map(|s| {
            let (dim, features) = io::read_feature_file(&s.path)?;
            if dim != s.dim {
                return Err(Error::dim(
                    format!("feature file {}", s.path.display()),
                    s.dim,
                    dim,
                ));
            }
            Ok((s.name.clone(), s.dim, features))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        rows,
        pairs,
        streams,
    })
}

/// Distinct media records; rows repeated across splits collapse to one.
fn distinct_records(rows: &[MetadataRow]) -> Vec<MediaRecord> {
    let mut seen = std::collections::HashSet::new();
    rows.iter()
        .filter(|r| seen.insert(&r.record))
        .map(|r| r.record.clone())
        .collect()
}

/// Validates metadata against every stream, one report per stream.
pub fn validate(dataset: &Dataset) -> Vec<(String, ValidationReport)> {
    let records = distinct_records(&dataset.rows);
    dataset
        .streams
        .iter()
        .map(|(name, dim, features)| (name.clone(), validate_dataset(&records, features, *dim)))
        .collect()
}

fn ensure_valid(dataset: &Dataset) -> Result<()> {
    for (name, report) in validate(dataset) {
        if let Some(first) = report.issues.first() {
            return Err(Error::InvalidInput(format!(
                "stream {name}: {} issue(s), first: {first}",
                report.issues.len()
            )));
        }
    }
    Ok(())
}

/// First-stage fusion of every media item referenced by the metadata. The
/// fused vectors are rounded to feature-file precision, so in-memory runs
/// match runs that reload `fused.tdff`.
pub fn fuse_dataset(dataset: &Dataset, spec: &FeatureStreamSpec) -> Result<FeatureMap> {
    let ids: BTreeSet<&str> = dataset
        .rows
        .iter()
        .map(|r| r.record.media_id.as_str())
        .collect();
    let ids: Vec<&str> = ids.into_iter().collect();
    let fused: Vec<(String, Embedding)> = ids
        .par_iter()
        .map(|id| {
            let parts = dataset
                .streams
                .iter()
                .map(|(_, _, f)| {
                    f.get(*id).ok_or_else(|| Error::MissingFeature {
                        media_id: (*id).to_owned(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(((*id).to_owned(), quantize(&fuse_media(&parts, spec)?)))
        })
        .collect::<Result<_>>()?;
    Ok(fused.into_iter().collect())
}

/// Template ids, roles and subjects of one split; enough to evaluate scores
/// without feature data.
#[derive(Clone, Debug)]
pub struct SplitLayout {
    pub split_id: u32,
    pub subjects: SubjectMap,
    pub training: Vec<String>,
    pub gallery: Vec<String>,
    pub probe: Vec<String>,
    pub pairs: Vec<VerificationPair>,
}

/// Groups the rows of each split by template, in order of first appearance.
fn group_templates(
    rows: &[MetadataRow],
    split_id: u32,
) -> Result<Vec<(SplitRole, Vec<&MediaRecord>)>> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut groups: Vec<(SplitRole, Vec<&MediaRecord>)> = Vec::new();
    for row in rows.iter().filter(|r| r.split_id == split_id) {
        let i = *index
            .entry(row.record.template_id.as_str())
            .or_insert_with(|| {
                groups.push((row.role, Vec::new()));
                groups.len() - 1
            });
        if groups[i].0 != row.role {
            return Err(Error::InvalidInput(format!(
                "template {} has roles {} and {} in split {split_id}",
                row.record.template_id, groups[i].0, row.role
            )));
        }
        groups[i].1.push(&row.record);
    }
    Ok(groups)
}

pub fn split_layouts(
    rows: &[MetadataRow],
    pairs: Option<&BTreeMap<u32, Vec<VerificationPair>>>,
) -> Result<Vec<SplitLayout>> {
    split_ids(rows)
        .into_iter()
        .map(|split_id| {
            let mut layout = SplitLayout {
                split_id,
                subjects: SubjectMap::new(),
                training: Vec::new(),
                gallery: Vec::new(),
                probe: Vec::new(),
                pairs: Vec::new(),
            };
            for (role, records) in group_templates(rows, split_id)? {
                let id = records[0].template_id.clone();
                layout
                    .subjects
                    .insert(id.clone(), records[0].subject_id.clone());
                match role {
                    SplitRole::Train => layout.training.push(id),
                    SplitRole::Gallery => layout.gallery.push(id),
                    SplitRole::Probe => layout.probe.push(id),
                }
            }
            layout.pairs = match pairs {
                Some(p) => p.get(&split_id).cloned().unwrap_or_default(),
                None => {
                    let mut out = Vec::new();
                    for p in &layout.probe {
                        for g in &layout.gallery {
                            let label = if layout.subjects[p] == layout.subjects[g] {
                                PairLabel::Mated
                            } else {
                                PairLabel::Nonmated
                            };
                            out.push(VerificationPair {
                                template_a: p.clone(),
                                template_b: g.clone(),
                                label,
                            });
                        }
                    }
                    out
                }
            };
            for pair in &layout.pairs {
                for id in [&pair.template_a, &pair.template_b] {
                    if !layout.subjects.contains_key(id) {
                        return Err(Error::UnknownTemplate(id.clone()));
                    }
                }
            }
            Ok(layout)
        })
        .collect()
}

/// Builds every template of one split from fused features.
pub fn build_split(
    rows: &[MetadataRow],
    layout: &SplitLayout,
    fused: &FeatureMap,
) -> Result<ProtocolSplit> {
    let groups = group_templates(rows, layout.split_id)?;
    let built: Vec<(SplitRole, Template)> = groups
        .par_iter()
        .map(|(role, records)| Ok((*role, build_template(records, fused)?)))
        .collect::<Result<_>>()?;
    let mut training = Vec::new();
    let mut gallery = Vec::new();
    let mut probe = Vec::new();
    for (role, t) in built {
        match role {
            SplitRole::Train => training.push(t),
            SplitRole::Gallery => gallery.push(t),
            SplitRole::Probe => probe.push(t),
        }
    }
    ProtocolSplit::new(
        layout.split_id,
        training,
        gallery,
        probe,
        layout.pairs.clone(),
    )
}

/// Models for one split. Probe-side models use training negatives and serve
/// both verification and identification probes; gallery models also take
/// the other gallery templates as negatives.
#[derive(Clone, Debug, Default)]
pub struct SplitModels {
    pub probe_side: BTreeMap<String, SvmModel>,
    pub gallery_side: BTreeMap<String, SvmModel>,
}

fn train_all(
    split: &ProtocolSplit,
    targets: &BTreeSet<&str>,
    role: NegativeRole,
    solver: &SolverConfig,
) -> Result<BTreeMap<String, SvmModel>> {
    let targets: Vec<&str> = targets.iter().copied().collect();
    let models: Vec<SvmModel> = targets
        .par_iter()
        .map(|id| {
            let t = split
                .template(id)
                .ok_or_else(|| Error::UnknownTemplate((*id).to_owned()))?;
            let negatives = build_negative_set(role, t, split.training(), split.gallery())?;
            let problem = TrainingProblem::for_template(t, negatives, solver.c)?;
            train_template_svm(&problem, solver, id)
        })
        .collect::<Result<_>>()?;
    Ok(models
        .into_iter()
        .map(|m| (m.owner_template().to_owned(), m))
        .collect())
}

pub fn train_split(split: &ProtocolSplit, solver: &SolverConfig) -> Result<SplitModels> {
    let mut probe_side: BTreeSet<&str> = split.probe().iter().map(|t| t.template_id()).collect();
    for p in split.verification_pairs() {
        probe_side.insert(&p.template_a);
        probe_side.insert(&p.template_b);
    }
    let gallery_side: BTreeSet<&str> = split.gallery().iter().map(|t| t.template_id()).collect();
    debug!(
        split = split.split_id(),
        probe_models = probe_side.len(),
        gallery_models = gallery_side.len(),
        "training template SVMs"
    );
    Ok(SplitModels {
        probe_side: train_all(split, &probe_side, NegativeRole::VerificationProbe, solver)?,
        gallery_side: train_all(split, &gallery_side, NegativeRole::GalleryTemplate, solver)?,
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SplitScores {
    pub verification: Vec<ScoreRow>,
    pub identification: Vec<ScoreRow>,
}

fn model<'a>(models: &'a BTreeMap<String, SvmModel>, id: &str) -> Result<&'a SvmModel> {
    models
        .get(id)
        .ok_or_else(|| Error::InvalidInput(format!("no model for template {id}")))
}

fn template<'a>(split: &'a ProtocolSplit, id: &str) -> Result<&'a Template> {
    split
        .template(id)
        .ok_or_else(|| Error::UnknownTemplate(id.to_owned()))
}

pub fn score_split(
    split: &ProtocolSplit,
    models: &SplitModels,
    fusion: &FusionConfig,
) -> Result<SplitScores> {
    let verification: Vec<ScoreRow> = split
        .verification_pairs()
        .par_iter()
        .map(|pair| {
            let (a, b) = (&pair.template_a, &pair.template_b);
            let s = score_template_pair(
                template(split, a)?,
                template(split, b)?,
                model(&models.probe_side, a)?,
                model(&models.probe_side, b)?,
                fusion,
            )?;
            Ok(ScoreRow {
                probe_template: s.probe_template,
                gallery_template: s.gallery_template,
                score: s.score,
            })
        })
        .collect::<Result<_>>()?;

    let mut probes: Vec<&Template> = split.probe().iter().collect();
    probes.sort_by(|a, b| a.template_id().cmp(b.template_id()));
    let mut gallery: Vec<&Template> = split.gallery().iter().collect();
    gallery.sort_by(|a, b| a.template_id().cmp(b.template_id()));
    let cells: Vec<(&Template, &Template)> = probes
        .iter()
        .flat_map(|p| gallery.iter().map(move |g| (*p, *g)))
        .collect();
    let identification: Vec<ScoreRow> = cells
        .par_iter()
        .map(|(p, g)| {
            let s = score_template_pair(
                p,
                g,
                model(&models.probe_side, p.template_id())?,
                model(&models.gallery_side, g.template_id())?,
                fusion,
            )?;
            Ok(ScoreRow {
                probe_template: s.probe_template,
                gallery_template: s.gallery_template,
                score: s.score,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SplitScores {
        verification,
        identification,
    })
}

/// Metric values and curves for one split.
#[derive(Clone, Debug, Serialize)]
pub struct SplitEvaluation {
    pub metrics: MetricMap,
    pub roc: Vec<RocPoint>,
    pub cmc: Vec<f64>,
}

pub fn far_key(target: f64) -> String {
    format!("verification.tar@far={target}")
}

pub fn fpir_key(target: f64) -> String {
    format!("identification.tpir@fpir={target}")
}

pub fn rank_key(rank: usize) -> String {
    format!("identification.rank{rank}")
}

pub fn evaluate_split(
    layout: &SplitLayout,
    scores: &SplitScores,
    config: &Config,
) -> Result<SplitEvaluation> {
    let eval = &config.eval;
    let mut metrics = MetricMap::new();

    let verification: HashMap<(&str, &str), f64> = scores
        .verification
        .iter()
        .map(|r| {
            (
                (r.probe_template.as_str(), r.gallery_template.as_str()),
                r.score,
            )
        })
        .collect();
    let mut genuine = Vec::new();
    let mut impostor = Vec::new();
    for pair in &layout.pairs {
        let s = *verification
            .get(&(pair.template_a.as_str(), pair.template_b.as_str()))
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "no verification score for {} vs {}",
                    pair.template_a, pair.template_b
                ))
            })?;
        match pair.label {
            PairLabel::Mated => genuine.push(s),
            PairLabel::Nonmated => impostor.push(s),
        }
    }
    for op in tar_at_far(&genuine, &impostor, &eval.far_targets)? {
        metrics.insert(far_key(op.target), op.rate);
    }
    let roc = roc_curve(&genuine, &impostor)?;

    let gallery_subjects: SubjectMap = layout
        .gallery
        .iter()
        .map(|g| (g.clone(), layout.subjects[g].clone()))
        .collect();
    let enrolled: BTreeSet<&String> = gallery_subjects.values().collect();
    let mut all_probes = ProbeScores::new();
    for r in &scores.identification {
        all_probes
            .entry(r.probe_template.clone())
            .or_default()
            .push((r.gallery_template.clone(), r.score));
    }
    let mated: ProbeScores = all_probes
        .iter()
        .filter(|(p, _)| enrolled.contains(&layout.subjects[*p]))
        .map(|(p, v)| (p.clone(), v.clone()))
        .collect();
    let cmc = cmc_curve(&mated, &layout.subjects, &gallery_subjects, eval.max_rank())?;
    for &k in &eval.ranks {
        metrics.insert(rank_key(k), cmc[k - 1]);
    }
    for op in open_set_metrics(
        &all_probes,
        &layout.subjects,
        &gallery_subjects,
        &eval.fpir_targets,
    )? {
        metrics.insert(fpir_key(op.target), op.rate);
    }
    Ok(SplitEvaluation { metrics, roc, cmc })
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

const PROBE_MODELS: &str = "probe_models.tdsb";
const GALLERY_MODELS: &str = "gallery_models.tdsb";
const VERIFICATION_SCORES: &str = "verification_scores.csv";
const IDENTIFICATION_SCORES: &str = "identification_scores.csv";

fn write_split_models(config: &Config, split_id: u32, models: &SplitModels) -> Result<()> {
    let dir = config.split_dir(split_id);
    create_dir(&dir)?;
    let probe: Vec<SvmModel> = models.probe_side.values().cloned().collect();
    let gallery: Vec<SvmModel> = models.gallery_side.values().cloned().collect();
    io::write_models(&dir.join(PROBE_MODELS), &probe)?;
    io::write_models(&dir.join(GALLERY_MODELS), &gallery)
}

fn read_split_models(config: &Config, split_id: u32) -> Result<SplitModels> {
    let dir = config.split_dir(split_id);
    let keyed = |models: Vec<SvmModel>| {
        models
            .into_iter()
            .map(|m| (m.owner_template().to_owned(), m))
            .collect()
    };
    Ok(SplitModels {
        probe_side: keyed(io::read_models(&dir.join(PROBE_MODELS))?),
        gallery_side: keyed(io::read_models(&dir.join(GALLERY_MODELS))?),
    })
}

fn write_split_scores(config: &Config, split_id: u32, scores: &SplitScores) -> Result<()> {
    let dir = config.split_dir(split_id);
    create_dir(&dir)?;
    io::write_scores(&dir.join(VERIFICATION_SCORES), &scores.verification)?;
    io::write_scores(&dir.join(IDENTIFICATION_SCORES), &scores.identification)
}

fn read_split_scores(config: &Config, split_id: u32) -> Result<SplitScores> {
    let dir = config.split_dir(split_id);
    Ok(SplitScores {
        verification: io::read_scores(&dir.join(VERIFICATION_SCORES))?,
        identification: io::read_scores(&dir.join(IDENTIFICATION_SCORES))?,
    })
}

fn write_curves(config: &Config, split_id: u32, evaluation: &SplitEvaluation) -> Result<()> {
    let dir = config.split_dir(split_id);
    create_dir(&dir)?;
    io::scores::write_roc(&dir.join("roc.csv"), &evaluation.roc)?;
    io::scores::write_cmc(&dir.join("cmc.csv"), &evaluation.cmc)
}

fn read_fused(config: &Config) -> Result<FeatureMap> {
    let spec = config.stream_spec()?;
    let (dim, fused) = io::read_feature_file(&config.fused_path())?;
    if dim != spec.fused_dim() {
        return Err(Error::dim("fused feature file", spec.fused_dim(), dim));
    }
    Ok(fused)
}

fn finish_report(config: &Config, per_split: Vec<SplitMetrics>) -> Result<MetricReport> {
    let report = aggregate_splits(&per_split)?;
    create_dir(&config.output.dir)?;
    io::scores::write_report(&config.output.dir, "report", &report)?;
    Ok(report)
}

/// `synth` stage: writes the metadata CSV and one feature file per stream
/// from the config's `[synthetic]` section.
pub fn stage_synth(config: &Config) -> Result<usize> {
    let spec = config
        .synthetic
        .as_ref()
        .ok_or_else(|| Error::Config("missing [synthetic] section".into()))
        .stage("synth")?;
    if let Some(s) = config.data.streams.iter().find(|s| s.dim != spec.dim) {
        return Err(Error::Config(format!(
            "stream {} has dim {} but synthetic.dim is {}",
            s.name, s.dim, spec.dim
        )))
        .stage("synth");
    }
    let dims: Vec<usize> = config.data.streams.iter().map(|s| s.dim).collect();
    let (rows, streams) = crate::synth::generate_synthetic_streams(spec, &dims).stage("synth")?;
    for path in
        std::iter::once(&config.data.metadata).chain(config.data.streams.iter().map(|s| &s.path))
    {
        if let Some(parent) = path.parent() {
            create_dir(parent).stage("synth")?;
        }
    }
    io::write_metadata(&config.data.metadata, &rows).stage("synth")?;
    for (stream, features) in config.data.streams.iter().zip(&streams) {
        io::write_feature_file(&stream.path, features, stream.dim).stage("synth")?;
    }
    info!(
        rows = rows.len(),
        media = streams[0].len(),
        "wrote synthetic dataset"
    );
    Ok(rows.len())
}

/// `validate` stage: one report per stream.
pub fn stage_validate(config: &Config) -> Result<Vec<(String, ValidationReport)>> {
    let dataset = load_dataset(config).stage("validate")?;
    Ok(validate(&dataset))
}

/// `fuse` stage: writes `fused.tdff` under the output directory.
pub fn stage_fuse(config: &Config) -> Result<usize> {
    let dataset = load_dataset(config).stage("fuse")?;
    ensure_valid(&dataset).stage("validate")?;
    let spec = config.stream_spec()?;
    let fused = fuse_dataset(&dataset, &spec).stage("fuse")?;
    create_dir(&config.output.dir).stage("fuse")?;
    io::write_feature_file(&config.fused_path(), &fused, spec.fused_dim()).stage("fuse")?;
    info!(
        media = fused.len(),
        dim = spec.fused_dim(),
        "wrote fused features"
    );
    Ok(fused.len())
}

fn load_layouts(config: &Config) -> Result<(Vec<MetadataRow>, Vec<SplitLayout>)> {
    let rows = io::read_metadata(&config.data.metadata)?;
    let pairs = config
        .data
        .pairs
        .as_deref()
        .map(io::read_pairs)
        .transpose()?;
    let layouts = split_layouts(&rows, pairs.as_ref())?;
    Ok((rows, layouts))
}

/// `train` stage: reads fused features, writes per-split model bundles.
pub fn stage_train(config: &Config) -> Result<usize> {
    let (rows, layouts) = load_layouts(config).stage("templates")?;
    let fused = read_fused(config).stage("train")?;
    let mut count = 0;
    for layout in &layouts {
        let split = build_split(&rows, layout, &fused).stage("templates")?;
        let models = train_split(&split, &config.svm).stage("train")?;
        write_split_models(config, layout.split_id, &models).stage("train")?;
        count += models.probe_side.len() + models.gallery_side.len();
    }
    info!(models = count, "trained template SVMs");
    Ok(count)
}

/// `score` stage: reads fused features and models, writes score tables.
pub fn stage_score(config: &Config) -> Result<usize> {
    let (rows, layouts) = load_layouts(config).stage("templates")?;
    let fused = read_fused(config).stage("score")?;
    let mut count = 0;
    for layout in &layouts {
        let split = build_split(&rows, layout, &fused).stage("templates")?;
        let models = read_split_models(config, layout.split_id).stage("score")?;
        let scores = score_split(&split, &models, &config.fusion).stage("score")?;
        write_split_scores(config, layout.split_id, &scores).stage("score")?;
        count += scores.verification.len() + scores.identification.len();
    }
    info!(scores = count, "scored template pairs");
    Ok(count)
}

/// `eval` stage: reads score tables, writes curves and the metric report.
pub fn stage_eval(config: &Config) -> Result<MetricReport> {
    let (_, layouts) = load_layouts(config).stage("eval")?;
    let mut per_split = Vec::new();
    for layout in &layouts {
        let scores = read_split_scores(config, layout.split_id).stage("eval")?;
        let evaluation = evaluate_split(layout, &scores, config).stage("eval")?;
        write_curves(config, layout.split_id, &evaluation).stage("eval")?;
        per_split.push(SplitMetrics {
            split_id: layout.split_id,
            metrics: evaluation.metrics,
        });
    }
    finish_report(config, per_split).stage("eval")
}

/// Runs every stage in memory, persisting intermediates when configured.
pub fn run_pipeline(config: &Config) -> Result<MetricReport> {
    let dataset = load_dataset(config).stage("load")?;
    ensure_valid(&dataset).stage("validate")?;
    let spec = config.stream_spec().stage("fuse")?;
    let fused = fuse_dataset(&dataset, &spec).stage("fuse")?;
    let layouts = split_layouts(&dataset.rows, dataset.pairs.as_ref()).stage("templates")?;
    if config.output.persist {
        create_dir(&config.output.dir).stage("fuse")?;
        io::write_feature_file(&config.fused_path(), &fused, spec.fused_dim()).stage("fuse")?;
    }

    let mut per_split = Vec::new();
    for layout in &layouts {
        let split = build_split(&dataset.rows, layout, &fused).stage("templates")?;
        info!(
            split = layout.split_id,
            training = split.training().len(),
            gallery = split.gallery().len(),
            probe = split.probe().len(),
            pairs = split.verification_pairs().len(),
            "split assembled"
        );
        let models = train_split(&split, &config.svm).stage("train")?;
        let scores = score_split(&split, &models, &config.fusion).stage("score")?;
        let evaluation = evaluate_split(layout, &scores, config).stage("eval")?;
        if config.output.persist {
            write_split_models(config, layout.split_id, &models).stage("train")?;
            write_split_scores(config, layout.split_id, &scores).stage("score")?;
            write_curves(config, layout.split_id, &evaluation).stage("eval")?;
        }
        per_split.push(SplitMetrics {
            split_id: layout.split_id,
            metrics: evaluation.metrics,
        });
    }
    let report = aggregate_splits(&per_split).stage("eval")?;
    if config.output.persist {
        finish_report(config, per_split).stage("eval")?;
    }
    Ok(report)
}

/// Runs `f` on a dedicated pool of `threads` workers (0 = available parallelism).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
