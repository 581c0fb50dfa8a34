//! Python bindings for `tdff-core`.
//!
//! Vectors cross the boundary as lists of floats; identifiers as strings.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use tdff_core::eval::{self, ProbeScores, SplitMetrics, SubjectMap};
use tdff_core::model::{Embedding, EncodingSource, FeatureMap, MediaEncoding, Template};
use tdff_core::scoring::{self, FusionConfig};
use tdff_core::svm::{self, SolverConfig, TrainingProblem};
use tdff_core::{fusion, io, pipeline, synth, Config, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn embedding(values: Vec<f64>) -> PyResult<Embedding> {
    Embedding::new(values).map_err(to_py)
}

fn encodings(vectors: Vec<Vec<f64>>, prefix: &str) -> PyResult<Vec<MediaEncoding>> {
    vectors
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            MediaEncoding::new(
                EncodingSource::SingleImage {
                    media_id: format!("{prefix}{i}"),
                },
                embedding(v)?,
            )
            .map_err(to_py)
        })
        .collect()
}

/// A trained template-specific linear SVM.
#[pyclass(name = "SvmModel", module = "tdff", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySvmModel {
    inner: svm::SvmModel,
}

#[pymethods]
impl PySvmModel {
    #[new]
    fn new(weights: Vec<f64>, bias: f64, owner_template: String) -> PyResult<Self> {
        let inner = svm::SvmModel::new(embedding(weights)?, bias, owner_template).map_err(to_py)?;
        Ok(PySvmModel { inner })
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().values().to_vec()
    }

    #[getter]
    fn bias(&self) -> f64 {
        self.inner.bias()
    }

    #[getter]
    fn owner_template(&self) -> String {
        self.inner.owner_template().to_owned()
    }

    fn decision_value(&self, x: Vec<f64>) -> PyResult<f64> {
        svm::decision_value(&self.inner, &embedding(x)?).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "SvmModel(owner_template={:?}, dim={}, bias={})",
            self.inner.owner_template(),
            self.inner.dim(),
            self.inner.bias()
        )
    }
}

#[pyfunction]
fn l2_normalize(v: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(fusion::l2_normalize(&embedding(v)?)
        .map_err(to_py)?
        .into_values())
}

#[pyfunction]
fn concat_streams(parts: Vec<Vec<f64>>, dims: Vec<usize>) -> PyResult<Vec<f64>> {
    let spec = fusion::FeatureStreamSpec::new(
        dims.iter()
            .enumerate()
            .map(|(i, &d)| (format!("stream{i}"), d))
            .collect(),
    )
    .map_err(to_py)?;
    let parts = parts
        .into_iter()
        .map(embedding)
        .collect::<PyResult<Vec<_>>>()?;
    let refs: Vec<&Embedding> = parts.iter().collect();
    Ok(fusion::concat_streams(&refs, &spec)
        .map_err(to_py)?
        .into_values())
}

#[pyfunction]
fn pool_video(frames: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let frames = frames
        .into_iter()
        .map(embedding)
        .collect::<PyResult<Vec<_>>>()?;
    let refs: Vec<&Embedding> = frames.iter().collect();
    Ok(fusion::pool_video(&refs).map_err(to_py)?.into_values())
}

#[pyfunction]
fn class_weights(n_pos: usize, n_neg: usize, c: f64) -> PyResult<(f64, f64)> {
    svm::class_weights(n_pos, n_neg, c).map_err(to_py)
}

/// Trains one SVM; positives and negatives must be unit-norm.
#[pyfunction]
#[pyo3(signature = (positives, negatives, c=10.0, tolerance=1e-4, max_iterations=1000, seed=0, owner_template=String::new()))]
fn train_svm(
    positives: Vec<Vec<f64>>,
    negatives: Vec<Vec<f64>>,
    c: f64,
    tolerance: f64,
    max_iterations: usize,
    seed: u64,
    owner_template: String,
) -> PyResult<PySvmModel> {
    let pos = encodings(positives, "pos")?;
    let neg = encodings(negatives, "neg")?;
    let problem =
        TrainingProblem::new(pos.iter().collect(), neg.iter().collect(), c).map_err(to_py)?;
    let config = SolverConfig {
        c,
        tolerance,
        max_iterations,
        seed,
    };
    let inner = svm::train_template_svm(&problem, &config, &owner_template).map_err(to_py)?;
    Ok(PySvmModel { inner })
}

#[pyfunction]
fn oss_score(
    model_p: &PySvmModel,
    model_q: &PySvmModel,
    p: Vec<f64>,
    q: Vec<f64>,
) -> PyResult<f64> {
    scoring::oss_score(
        &model_p.inner,
        &model_q.inner,
        &embedding(p)?,
        &embedding(q)?,
    )
    .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (scores, beta=0.0))]
fn fuse_scores(scores: Vec<f64>, beta: f64) -> PyResult<f64> {
    scoring::fuse_scores(&scores, &FusionConfig { beta }).map_err(to_py)
}

/// Fused score of two templates given as lists of unit-norm encodings.
#[pyfunction]
#[pyo3(signature = (encodings_a, encodings_b, model_a, model_b, beta=0.0))]
fn score_template_pair(
    encodings_a: Vec<Vec<f64>>,
    encodings_b: Vec<Vec<f64>>,
    model_a: &PySvmModel,
    model_b: &PySvmModel,
    beta: f64,
) -> PyResult<f64> {
    let ta = Template::new("a", "a", encodings(encodings_a, "a")?).map_err(to_py)?;
    let tb = Template::new("b", "b", encodings(encodings_b, "b")?).map_err(to_py)?;
    let pair = scoring::score_template_pair(
        &ta,
        &tb,
        &model_a.inner,
        &model_b.inner,
        &FusionConfig { beta },
    )
    .map_err(to_py)?;
    Ok(pair.score)
}

#[pyfunction]
fn tar_at_far(
    genuine: Vec<f64>,
    impostor: Vec<f64>,
    far_targets: Vec<f64>,
) -> PyResult<Vec<(f64, f64)>> {
    Ok(eval::tar_at_far(&genuine, &impostor, &far_targets)
        .map_err(to_py)?
        .into_iter()
        .map(|op| (op.target, op.rate))
        .collect())
}

#[pyfunction]
fn cmc_curve(
    probe_scores: ProbeScores,
    truth: SubjectMap,
    gallery_subjects: SubjectMap,
    max_rank: usize,
) -> PyResult<Vec<f64>> {
    eval::cmc_curve(&probe_scores, &truth, &gallery_subjects, max_rank).map_err(to_py)
}

#[pyfunction]
fn open_set_metrics(
    probe_scores: ProbeScores,
    truth: SubjectMap,
    gallery_subjects: SubjectMap,
    fpir_targets: Vec<f64>,
) -> PyResult<Vec<(f64, f64)>> {
    Ok(
        eval::open_set_metrics(&probe_scores, &truth, &gallery_subjects, &fpir_targets)
            .map_err(to_py)?
            .into_iter()
            .map(|op| (op.target, op.rate))
            .collect(),
    )
}

/// Mean and sample standard deviation per metric key.
#[pyfunction]
fn aggregate_splits(
    per_split: Vec<BTreeMap<String, f64>>,
) -> PyResult<BTreeMap<String, (f64, f64)>> {
    let splits: Vec<SplitMetrics> = per_split
        .into_iter()
        .enumerate()
        .map(|(i, metrics)| SplitMetrics {
            split_id: i as u32,
            metrics,
        })
        .collect();
    let report = eval::aggregate_splits(&splits).map_err(to_py)?;
    Ok(report
        .aggregate
        .into_iter()
        .map(|(k, s)| (k, (s.mean, s.std)))
        .collect())
}

#[pyfunction]
fn read_feature_file(path: PathBuf) -> PyResult<(usize, BTreeMap<String, Vec<f64>>)> {
    let (dim, features) = io::read_feature_file(&path).map_err(to_py)?;
    Ok((
        dim,
        features
            .into_iter()
            .map(|(k, v)| (k, v.into_values()))
            .collect(),
    ))
}

#[pyfunction]
fn write_feature_file(
    path: PathBuf,
    features: BTreeMap<String, Vec<f64>>,
    dim: usize,
) -> PyResult<()> {
    let map: FeatureMap = features
        .into_iter()
        .map(|(k, v)| (k, Embedding::raw(v)))
        .collect();
    io::write_feature_file(&path, &map, dim).map_err(to_py)
}

type MetadataTuple = (String, String, String, String, String, String, u32);
type Vectors = BTreeMap<String, Vec<f64>>;

/// Returns `(metadata_rows, features)`; each row is
/// `(template_id, subject_id, media_id, kind, video_id, split_role, split_id)`.
#[pyfunction]
#[pyo3(signature = (n_subjects, media_per_subject, frames_per_video, dim, noise_sigma, seed=0))]
fn generate_synthetic(
    n_subjects: usize,
    media_per_subject: usize,
    frames_per_video: usize,
    dim: usize,
    noise_sigma: f64,
    seed: u64,
) -> PyResult<(Vec<MetadataTuple>, Vectors)> {
    let spec = synth::SyntheticSpec {
        n_subjects,
        media_per_subject,
        frames_per_video,
        dim,
        noise_sigma,
        seed,
        ..Default::default()
    };
    let (rows, features) = synth::generate_synthetic(&spec).map_err(to_py)?;
    let rows = rows
        .into_iter()
        .map(|r| {
            (
                r.record.template_id,
                r.record.subject_id,
                r.record.media_id,
                r.record.kind.to_string(),
                r.record.video_id.unwrap_or_default(),
                r.role.to_string(),
                r.split_id,
            )
        })
        .collect();
    Ok((
        rows,
        features
            .into_iter()
            .map(|(k, v)| (k, v.into_values()))
            .collect(),
    ))
}

/// Runs the full pipeline for a config file and returns
/// `{metric: (mean, std)}`.
#[pyfunction]
#[pyo3(signature = (config_path, threads=0))]
fn run_pipeline(
    py: Python<'_>,
    config_path: PathBuf,
    threads: usize,
) -> PyResult<BTreeMap<String, (f64, f64)>> {
    let config = Config::load(&config_path).map_err(to_py)?;
    let report = py
        .detach(|| pipeline::with_threads(threads, || pipeline::run_pipeline(&config)))
        .map_err(to_py)?
        .map_err(to_py)?;
    Ok(report
        .aggregate
        .into_iter()
        .map(|(k, s)| (k, (s.mean, s.std)))
        .collect())
}

#[pymodule]
fn tdff(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySvmModel>()?;
    m.add_function(wrap_pyfunction!(l2_normalize, m)?)?;
    m.add_function(wrap_pyfunction!(concat_streams, m)?)?;
    m.add_function(wrap_pyfunction!(pool_video, m)?)?;
    m.add_function(wrap_pyfunction!(class_weights, m)?)?;
    m.add_function(wrap_pyfunction!(train_svm, m)?)?;
    m.add_function(wrap_pyfunction!(oss_score, m)?)?;
    m.add_function(wrap_pyfunction!(fuse_scores, m)?)?;
    m.add_function(wrap_pyfunction!(score_template_pair, m)?)?;
    m.add_function(wrap_pyfunction!(tar_at_far, m)?)?;
    m.add_function(wrap_pyfunction!(cmc_curve, m)?)?;
    m.add_function(wrap_pyfunction!(open_set_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_splits, m)?)?;
    m.add_function(wrap_pyfunction!(read_feature_file, m)?)?;
    m.add_function(wrap_pyfunction!(write_feature_file, m)?)?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    Ok(())
}
