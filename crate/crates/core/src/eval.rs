//! Verification (TAR@FAR) and identification (CMC, TPIR@FPIR) metrics and
//! their aggregation across protocol splits.
//!
//! All thresholds use step semantics: a score is accepted when it is `≥ τ`,
//! and `τ` is the smallest value keeping the false-accept count within the
//! target. Nothing is interpolated.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probe template → scored gallery templates.
pub type ProbeScores = BTreeMap<String, Vec<(String, f64)>>;

/// Template id → subject id.
pub type SubjectMap = BTreeMap<String, String>;

/// Named metric values for one split.
pub type MetricMap = BTreeMap<String, f64>;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub far: f64,
    pub tar: f64,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub target: f64,
    /// True accept rate (verification) or true positive identification rate.
    pub rate: f64,
    /// Accept scores `≥ threshold`; `-inf` when every score is accepted.
    pub threshold: f64,
    /// False rate actually reached at `threshold`.
    pub achieved: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentificationResult {
    pub cmc: Vec<f64>,
    pub tpir_at_fpir: Vec<OperatingPoint>,
}

fn check_scores(scores: &[f64], what: &str) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput(format!("NaN in {what} scores")));
    }
    Ok(())
}

fn check_target(target: f64) -> Result<()> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "rate target {target} outside (0, 1]"
        )));
    }
    Ok(())
}

/// Largest count `k` with `k / n ≤ target`.
fn allowed_false(n: usize, target: f64) -> usize {
    let nf = n as f64;
    let mut k = ((target * nf).floor() as usize).min(n);
    while k < n && ((k + 1) as f64) / nf <= target {
        k += 1;
    }
    while k > 0 && (k as f64) / nf > target {
        k -= 1;
    }
    k
}

/// Smallest threshold `τ` such that at most `target · n` of `negatives` are
/// `≥ τ`. `negatives` must be sorted descending.
fn step_threshold(sorted_desc: &[f64], target: f64) -> f64 {
    let k = allowed_false(sorted_desc.len(), target);
    match sorted_desc.get(k) {
        // Accepting ≥ next_up(c) is the same as accepting > c.
        Some(&c) => c.next_up(),
        None => f64::NEG_INFINITY,
    }
}

fn sorted_desc(scores: &[f64]) -> Vec<f64> {
    let mut v = scores.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn fraction_at_least(scores: &[f64], threshold: f64) -> f64 {
    scores.iter().filter(|&&s| s >= threshold).count() as f64 / scores.len() as f64
}

/// True accept rate at each false accept target.
pub fn tar_at_far(
    genuine: &[f64],
    impostor: &[f64],
    far_targets: &[f64],
) -> Result<Vec<OperatingPoint>> {
    check_scores(genuine, "genuine")?;
    check_scores(impostor, "impostor")?;
    let imp = sorted_desc(impostor);
    far_targets
        .iter()
        .map(|&target| {
            check_target(target)?;
            let threshold = step_threshold(&imp, target);
            Ok(OperatingPoint {
                target,
                rate: fraction_at_least(genuine, threshold),
                threshold,
                achieved: fraction_at_least(&imp, threshold),
            })
        })
        .collect()
}

/// Full step ROC: one point per distinct score, thresholds ascending.
pub fn roc_curve(genuine: &[f64], impostor: &[f64]) -> Result<Vec<RocPoint>> {
    check_scores(genuine, "genuine")?;
    check_scores(impostor, "impostor")?;
    let mut thresholds: Vec<f64> = genuine.iter().chain(impostor).copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    Ok(thresholds
        .into_iter()
        .map(|t| RocPoint {
            threshold: t,
            far: fraction_at_least(impostor, t),
            tar: fraction_at_least(genuine, t),
        })
        .collect())
}

/// Gallery entries sorted by score descending, ties by template id ascending.
fn ranked(entries: &[(String, f64)]) -> Vec<&(String, f64)> {
    let mut v: Vec<&(String, f64)> = entries.iter().collect();
    v.sort_by(|a, b| match b.1.total_cmp(&a.1) {
        Ordering::Equal => a.0.cmp(&b.0),
        o => o,
    });
    v
}

fn subject_of<'a>(truth: &'a SubjectMap, probe: &str) -> Result<&'a str> {
    truth
        .get(probe)
        .map(String::as_str)
        .ok_or_else(|| Error::InvalidInput(format!("no subject for probe {probe}")))
}

/// 1-based rank of the best-placed mated gallery entry, with its score.
fn mate_rank(
    entries: &[(String, f64)],
    subject: &str,
    gallery_subjects: &SubjectMap,
) -> Result<Option<(usize, f64)>> {
    for (i, (gallery, score)) in ranked(entries).into_iter().enumerate() {
        let g_subject = gallery_subjects
            .get(gallery)
            .ok_or_else(|| Error::UnknownTemplate(gallery.clone()))?;
        if g_subject == subject {
            return Ok(Some((i + 1, *score)));
        }
    }
    Ok(None)
}

/// Rank-k identification accuracy for k = 1..=max_rank over a closed probe set.
pub fn cmc_curve(
    probe_scores: &ProbeScores,
    truth: &SubjectMap,
    gallery_subjects: &SubjectMap,
    max_rank: usize,
) -> Result<Vec<f64>> {
    if probe_scores.is_empty() {
        return Err(Error::EmptyScores);
    }
    let mut hits = vec![0usize; max_rank];
    for (probe, entries) in probe_scores {
        let subject = subject_of(truth, probe)?;
        let (rank, _) = mate_rank(entries, subject, gallery_subjects)?
            .ok_or_else(|| Error::MissingMate(probe.clone()))?;
        if rank <= max_rank {
            hits[rank - 1] += 1;
        }
    }
    let n = probe_scores.len() as f64;
    let mut acc = 0;
    Ok(hits
        .into_iter()
        .map(|h| {
            acc += h;
            acc as f64 / n
        })
        .collect())
}

/// Open-set TPIR at each FPIR target. A mated probe counts as a hit only if
/// its mate is ranked first and clears the threshold.
pub fn open_set_metrics(
    probe_scores: &ProbeScores,
    truth: &SubjectMap,
    gallery_subjects: &SubjectMap,
    fpir_targets: &[f64],
) -> Result<Vec<OperatingPoint>> {
    let enrolled: std::collections::BTreeSet<&str> =
        gallery_subjects.values().map(String::as_str).collect();
    let mut nonmated_top = Vec::new();
    // Score of the mate for mated probes whose mate is ranked first; None otherwise.
    let mut mated: Vec<Option<f64>> = Vec::new();

    for (probe, entries) in probe_scores {
        if entries.is_empty() {
            return Err(Error::InvalidInput(format!(
                "probe {probe} has no gallery scores"
            )));
        }
        let subject = subject_of(truth, probe)?;
        if enrolled.contains(subject) {
            let hit = match mate_rank(entries, subject, gallery_subjects)? {
                Some((1, score)) => Some(score),
                _ => None,
            };
            mated.push(hit);
        } else {
            let top = entries
                .iter()
                .map(|e| e.1)
                .fold(f64::NEG_INFINITY, f64::max);
            nonmated_top.push(top);
        }
    }
    if nonmated_top.is_empty() {
        return Err(Error::NoNonMatedProbes);
    }
    if mated.is_empty() {
        return Err(Error::InvalidInput("no mated probes".into()));
    }
    let nonmated = sorted_desc(&nonmated_top);
    fpir_targets
        .iter()
        .map(|&target| {
            check_target(target)?;
            let threshold = step_threshold(&nonmated, target);
            let hits = mated
                .iter()
                .filter(|m| matches!(m, Some(s) if *s >= threshold))
                .count();
            Ok(OperatingPoint {
                target,
                rate: hits as f64 / mated.len() as f64,
                threshold,
                achieved: fraction_at_least(&nonmated, threshold),
            })
        })
        .collect()
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator); 0 for a single split.
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub split_id: u32,
    pub metrics: MetricMap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub per_split: Vec<SplitMetrics>,
    pub aggregate: BTreeMap<String, Summary>,
}

impl MetricReport {
    /// `key = mean ± std` lines followed by per-split values.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, s) in &self.aggregate {
            out.push_str(&format!("{key} = {:.6} ± {:.6}\n", s.mean, s.std));
        }
        for split in &self.per_split {
            for (key, v) in &split.metrics {
                out.push_str(&format!("split[{}].{key} = {v:.17e}\n", split.split_id));
            }
        }
        out
    }
}

pub fn aggregate_splits(per_split: &[SplitMetrics]) -> Result<MetricReport> {
    let first = per_split
        .first()
        .ok_or_else(|| Error::InvalidInput("no splits to aggregate".into()))?;
    for s in per_split {
        if s.metrics.keys().ne(first.metrics.keys()) {
            return Err(Error::KeyMismatch(format!(
                "split {} vs split {}",
                first.split_id, s.split_id
            )));
        }
    }
    let n = per_split.len() as f64;
    let aggregate = first
        .metrics
        .keys()
        .map(|key| {
            let mean = per_split.iter().map(|s| s.metrics[key]).sum::<f64>() / n;
            let std = if per_split.len() < 2 {
                0.0
            } else {
                let ss: f64 = per_split
                    .iter()
                    .map(|s| (s.metrics[key] - mean).powi(2))
                    .sum();
                (ss / (n - 1.0)).sqrt()
            };
            (key.clone(), Summary { mean, std })
        })
        .collect();
    Ok(MetricReport {
        per_split: per_split.to_vec(),
        aggregate,
    })
}
