//! Score tables and curve CSVs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{MetricReport, RocPoint};

/// Header of every score file.
pub const SCORE_HEADER: [&str; 3] = ["probe_template", "gallery_template", "score"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub probe_template: String,
    pub gallery_template: String,
    pub score: f64,
}

/// 17 significant digits, enough to reproduce any `f64` exactly.
pub fn format_score(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_scores(path: &Path, rows: &[ScoreRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(SCORE_HEADER)?;
    for r in rows {
        wtr.write_record([
            r.probe_template.as_str(),
            r.gallery_template.as_str(),
            &format_score(r.score),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    if rdr.headers()?.iter().ne(SCORE_HEADER.iter().copied()) {
        return Err(Error::InvalidInput(format!(
            "{}: header must be {}",
            path.display(),
            SCORE_HEADER.join(",")
        )));
    }
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

pub fn write_roc(path: &Path, roc: &[RocPoint]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["threshold", "far", "tar"])?;
    for p in roc {
        wtr.write_record([
            format_score(p.threshold),
            format_score(p.far),
            format_score(p.tar),
        ])?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_cmc(path: &Path, cmc: &[f64]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["rank", "accuracy"])?;
    for (k, acc) in cmc.iter().enumerate() {
        wtr.write_record([(k + 1).to_string(), format_score(*acc)])?;
    }
    wtr.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Writes `<stem>.json` and `<stem>.txt` next to each other.
pub fn write_report(dir: &Path, stem: &str, report: &MetricReport) -> Result<()> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::InvalidInput(format!("report serialization: {e}")))?;
    let json_path = dir.join(format!("{stem}.json"));
    std::fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;
    let text_path = dir.join(format!("{stem}.txt"));
    std::fs::write(&text_path, report.to_text()).map_err(|e| Error::io(&text_path, e))
}

pub fn read_report(path: &Path) -> Result<MetricReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}
