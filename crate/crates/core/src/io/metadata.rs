//! Metadata and comparison-list CSV files.
//!
//! Metadata columns (header required):
//! `template_id,subject_id,media_id,kind,video_id,split_role,split_id`,
//! with `kind` one of `image`/`frame` and `video_id` empty for images.
//! A media row is repeated once per split it takes part in.
//!
//! Optional pair lists use `split_id,template_a,template_b,label` with
//! `label` one of `mated`/`nonmated`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MediaKind, MediaRecord, PairLabel, SplitRole, VerificationPair};

pub const METADATA_HEADER: [&str; 7] = [
    "template_id",
    "subject_id",
    "media_id",
    "kind",
    "video_id",
    "split_role",
    "split_id",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetadataRow {
    pub record: MediaRecord,
    pub role: SplitRole,
    pub split_id: u32,
}

#[derive(Serialize, Deserialize)]
struct RawRow {
    template_id: String,
    subject_id: String,
    media_id: String,
    kind: MediaKind,
    video_id: String,
    split_role: SplitRole,
    split_id: u32,
}

fn line_of(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

pub fn read_metadata_from<R: Read>(reader: R) -> Result<Vec<MetadataRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(METADATA_HEADER.iter().copied()) {
        return Err(Error::Metadata {
            line: 1,
            message: format!(
                "header must be {}, found {}",
                METADATA_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut rows = Vec::new();
    for result in rdr.records() {
        let record = result?;
        let line = line_of(&record);
        let raw: RawRow = record
            .deserialize(Some(&header))
            .map_err(|e| Error::Metadata {
                line,
                message: e.to_string(),
            })?;
        let video_id = (!raw.video_id.is_empty()).then_some(raw.video_id);
        match (raw.kind, &video_id) {
            (MediaKind::VideoFrame, None) => {
                return Err(Error::Metadata {
                    line,
                    message: format!("frame {} has no video_id", raw.media_id),
                })
            }
            (MediaKind::Image, Some(v)) => {
                return Err(Error::Metadata {
                    line,
                    message: format!("image {} has video_id {v}", raw.media_id),
                })
            }
            _ => {}
        }
        rows.push(MetadataRow {
            record: MediaRecord {
                media_id: raw.media_id,
                kind: raw.kind,
                video_id,
                template_id: raw.template_id,
                subject_id: raw.subject_id,
            },
            role: raw.split_role,
            split_id: raw.split_id,
        });
    }
    Ok(rows)
}

pub fn write_metadata_to<W: Write>(writer: W, rows: &[MetadataRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for row in rows {
        wtr.serialize(RawRow {
            template_id: row.record.template_id.clone(),
            subject_id: row.record.subject_id.clone(),
            media_id: row.record.media_id.clone(),
            kind: row.record.kind,
            video_id: row.record.video_id.clone().unwrap_or_default(),
            split_role: row.role,
            split_id: row.split_id,
        })?;
    }
    if rows.is_empty() {
        wtr.write_record(METADATA_HEADER)?;
    }
    wtr.flush().map_err(|e| Error::io("<metadata>", e))?;
    Ok(())
}

pub fn read_metadata(path: &Path) -> Result<Vec<MetadataRow>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_metadata_from(file)
}

pub fn write_metadata(path: &Path, rows: &[MetadataRow]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_metadata_to(std::io::BufWriter::new(file), rows)
}

/// Split ids present in the metadata, ascending.
pub fn split_ids(rows: &[MetadataRow]) -> Vec<u32> {
    let mut ids: Vec<u32> = rows.iter().map(|r| r.split_id).collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

#[derive(Serialize, Deserialize)]
struct RawPair {
    split_id: u32,
    template_a: String,
    template_b: String,
    label: PairLabel,
}

/// Verification pairs grouped by split.
pub fn read_pairs(path: &Path) -> Result<BTreeMap<u32, Vec<VerificationPair>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out: BTreeMap<u32, Vec<VerificationPair>> = BTreeMap::new();
    for result in rdr.deserialize() {
        let raw: RawPair = result?;
        out.entry(raw.split_id).or_default().push(VerificationPair {
            template_a: raw.template_a,
            template_b: raw.template_b,
            label: raw.label,
        });
    }
    Ok(out)
}

pub fn write_pairs(path: &Path, pairs: &BTreeMap<u32, Vec<VerificationPair>>) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    for (&split_id, list) in pairs {
        for p in list {
            wtr.serialize(RawPair {
                split_id,
                template_a: p.template_a.clone(),
                template_b: p.template_b.clone(),
                label: p.label,
            })?;
        }
    }
    wtr.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
template_id,subject_id,media_id,kind,video_id,split_role,split_id
t1,s1,img/1.jpg,image,,gallery,1
t1,s1,frames/9_0.png,frame,9,gallery,1
t2,s2,img/2.jpg,image,,probe,1
t3,s3,img/3.jpg,image,,train,1
";

    #[test]
    fn parses_sample() {
        let rows = read_metadata_from(SAMPLE.as_bytes()).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].record.kind, MediaKind::VideoFrame);
        assert_eq!(rows[1].record.video_id.as_deref(), Some("9"));
        assert_eq!(rows[0].record.video_id, None);
        assert_eq!(rows[3].role, SplitRole::Train);
        assert_eq!(split_ids(&rows), vec![1]);
    }

    #[test]
    fn round_trips_through_writer() {
        let rows = read_metadata_from(SAMPLE.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_metadata_to(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), SAMPLE);
        assert_eq!(read_metadata_from(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn rejects_bad_rows() {
        let bad_header = "template,subject,media,kind,video,role,split\n";
        assert!(matches!(
            read_metadata_from(bad_header.as_bytes()),
            Err(Error::Metadata { line: 1, .. })
        ));
        let frame_without_video =
            format!("{}t,s,m,frame,,probe,0\n", METADATA_HEADER.join(",") + "\n");
        assert!(matches!(
            read_metadata_from(frame_without_video.as_bytes()),
            Err(Error::Metadata { line: 2, .. })
        ));
        let bad_kind = format!("{}\nt,s,m,audio,,probe,0\n", METADATA_HEADER.join(","));
        assert!(matches!(
            read_metadata_from(bad_kind.as_bytes()),
            Err(Error::Metadata { line: 2, .. })
        ));
    }

    #[test]
    fn pairs_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pairs.csv");
        let mut pairs = BTreeMap::new();
        pairs.insert(
            3,
            vec![VerificationPair {
                template_a: "a".into(),
                template_b: "b".into(),
                label: PairLabel::Nonmated,
            }],
        );
        write_pairs(&path, &pairs).unwrap();
        assert_eq!(read_pairs(&path).unwrap(), pairs);
    }
}
