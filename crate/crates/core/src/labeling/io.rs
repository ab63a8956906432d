//! CSV files exchanged with annotators.
//!
//! * label records: `motion_id,doc_id,sent_idx,annotator_id,label` (`pos`/`neg`)
//! * needs-labels: `motion_id,doc_id,sent_idx`
//! * snapshot: `iteration,motion_id,doc_id,sent_idx,gold`

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DatasetSnapshot, GoldPair, Label, LabelError, LabelRecord, PairKey};
use crate::corpus::SentenceId;

#[derive(Serialize, Deserialize)]
struct RecordRow {
    motion_id: String,
    doc_id: String,
    sent_idx: u32,
    annotator_id: String,
    label: String,
}

#[derive(Serialize, Deserialize)]
struct PairRow {
    motion_id: String,
    doc_id: String,
    sent_idx: u32,
}

#[derive(Serialize, Deserialize)]
struct SnapshotRow {
    iteration: usize,
    motion_id: String,
    doc_id: String,
    sent_idx: u32,
    gold: String,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(usize, T)>, LabelError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let mut out = Vec::new();
    for record in reader.records() {
        let malformed = |line: usize, e: csv::Error| LabelError::Malformed {
            path: path.display().to_string(),
            line,
            message: e.to_string(),
        };
        let record = record.map_err(|e| malformed(e.position().map(|p| p.line() as usize).unwrap_or(0), e))?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let row: T = record.deserialize(Some(&headers)).map_err(|e| malformed(line, e))?;
        out.push((line, row));
    }
    Ok(out)
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>, header: &[&str]) -> Result<(), LabelError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_label(path: &Path, line: usize, s: &str) -> Result<Label, LabelError> {
    s.parse().map_err(|message| LabelError::Malformed { path: path.display().to_string(), line, message })
}

pub fn read_label_records(path: &Path) -> Result<Vec<LabelRecord>, LabelError> {
    read_rows::<RecordRow>(path)?
        .into_iter()
        .map(|(line, r)| {
            Ok(LabelRecord {
                label: parse_label(path, line, &r.label)?,
                motion_id: r.motion_id,
                sentence: SentenceId::new(r.doc_id, r.sent_idx),
                annotator_id: r.annotator_id,
            })
        })
        .collect()
}

pub fn write_label_records(path: &Path, records: &[LabelRecord]) -> Result<(), LabelError> {
    let rows = records.iter().map(|r| RecordRow {
        motion_id: r.motion_id.clone(),
        doc_id: r.sentence.doc_id.clone(),
        sent_idx: r.sentence.index,
        annotator_id: r.annotator_id.clone(),
        label: r.label.as_str().into(),
    });
    write_rows(path, rows, &["motion_id", "doc_id", "sent_idx", "annotator_id", "label"])
}

pub fn read_needs_labels(path: &Path) -> Result<Vec<PairKey>, LabelError> {
    Ok(read_rows::<PairRow>(path)?
        .into_iter()
        .map(|(_, r)| PairKey::new(r.motion_id, SentenceId::new(r.doc_id, r.sent_idx)))
        .collect())
}

pub fn write_needs_labels<'a>(path: &Path, pairs: impl IntoIterator<Item = &'a PairKey>) -> Result<(), LabelError> {
    let rows = pairs.into_iter().map(|p| PairRow {
        motion_id: p.motion_id.clone(),
        doc_id: p.sentence.doc_id.clone(),
        sent_idx: p.sentence.index,
    });
    write_rows(path, rows, &["motion_id", "doc_id", "sent_idx"])
}

/// One row per gold pair, tagged with the iteration that labeled it.
pub fn write_snapshot(path: &Path, snapshot: &DatasetSnapshot) -> Result<(), LabelError> {
    let rows = snapshot.pairs.iter().map(|g| SnapshotRow {
        iteration: g.iteration,
        motion_id: g.pair.motion_id.clone(),
        doc_id: g.pair.sentence.doc_id.clone(),
        sent_idx: g.pair.sentence.index,
        gold: g.gold.as_str().into(),
    });
    write_rows(path, rows, &["iteration", "motion_id", "doc_id", "sent_idx", "gold"])
}

/// The snapshot's iteration is the largest one present.
pub fn read_snapshot(path: &Path) -> Result<DatasetSnapshot, LabelError> {
    let mut pairs = Vec::new();
    for (line, r) in read_rows::<SnapshotRow>(path)? {
        pairs.push(GoldPair {
            gold: parse_label(path, line, &r.gold)?,
            pair: PairKey::new(r.motion_id, SentenceId::new(r.doc_id, r.sent_idx)),
            iteration: r.iteration,
        });
    }
    let iteration = pairs.iter().map(|g| g.iteration).max().unwrap_or(0);
    Ok(DatasetSnapshot::from_pairs(iteration, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.csv");
        let p = PairKey::new("m1", SentenceId::new("doc,7", 3));
        let records = vec![LabelRecord::new(&p, "ann", Label::Positive), LabelRecord::new(&p, "bob", Label::Negative)];
        write_label_records(&path, &records).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "motion_id,doc_id,sent_idx,annotator_id,label\nm1,\"doc,7\",3,ann,pos\nm1,\"doc,7\",3,bob,neg\n");
        assert_eq!(read_label_records(&path).unwrap(), records);
    }

    #[test]
    fn bad_label_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.csv");
        std::fs::write(&path, "motion_id,doc_id,sent_idx,annotator_id,label\nm,d,0,a,pos\nm,d,1,a,yes\n").unwrap();
        match read_label_records(&path) {
            Err(LabelError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        std::fs::write(&path, "motion_id,doc_id,sent_idx,annotator_id,label\nm,d,x,a,pos\n").unwrap();
        assert!(matches!(read_label_records(&path), Err(LabelError::Malformed { line: 2, .. })));
    }

    #[test]
    fn snapshot_and_needs_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let snap = DatasetSnapshot::from_pairs(
            2,
            vec![
                GoldPair { pair: PairKey::new("m", SentenceId::new("a", 0)), gold: Label::Positive, iteration: 1 },
                GoldPair { pair: PairKey::new("m", SentenceId::new("b", 2)), gold: Label::Negative, iteration: 2 },
            ],
        );
        let path = dir.path().join("snap.csv");
        write_snapshot(&path, &snap).unwrap();
        assert_eq!(read_snapshot(&path).unwrap(), snap);

        let needs = dir.path().join("needs.csv");
        let pairs: Vec<PairKey> = snap.pairs.iter().map(|g| g.pair.clone()).collect();
        write_needs_labels(&needs, &pairs).unwrap();
        assert_eq!(read_needs_labels(&needs).unwrap(), pairs);
        write_needs_labels(&needs, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&needs).unwrap(), "motion_id,doc_id,sent_idx\n");
    }
}
