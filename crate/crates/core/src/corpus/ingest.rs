use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;

use super::{CorpusError, Document};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    doc_id: String,
    source: String,
    title: String,
    text: String,
}

/// Reads newline-delimited JSON corpus records.
///
/// Blank lines are skipped. Line numbers in errors are 1-based.
pub fn ingest_corpus<R: BufRead>(reader: R) -> Result<Vec<Document>, CorpusError> {
    let mut seen = HashSet::new();
    let mut docs = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(&line)
            .map_err(|e| CorpusError::Malformed { line: line_no, reason: e.to_string() })?;
        if rec.doc_id.is_empty() {
            return Err(CorpusError::EmptyDocId { line: line_no });
        }
        if !seen.insert(rec.doc_id.clone()) {
            return Err(CorpusError::DuplicateDocId(rec.doc_id));
        }
        docs.push(Document { doc_id: rec.doc_id, source: rec.source, title: rec.title, text: rec.text });
    }
    Ok(docs)
}

pub fn read_corpus_file(path: &Path) -> Result<Vec<Document>, CorpusError> {
    ingest_corpus(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stream() {
        assert!(ingest_corpus("".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn preserves_order() {
        let input = r#"{"doc_id":"b","source":"Times","title":"T1","text":"One."}
{"doc_id":"a","source":"Post","title":"T2","text":""}
"#;
        let docs = ingest_corpus(input.as_bytes()).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].doc_id, "b");
        assert_eq!(docs[1].doc_id, "a");
        assert_eq!(docs[1].text, "");
    }

    #[test]
    fn missing_text_reports_line() {
        let input = r#"{"doc_id":"a","source":"s","title":"t","text":"x"}

{"doc_id":"b","source":"s","title":"t"}
"#;
        match ingest_corpus(input.as_bytes()) {
            Err(CorpusError::Malformed { line, reason }) => {
                assert_eq!(line, 3);
                assert!(reason.contains("text"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_doc_id() {
        let input = r#"{"doc_id":"a","source":"s","title":"t","text":"x"}
{"doc_id":"a","source":"s","title":"t","text":"y"}"#;
        match ingest_corpus(input.as_bytes()) {
            Err(CorpusError::DuplicateDocId(id)) => assert_eq!(id, "a"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
