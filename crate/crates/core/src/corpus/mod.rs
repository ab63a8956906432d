//! Corpus substrate: documents, sentences, tokens and motions.
//!
//! All character offsets are counted in Unicode scalar values, never bytes.

mod ingest;
mod segment;
mod tokenize;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::annotator::AnnotationSpan;

pub use ingest::{ingest_corpus, read_corpus_file};
pub use segment::{segment_sentences, ABBREVIATIONS};
pub use tokenize::tokenize;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: malformed corpus record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("duplicate doc_id `{0}`")]
    DuplicateDocId(String),
    #[error("line {line}: empty doc_id")]
    EmptyDocId { line: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub source: String,
    pub title: String,
    pub text: String,
}

/// Identifies a sentence by its document and its position in that document.
///
/// Ordering is by `doc_id` (lexicographic) and then by `index`; every
/// "ascending sentence order" in the engine refers to this ordering.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SentenceId {
    pub doc_id: String,
    pub index: u32,
}

impl SentenceId {
    pub fn new(doc_id: impl Into<String>, index: u32) -> Self {
        Self { doc_id: doc_id.into(), index }
    }
}

impl fmt::Display for SentenceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.doc_id, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub normalized: String,
    /// Half-open `[start, end)` span in chars of the owning sentence text.
    pub start: usize,
    pub end: usize,
}

impl Token {
    /// True for single-character punctuation tokens.
    pub fn is_punct(&self) -> bool {
        !self.surface.chars().any(char::is_alphanumeric)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub id: SentenceId,
    pub text: String,
    pub tokens: Vec<Token>,
    pub annotations: Vec<AnnotationSpan>,
}

impl Sentence {
    /// Tokenized but not yet annotated sentence.
    pub fn new(id: SentenceId, text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize(&text);
        Self { id, text, tokens, annotations: Vec::new() }
    }

    pub fn normalized_tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.normalized.as_str())
    }

    /// Char span covering tokens `first..=last`.
    pub fn char_span(&self, first: usize, last: usize) -> (usize, usize) {
        (self.tokens[first].start, self.tokens[last].end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EvidenceType {
    Study,
    Expert,
}

impl EvidenceType {
    pub const ALL: [EvidenceType; 2] = [EvidenceType::Study, EvidenceType::Expert];

    pub fn as_str(self) -> &'static str {
        match self {
            EvidenceType::Study => "study",
            EvidenceType::Expert => "expert",
        }
    }
}

impl fmt::Display for EvidenceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EvidenceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "study" => Ok(EvidenceType::Study),
            "expert" => Ok(EvidenceType::Expert),
            other => Err(format!("unknown evidence type `{other}`")),
        }
    }
}

/// A debate motion: a topic (canonical wiki title), an optional action and
/// the statement text.
#[derive(Debug, Clone, PartialEq)]
pub struct Motion {
    pub motion_id: String,
    pub text: String,
    pub topic: String,
    pub action: Option<String>,
    /// Every normalized token sequence the redirect table maps onto `topic`.
    pub topic_surface_forms: Vec<Vec<String>>,
}

impl Motion {
    /// Normalized tokens of the action, if any.
    pub fn action_tokens(&self) -> Option<Vec<String>> {
        self.action
            .as_deref()
            .map(|a| tokenize(a).into_iter().map(|t| t.normalized).collect::<Vec<_>>())
            .filter(|toks| !toks.is_empty())
    }

    /// Set of normalized tokens appearing in any topic surface form.
    pub fn topic_token_set(&self) -> std::collections::BTreeSet<String> {
        self.topic_surface_forms.iter().flatten().cloned().collect()
    }
}
