//! Positional semantic inverted index.
//!
//! Every token is posted under [`IndexKey::Term`] and every annotation span
//! under the key of its role. Postings carry token positions so ordered
//! slot matching can run without re-scanning sentences.

mod persist;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::annotator::{AnnotationSpan, EntityKind, Role};
use crate::corpus::{Document, Sentence, SentenceId};

pub use persist::{load_index, read_index, save_index, write_index, FORMAT_VERSION, MAGIC};

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("duplicate sentence id {0}")]
    DuplicateSentence(SentenceId),
    #[error("index format version mismatch: {0}")]
    VersionMismatch(String),
    #[error("index file truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("index checksum mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    Checksum { stored: u32, computed: u32 },
    #[error("corrupt index: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IndexKey {
    Term(String),
    Lexicon(String),
    Entity(EntityKind),
    Wiki(String),
}

impl IndexKey {
    pub fn for_role(role: &Role) -> Self {
        match role {
            Role::LexiconHit(name) => IndexKey::Lexicon(name.clone()),
            Role::NamedEntity(kind) => IndexKey::Entity(*kind),
            Role::WikiLink(title) => IndexKey::Wiki(title.clone()),
        }
    }
}

impl fmt::Display for IndexKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexKey::Term(t) => write!(f, "term:{t}"),
            IndexKey::Lexicon(l) => write!(f, "lex:{l}"),
            IndexKey::Entity(k) => write!(f, "ent:{k}"),
            IndexKey::Wiki(w) => write!(f, "wiki:{w}"),
        }
    }
}

/// Dense sentence ordinal. Ordinals follow [`SentenceId`] order, so sorting
/// by ordinal is sorting by sentence id.
pub type SentenceOrd = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Posting {
    pub sentence: SentenceOrd,
    pub first: u32,
    pub last: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DocumentMeta {
    pub source: String,
    pub title: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SemanticIndex {
    sentences: Vec<Sentence>,
    postings: BTreeMap<IndexKey, Vec<Posting>>,
    documents: BTreeMap<String, DocumentMeta>,
    doc_count: usize,
}

impl SemanticIndex {
    pub fn lookup(&self, key: &IndexKey) -> &[Posting] {
        self.postings.get(key).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn keys(&self) -> impl Iterator<Item = &IndexKey> {
        self.postings.keys()
    }

    pub fn postings(&self) -> impl Iterator<Item = (&IndexKey, &[Posting])> {
        self.postings.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn sentence(&self, ord: SentenceOrd) -> &Sentence {
        &self.sentences[ord as usize]
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn ordinal(&self, id: &SentenceId) -> Option<SentenceOrd> {
        self.sentences.binary_search_by(|s| s.id.cmp(id)).ok().map(|i| i as SentenceOrd)
    }

    pub fn get(&self, id: &SentenceId) -> Option<&Sentence> {
        self.ordinal(id).map(|o| self.sentence(o))
    }

    pub fn document(&self, doc_id: &str) -> Option<&DocumentMeta> {
        self.documents.get(doc_id)
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences.len()
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }
}

/// Accumulates sentences and document metadata, then sorts and posts them.
#[derive(Debug, Default)]
pub struct IndexBuilder {
    sentences: Vec<Sentence>,
    documents: BTreeMap<String, DocumentMeta>,
}

impl IndexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn documents<'a>(mut self, docs: impl IntoIterator<Item = &'a Document>) -> Self {
        for d in docs {
            self.documents
                .insert(d.doc_id.clone(), DocumentMeta { source: d.source.clone(), title: d.title.clone() });
        }
        self
    }

    pub fn add(&mut self, sentence: Sentence) {
        self.sentences.push(sentence);
    }

    pub fn finish(self) -> Result<SemanticIndex, IndexError> {
        let mut sentences = self.sentences;
        sentences.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = sentences.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(IndexError::DuplicateSentence(w[0].id.clone()));
        }

        let mut postings: BTreeMap<IndexKey, Vec<Posting>> = BTreeMap::new();
        for (ord, s) in sentences.iter().enumerate() {
            let ord = ord as SentenceOrd;
            for (i, tok) in s.tokens.iter().enumerate() {
                let p = Posting { sentence: ord, first: i as u32, last: i as u32 };
                postings.entry(IndexKey::Term(tok.normalized.clone())).or_default().push(p);
            }
            for AnnotationSpan { first, last, role } in &s.annotations {
                let p = Posting { sentence: ord, first: *first, last: *last };
                postings.entry(IndexKey::for_role(role)).or_default().push(p);
            }
        }
        for list in postings.values_mut() {
            list.sort_unstable();
            list.dedup();
        }

        let doc_ids: BTreeSet<&str> = sentences.iter().map(|s| s.id.doc_id.as_str()).collect();
        let doc_count = doc_ids.len().max(self.documents.len());
        Ok(SemanticIndex { sentences, postings, documents: self.documents, doc_count })
    }
}

/// Builds an index from annotated sentences without document metadata.
pub fn build_index(sentences: impl IntoIterator<Item = Sentence>) -> Result<SemanticIndex, IndexError> {
    let mut b = IndexBuilder::new();
    for s in sentences {
        b.add(s);
    }
    b.finish()
}

/// Postings for `key` found by scanning every stored sentence.
pub fn scan_postings(index: &SemanticIndex, key: &IndexKey) -> Vec<Posting> {
    let mut out = Vec::new();
    for (ord, s) in index.sentences().iter().enumerate() {
        let ord = ord as SentenceOrd;
        match key {
            IndexKey::Term(t) => {
                for (i, tok) in s.tokens.iter().enumerate() {
                    if &tok.normalized == t {
                        out.push(Posting { sentence: ord, first: i as u32, last: i as u32 });
                    }
                }
            }
            _ => {
                for a in &s.annotations {
                    if &IndexKey::for_role(&a.role) == key {
                        out.push(Posting { sentence: ord, first: a.first, last: a.last });
                    }
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}
