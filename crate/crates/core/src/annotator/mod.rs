//! Semantic-role annotation layers: lexicon hits, named entities and wiki
//! links, plus topic masking.

mod entities;
mod lexicon;
mod mask;
mod phrases;
mod wikify;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;

pub use entities::{tag_named_entities, Gazetteer, NUMBER_WORDS};
pub use lexicon::{tag_lexicons, Lexicon};
pub use mask::{mask_topic, topic_occurrences, DEFAULT_MASK_TOKEN};
pub(crate) use mask::phrase_occurrences;
pub use phrases::PhraseTable;
pub use wikify::{wikify, RedirectTable};

#[derive(Debug, thiserror::Error)]
pub enum AnnotatorError {
    #[error("{path}: {reason}")]
    Resource { path: String, reason: String },
    #[error("redirect table: `{surface}` maps to both `{first}` and `{second}`")]
    ConflictingRedirect { surface: String, first: String, second: String },
    #[error("topic `{0}` is not a title or redirect in the redirect table")]
    UnknownTopic(String),
    #[error("invalid lexicon: {0}")]
    InvalidLexicon(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    Number,
    Person,
    Organization,
}

impl EntityKind {
    pub const ALL: [EntityKind; 3] = [EntityKind::Number, EntityKind::Person, EntityKind::Organization];

    /// Short name used by the query language and in feature ids.
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Number => "number",
            EntityKind::Person => "person",
            EntityKind::Organization => "org",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "number" => Some(EntityKind::Number),
            "person" => Some(EntityKind::Person),
            "org" | "organization" => Some(EntityKind::Organization),
            _ => None,
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    LexiconHit(String),
    NamedEntity(EntityKind),
    WikiLink(String),
}

/// An annotation over the inclusive token range `first..=last`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnnotationSpan {
    pub first: u32,
    pub last: u32,
    pub role: Role,
}

impl AnnotationSpan {
    pub fn new(first: usize, last: usize, role: Role) -> Self {
        Self { first: first as u32, last: last as u32, role }
    }
}

/// Immutable annotation resources applied to every sentence.
#[derive(Debug, Clone, Default)]
pub struct Annotator {
    pub lexicons: Vec<Lexicon>,
    pub gazetteer: Gazetteer,
    pub redirects: RedirectTable,
}

impl Annotator {
    pub fn new(lexicons: Vec<Lexicon>, gazetteer: Gazetteer, redirects: RedirectTable) -> Self {
        Self { lexicons, gazetteer, redirects }
    }

    pub fn load(
        lexicon_paths: &[impl AsRef<Path>],
        gazetteer_path: Option<&Path>,
        redirects_path: &Path,
    ) -> Result<Self, AnnotatorError> {
        let lexicons = lexicon_paths
            .iter()
            .map(|p| Lexicon::from_file(p.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        let gazetteer = match gazetteer_path {
            Some(p) => Gazetteer::from_file(p)?,
            None => Gazetteer::default(),
        };
        let redirects = RedirectTable::from_file(redirects_path)?;
        Ok(Self { lexicons, gazetteer, redirects })
    }

    /// Replaces the sentence's annotations with all layers, sorted.
    pub fn annotate(&self, sentence: &mut Sentence) {
        let mut spans = tag_lexicons(sentence, &self.lexicons);
        spans.extend(tag_named_entities(sentence, &self.gazetteer));
        spans.extend(wikify(sentence, &self.redirects));
        spans.sort();
        spans.dedup();
        sentence.annotations = spans;
    }
}

pub(crate) fn resource_error(path: &Path, reason: impl Into<String>) -> AnnotatorError {
    AnnotatorError::Resource { path: path.display().to_string(), reason: reason.into() }
}

/// Tokenizes and lowercases a phrase into its normalized token sequence.
pub fn normalize_phrase(text: &str) -> Vec<String> {
    crate::corpus::tokenize(text).into_iter().map(|t| t.normalized).collect()
}
