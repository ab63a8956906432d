use std::path::Path;

use super::{normalize_phrase, resource_error, AnnotationSpan, AnnotatorError, PhraseTable, Role};
use crate::corpus::{Motion, Sentence};

/// Normalized surface form → canonical wiki title.
///
/// Every canonical title is also a key mapping to itself.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RedirectTable {
    table: PhraseTable<String>,
}

impl RedirectTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `surface → canonical` along with the canonical self-mapping.
    pub fn insert(&mut self, surface: &str, canonical: &str) -> Result<(), AnnotatorError> {
        let canonical = canonical.trim();
        if canonical.is_empty() || normalize_phrase(surface).is_empty() {
            return Err(AnnotatorError::InvalidLexicon(format!("empty redirect entry `{surface}`→`{canonical}`")));
        }
        for key in [normalize_phrase(canonical), normalize_phrase(surface)] {
            if let Some(prev) = self.table.get(&key) {
                if prev != canonical {
                    return Err(AnnotatorError::ConflictingRedirect {
                        surface: key.join(" "),
                        first: prev.clone(),
                        second: canonical.to_string(),
                    });
                }
            } else {
                self.table.insert(key, canonical.to_string());
            }
        }
        Ok(())
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, AnnotatorError> {
        let mut t = Self::new();
        for (surface, canonical) in pairs {
            t.insert(surface, canonical)?;
        }
        Ok(t)
    }

    /// Parses `surface<TAB>canonical` lines; blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, AnnotatorError> {
        let mut t = Self::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (surface, canonical) = line
                .split_once('\t')
                .ok_or_else(|| AnnotatorError::InvalidLexicon(format!("line {}: expected `surface<TAB>canonical`", n + 1)))?;
            t.insert(surface, canonical)?;
        }
        Ok(t)
    }

    pub fn from_file(path: &Path) -> Result<Self, AnnotatorError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| resource_error(path, e.to_string()))
    }

    /// Canonical title for a surface string, if known.
    pub fn canonical(&self, surface: &str) -> Option<&str> {
        self.table.get(&normalize_phrase(surface)).map(String::as_str)
    }

    /// All normalized surface forms of `title`, sorted.
    pub fn surface_forms(&self, title: &str) -> Vec<Vec<String>> {
        let mut forms: Vec<Vec<String>> =
            self.table.iter().filter(|(_, v)| v.as_str() == title).map(|(k, _)| k.clone()).collect();
        forms.sort();
        forms
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Builds a [`Motion`], resolving `topic` through the table.
    pub fn resolve_motion(
        &self,
        motion_id: &str,
        text: &str,
        topic: &str,
        action: Option<&str>,
    ) -> Result<Motion, AnnotatorError> {
        let canonical = self.canonical(topic).ok_or_else(|| AnnotatorError::UnknownTopic(topic.to_string()))?;
        Ok(Motion {
            motion_id: motion_id.to_string(),
            text: text.to_string(),
            topic: canonical.to_string(),
            action: action.map(str::trim).filter(|a| !a.is_empty()).map(String::from),
            topic_surface_forms: self.surface_forms(canonical),
        })
    }

    pub(crate) fn phrases(&self) -> &PhraseTable<String> {
        &self.table
    }
}

/// Greedy left-to-right longest-match wiki linking. Matched tokens are
/// consumed, so links never overlap.
pub fn wikify(sentence: &Sentence, table: &RedirectTable) -> Vec<AnnotationSpan> {
    let toks: Vec<&str> = sentence.normalized_tokens().collect();
    table
        .phrases()
        .greedy_matches(&toks)
        .into_iter()
        .map(|(first, last, title)| AnnotationSpan::new(first, last, Role::WikiLink(title.clone())))
        .collect()
}
