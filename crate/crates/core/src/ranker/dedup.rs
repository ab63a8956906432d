use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use super::ScoredCandidate;
use crate::corpus::{Motion, Sentence};
use crate::index::SemanticIndex;

pub const DEFAULT_DEDUP_THRESHOLD: f64 = 0.8;

const BUNDLED_STOP_WORDS: &str = include_str!("../../resources/stopwords.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct StopWords(HashSet<String>);

impl Default for StopWords {
    /// The bundled English list.
    fn default() -> Self {
        Self::parse(BUNDLED_STOP_WORDS)
    }
}

impl StopWords {
    /// One word per line; blank lines skipped; case-folded.
    pub fn parse(text: &str) -> Self {
        Self(text.lines().map(|l| l.trim().to_lowercase()).filter(|l| !l.is_empty()).collect())
    }

    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Normalized word tokens minus stop-words, topic tokens and punctuation.
pub fn content_set(sentence: &Sentence, stop_words: &StopWords, topic_tokens: &BTreeSet<String>) -> BTreeSet<String> {
    sentence
        .tokens
        .iter()
        .filter(|t| !t.is_punct())
        .map(|t| t.normalized.as_str())
        .filter(|w| !stop_words.contains(w) && !topic_tokens.contains(*w))
        .map(String::from)
        .collect()
}

/// `|a ∩ b| / min(|a|, |b|)`, or 0 when either set is empty.
pub fn overlap(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let smaller = a.len().min(b.len());
    if smaller == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / smaller as f64
}

/// Greedy top-down filter: keeps item `i` unless its set overlaps an
/// already-kept set by at least `threshold`. Returns kept indices in order.
pub fn dedup_by_content(sets: &[BTreeSet<String>], threshold: f64) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        if kept.iter().all(|&k| overlap(&sets[k], s) < threshold) {
            kept.push(i);
        }
    }
    kept
}

/// Drops candidates that nearly duplicate a higher-ranked one. `ranked` must
/// be sorted by descending score. Candidates whose sentence is missing from
/// `lookup` are kept.
pub fn dedup_ranked<'s>(
    ranked: Vec<ScoredCandidate>,
    threshold: f64,
    stop_words: &StopWords,
    motion: &Motion,
    lookup: impl Fn(&ScoredCandidate) -> Option<&'s Sentence>,
) -> Vec<ScoredCandidate> {
    let topic = motion.topic_token_set();
    let sets: Vec<BTreeSet<String>> = ranked
        .iter()
        .map(|c| lookup(c).map(|s| content_set(s, stop_words, &topic)).unwrap_or_default())
        .collect();
    let keep: HashSet<usize> = dedup_by_content(&sets, threshold).into_iter().collect();
    ranked.into_iter().enumerate().filter(|(i, _)| keep.contains(i)).map(|(_, c)| c).collect()
}

/// Dedup settings bound to an index and a motion.
pub struct Deduper<'a> {
    pub index: &'a SemanticIndex,
    pub motion: &'a Motion,
    pub stop_words: &'a StopWords,
    pub threshold: f64,
}

impl Deduper<'_> {
    pub fn apply(&self, ranked: Vec<ScoredCandidate>) -> Vec<ScoredCandidate> {
        dedup_ranked(ranked, self.threshold, self.stop_words, self.motion, |c| self.index.get(&c.candidate.sentence))
    }
}
