use std::collections::BTreeMap;

use crate::annotator::{topic_occurrences, Role};
use crate::corpus::{Motion, Sentence};
use crate::query::Candidate;

/// Lexicon whose hits feed the topic-to-sentiment distance feature.
pub const SENTIMENT_LEXICON: &str = "sentiment";

/// Sparse feature map. Values are always finite.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector(BTreeMap<String, f64>);

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets a feature; non-finite values are ignored.
    pub fn set(&mut self, id: impl Into<String>, value: f64) {
        if value.is_finite() {
            self.0.insert(id.into(), value);
        }
    }

    pub fn add(&mut self, id: impl Into<String>, delta: f64) {
        let e = self.0.entry(id.into()).or_insert(0.0);
        *e += delta;
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.0.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, f64)> for FeatureVector {
    fn from_iter<T: IntoIterator<Item = (String, f64)>>(iter: T) -> Self {
        let mut fv = FeatureVector::new();
        for (k, v) in iter {
            fv.set(k, v);
        }
        fv
    }
}

/// Feature ids never contain whitespace, so they survive the model file.
fn feature_id(prefix: &str, name: &str) -> String {
    let name: String = name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect();
    format!("{prefix}:{name}")
}

fn length_bucket(n: usize) -> &'static str {
    match n {
        0..=10 => "short",
        11..=20 => "medium",
        21..=40 => "long",
        _ => "xlong",
    }
}

/// Deterministic features of a retrieved sentence:
///
/// * `lex:<name>` / `ent:<kind>`: annotation counts
/// * `len:<short|medium|long|xlong>`: token-count bucket (≤10, ≤20, ≤40, more)
/// * `topic_pos:<begin|middle|end|none>`: third of the sentence holding the first topic mention
/// * `query:<id>`: the retrieving query
/// * `topic_sentiment_gap`: fewest tokens between a topic mention and a sentiment hit
pub fn extract_features(candidate: &Candidate, sentence: &Sentence, motion: &Motion) -> FeatureVector {
    let mut fv = FeatureVector::new();
    let n = sentence.tokens.len();

    let mut sentiment = Vec::new();
    for a in &sentence.annotations {
        match &a.role {
            Role::LexiconHit(name) => {
                fv.add(feature_id("lex", name), 1.0);
                if name == SENTIMENT_LEXICON {
                    sentiment.push((a.first as usize, a.last as usize));
                }
            }
            Role::NamedEntity(kind) => fv.add(feature_id("ent", kind.as_str()), 1.0),
            Role::WikiLink(_) => {}
        }
    }

    fv.set(feature_id("len", length_bucket(n)), 1.0);

    let topics = topic_occurrences(sentence, motion);
    let pos = match topics.first() {
        None => "none",
        Some(&(first, _)) if 3 * first < n => "begin",
        Some(&(first, _)) if 3 * first < 2 * n => "middle",
        Some(_) => "end",
    };
    fv.set(feature_id("topic_pos", pos), 1.0);

    if !candidate.query_id.is_empty() {
        fv.set(feature_id("query", &candidate.query_id), 1.0);
    }

    let gap = topics
        .iter()
        .flat_map(|&(tf, tl)| {
            sentiment.iter().map(move |&(sf, sl)| {
                if sf > tl {
                    sf - tl - 1
                } else if tf > sl {
                    tf - sl - 1
                } else {
                    0
                }
            })
        })
        .min();
    if let Some(g) = gap {
        fv.set("topic_sentiment_gap", g as f64);
    }
    fv
}
