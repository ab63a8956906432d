//! Crowd-label aggregation and the retrospective-labeling loop.

mod agreement;
mod aggregate;
mod io;
mod retro;
mod source;

use std::fmt;
use std::str::FromStr;

use crate::corpus::SentenceId;
use crate::ranker::RankError;

pub use agreement::{cohen_kappa, filter_annotators, weighted_overall_kappa, AnnotatorReport, FilterConfig, FilterOutcome};
pub use aggregate::{aggregate_labels, AggregatedLabel, Aggregation, DEFAULT_MIN_TRUSTED};
pub use io::{
    read_label_records, read_needs_labels, read_snapshot, write_label_records, write_needs_labels, write_snapshot,
};
pub use retro::{retrospective_iteration, run_loop, IterationOutcome, LoopConfig, LoopOutcome, PoolItem, DEFAULT_K};
pub use source::{AnnotationSource, AnnotatorProfile, FileSource, OracleAnnotators};

#[derive(Debug, thiserror::Error)]
pub enum LabelError {
    #[error("kappa needs equally long, non-empty label lists (got {a} and {b})")]
    KappaInput { a: usize, b: usize },
    #[error("no qualifying annotator pairs among trusted annotators")]
    NoQualifyingPairs,
    #[error("annotator `{annotator}` noise rate {noise} outside [0, 0.5)")]
    InvalidNoise { annotator: String, noise: f64 },
    #[error("no ground truth for pair {0}")]
    UnknownPair(PairKey),
    #[error("k must be positive")]
    ZeroK,
    #[error("iterations must be at least 1")]
    ZeroIterations,
    #[error("{path} line {line}: {message}")]
    Malformed { path: String, line: usize, message: String },
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "pos",
            Label::Negative => "neg",
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl From<bool> for Label {
    fn from(b: bool) -> Self {
        if b {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pos" => Ok(Label::Positive),
            "neg" => Ok(Label::Negative),
            other => Err(format!("label must be `pos` or `neg`, got `{other}`")),
        }
    }
}

/// A (motion, sentence) pair: the unit that receives a gold label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairKey {
    pub motion_id: String,
    pub sentence: SentenceId,
}

impl PairKey {
    pub fn new(motion_id: impl Into<String>, sentence: SentenceId) -> Self {
        Self { motion_id: motion_id.into(), sentence }
    }
}

impl fmt::Display for PairKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.motion_id, self.sentence)
    }
}

/// One annotator's judgment of one pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRecord {
    pub motion_id: String,
    pub sentence: SentenceId,
    pub annotator_id: String,
    pub label: Label,
}

impl LabelRecord {
    pub fn new(pair: &PairKey, annotator_id: impl Into<String>, label: Label) -> Self {
        Self { motion_id: pair.motion_id.clone(), sentence: pair.sentence.clone(), annotator_id: annotator_id.into(), label }
    }

    pub fn pair(&self) -> PairKey {
        PairKey::new(self.motion_id.clone(), self.sentence.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldPair {
    pub pair: PairKey,
    pub gold: Label,
    /// Iteration in which the pair was labeled.
    pub iteration: usize,
}

/// The accumulated labeled dataset after some iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetSnapshot {
    pub iteration: usize,
    pub pairs: Vec<GoldPair>,
    pub positive_fraction: f64,
}

impl DatasetSnapshot {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_pairs(iteration: usize, pairs: Vec<GoldPair>) -> Self {
        let positive_fraction = positive_fraction(pairs.iter().map(|p| p.gold));
        Self { iteration, pairs, positive_fraction }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, pair: &PairKey) -> bool {
        self.pairs.iter().any(|p| &p.pair == pair)
    }

    /// Pairs labeled in the given iteration.
    pub fn added_in(&self, iteration: usize) -> impl Iterator<Item = &GoldPair> {
        self.pairs.iter().filter(move |p| p.iteration == iteration)
    }
}

/// Positives over total; 0 for an empty input.
pub fn positive_fraction(labels: impl IntoIterator<Item = Label>) -> f64 {
    let (mut pos, mut n) = (0usize, 0usize);
    for l in labels {
        n += 1;
        pos += l.is_positive() as usize;
    }
    if n == 0 {
        0.0
    } else {
        pos as f64 / n as f64
    }
}
