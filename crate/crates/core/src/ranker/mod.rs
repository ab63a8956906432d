//! Candidate scoring, near-duplicate removal and ranking.

mod dedup;
mod external;
mod features;
mod logistic;

use std::cmp::Ordering;

use crate::query::Candidate;

pub use dedup::{content_set, dedup_by_content, dedup_ranked, overlap, Deduper, StopWords, DEFAULT_DEDUP_THRESHOLD};
pub use external::{ExternalScorer, ExternalSpec, InputVariant, PROTOCOL_NAME, PROTOCOL_VERSION};
pub use features::{extract_features, FeatureVector, SENTIMENT_LEXICON};
pub use logistic::{
    logistic_score, objective, objective_gradient, sigmoid, train_logistic, train_logistic_with_history, LogisticModel,
    TrainConfig,
};

pub const DEFAULT_BINARIZE_THRESHOLD: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum RankError {
    #[error("scorer protocol violation{}: {message}", id.as_ref().map(|i| format!(" at record `{i}`")).unwrap_or_default())]
    Protocol { id: Option<String>, message: String },
    #[error("scorer timed out{}", id.as_ref().map(|i| format!(" waiting for record `{i}`")).unwrap_or_default())]
    Timeout { id: Option<String> },
    #[error("scorer returned invalid score {score} for record `{id}`")]
    InvalidScore { id: String, score: f64 },
    #[error("cannot start scorer `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("training data is empty")]
    EmptyTrainingData,
    #[error("model file line {line}: {message}")]
    ModelFile { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Everything a scorer may look at for one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringRequest {
    pub id: String,
    pub motion_text: String,
    pub sentence: String,
    pub masked: String,
    pub features: FeatureVector,
}

pub trait Scorer {
    fn name(&self) -> &str;

    /// One score per request, in request order.
    fn score_batch(&mut self, batch: &[ScoringRequest]) -> Result<Vec<f64>, RankError>;
}

/// In-process logistic scorer over [`ScoringRequest::features`].
#[derive(Debug, Clone)]
pub struct BuiltinScorer {
    pub model: LogisticModel,
}

impl Scorer for BuiltinScorer {
    fn name(&self) -> &str {
        "builtin-logistic"
    }

    fn score_batch(&mut self, batch: &[ScoringRequest]) -> Result<Vec<f64>, RankError> {
        Ok(batch.iter().map(|r| logistic_score(&self.model, &r.features)).collect())
    }
}

#[derive(Debug, Clone)]
pub enum ScorerSpec {
    Builtin(LogisticModel),
    External(ExternalSpec),
}

impl ScorerSpec {
    pub fn connect(&self) -> Result<Box<dyn Scorer>, RankError> {
        Ok(match self {
            ScorerSpec::Builtin(model) => Box::new(BuiltinScorer { model: model.clone() }),
            ScorerSpec::External(spec) => Box::new(ExternalScorer::spawn(spec)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub candidate: Candidate,
    pub score: f64,
}

/// Scores candidates, keeping their order. Scores outside `[0, 1]` or
/// non-finite scores fail the whole batch.
pub fn score_batch(
    scorer: &mut dyn Scorer,
    candidates: &[Candidate],
    requests: &[ScoringRequest],
) -> Result<Vec<ScoredCandidate>, RankError> {
    assert_eq!(candidates.len(), requests.len(), "one request per candidate");
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let scores = scorer.score_batch(requests)?;
    if scores.len() != requests.len() {
        return Err(RankError::Protocol {
            id: None,
            message: format!("expected {} scores, got {}", requests.len(), scores.len()),
        });
    }
    candidates
        .iter()
        .zip(requests)
        .zip(scores)
        .map(|((c, r), score)| {
            if score.is_finite() && (0.0..=1.0).contains(&score) {
                Ok(ScoredCandidate { candidate: c.clone(), score })
            } else {
                Err(RankError::InvalidScore { id: r.id.clone(), score })
            }
        })
        .collect()
}

/// Descending score; ties by ascending sentence id, then query id.
pub fn rank_order(a: &ScoredCandidate, b: &ScoredCandidate) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.candidate.sentence.cmp(&b.candidate.sentence))
        .then_with(|| a.candidate.query_id.cmp(&b.candidate.query_id))
}

/// Scores, sorts and optionally removes near-duplicates.
pub fn rank(
    candidates: &[Candidate],
    requests: &[ScoringRequest],
    scorer: &mut dyn Scorer,
    dedup: Option<&Deduper<'_>>,
) -> Result<Vec<ScoredCandidate>, RankError> {
    let mut scored = score_batch(scorer, candidates, requests)?;
    scored.sort_by(rank_order);
    Ok(match dedup {
        Some(d) => d.apply(scored),
        None => scored,
    })
}

/// Positive iff `score >= threshold`.
pub fn binarize(scored: &[ScoredCandidate], threshold: f64) -> Vec<(Candidate, bool)> {
    scored.iter().map(|s| (s.candidate.clone(), s.score >= threshold)).collect()
}
