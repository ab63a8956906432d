//! Ordered-slot sentence queries and prioritized cascades.
//!
//! A query is an ordered list of slots that must match non-overlapping,
//! strictly increasing token ranges of one sentence. Exactly one slot is the
//! motion topic.

mod matcher;
mod parser;
mod retrieve;

use std::fmt;

use crate::annotator::EntityKind;
use crate::corpus::{EvidenceType, SentenceId};

pub use matcher::{assign_slots, match_sentence, slot_occurrences};
pub use parser::{parse_cascades, parse_query, read_cascade_file};
pub use retrieve::{brute_force_retrieve, execute_cascade, retrieve_for_motion, retrieve_query};

pub const DEFAULT_CAP: usize = 12_000;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum QueryError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("query has no TOPIC slot")]
    MissingTopic,
    #[error("query has {0} TOPIC slots, expected exactly one")]
    MultipleTopics(usize),
    #[error("query `{query_id}` uses ACTION but motion `{motion_id}` has no action")]
    MissingAction { query_id: String, motion_id: String },
    #[error("cascade file line {line}: {message}")]
    Cascade { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QuerySlot {
    Topic,
    Action,
    Literal(String),
    Lexicon(String),
    Entity(EntityKind),
}

impl fmt::Display for QuerySlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuerySlot::Topic => f.write_str("TOPIC"),
            QuerySlot::Action => f.write_str("ACTION"),
            QuerySlot::Literal(w) => write!(f, "\"{w}\""),
            QuerySlot::Lexicon(name) => write!(f, "lex({name})"),
            QuerySlot::Entity(kind) => write!(f, "ent({kind})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub query_id: String,
    pub evidence_type: EvidenceType,
    pub slots: Vec<QuerySlot>,
    /// Maximum number of tokens between consecutive matched slots.
    pub max_gap: Option<usize>,
}

impl Query {
    /// Checks the single-topic invariant.
    pub fn validate(&self) -> Result<(), QueryError> {
        match self.slots.iter().filter(|s| **s == QuerySlot::Topic).count() {
            0 => Err(QueryError::MissingTopic),
            1 => Ok(()),
            n => Err(QueryError::MultipleTopics(n)),
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.query_id = id.into();
        self
    }
}

/// Prints the query in the query language; parsing the output yields the
/// same query (modulo `query_id`).
impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.evidence_type)?;
        for s in &self.slots {
            write!(f, " {s}")?;
        }
        if let Some(g) = self.max_gap {
            write!(f, " gap<={g}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cascade {
    pub evidence_type: EvidenceType,
    pub queries: Vec<Query>,
    pub cap: usize,
}

impl Cascade {
    pub fn new(evidence_type: EvidenceType, queries: Vec<Query>, cap: usize) -> Result<Self, QueryError> {
        let bad = |message: String| QueryError::Cascade { line: 0, message };
        if cap == 0 {
            return Err(bad("cap must be positive".into()));
        }
        for q in &queries {
            q.validate()?;
            if q.evidence_type != evidence_type {
                return Err(bad(format!("query `{}` is {} in a {} cascade", q.query_id, q.evidence_type, evidence_type)));
            }
        }
        Ok(Self { evidence_type, queries, cap })
    }
}

/// A sentence retrieved for a motion by one query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub motion_id: String,
    pub sentence: SentenceId,
    pub evidence_type: EvidenceType,
    pub query_id: String,
    /// One inclusive token range per query slot, in slot order.
    pub spans: Vec<(u32, u32)>,
}

/// One cascade per evidence type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeSet {
    pub study: Cascade,
    pub expert: Cascade,
}

impl CascadeSet {
    pub fn from_cascades(cascades: Vec<Cascade>) -> Result<Self, QueryError> {
        let mut study = None;
        let mut expert = None;
        for c in cascades {
            match c.evidence_type {
                EvidenceType::Study => study = Some(c),
                EvidenceType::Expert => expert = Some(c),
            }
        }
        let missing = |t: EvidenceType| QueryError::Cascade { line: 0, message: format!("no {t} cascade defined") };
        Ok(Self {
            study: study.ok_or_else(|| missing(EvidenceType::Study))?,
            expert: expert.ok_or_else(|| missing(EvidenceType::Expert))?,
        })
    }

    pub fn get(&self, t: EvidenceType) -> &Cascade {
        match t {
            EvidenceType::Study => &self.study,
            EvidenceType::Expert => &self.expert,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cascade> {
        [&self.study, &self.expert].into_iter()
    }
}
