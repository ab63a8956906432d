//! Sentence-level evidence retrieval.
//!
//! The pipeline ingests a corpus, annotates sentences with semantic roles,
//! indexes them positionally, retrieves topic-anchored candidates through
//! prioritized query cascades, ranks them with a pluggable scorer and grows a
//! labeled dataset by repeatedly labeling the current top predictions.

pub mod annotator;
pub mod config;
pub mod corpus;
pub mod eval;
pub mod index;
pub mod labeling;
pub mod pipeline;
pub mod query;
pub mod ranker;
