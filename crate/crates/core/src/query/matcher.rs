use std::collections::HashSet;

use super::{Candidate, Query, QueryError, QuerySlot};
use crate::annotator::{phrase_occurrences, topic_occurrences, Role};
use crate::corpus::{Motion, Sentence};

/// Token ranges in `sentence` where `slot` can match, sorted and unique.
pub fn slot_occurrences(
    slot: &QuerySlot,
    sentence: &Sentence,
    motion: &Motion,
    action: Option<&[String]>,
) -> Vec<(usize, usize)> {
    let mut occ: Vec<(usize, usize)> = match slot {
        QuerySlot::Topic => return topic_occurrences(sentence, motion),
        QuerySlot::Action => match action {
            Some(a) => phrase_occurrences(sentence, std::slice::from_ref(&a.to_vec())),
            None => Vec::new(),
        },
        QuerySlot::Literal(w) => {
            sentence.tokens.iter().enumerate().filter(|(_, t)| &t.normalized == w).map(|(i, _)| (i, i)).collect()
        }
        QuerySlot::Lexicon(name) => sentence
            .annotations
            .iter()
            .filter(|a| matches!(&a.role, Role::LexiconHit(n) if n == name))
            .map(|a| (a.first as usize, a.last as usize))
            .collect(),
        QuerySlot::Entity(kind) => sentence
            .annotations
            .iter()
            .filter(|a| a.role == Role::NamedEntity(*kind))
            .map(|a| (a.first as usize, a.last as usize))
            .collect(),
    };
    occ.sort_unstable();
    occ.dedup();
    occ
}

/// Canonical slot assignment: the lexicographically smallest sequence of
/// occurrences (by start, then end) that is strictly increasing,
/// non-overlapping and within `max_gap`. Each slot's occurrences must be
/// sorted.
///
/// Depth-first search in leftmost order with failure memoization on
/// `(slot, previous end)`, so the cost is polynomial in the occurrence count.
pub fn assign_slots(occurrences: &[Vec<(usize, usize)>], max_gap: Option<usize>) -> Option<Vec<(usize, usize)>> {
    if occurrences.is_empty() || occurrences.iter().any(Vec::is_empty) {
        return None;
    }
    let mut chosen = Vec::with_capacity(occurrences.len());
    let mut failed = HashSet::new();
    if search(occurrences, max_gap, 0, None, &mut chosen, &mut failed) {
        Some(chosen)
    } else {
        None
    }
}

fn search(
    occ: &[Vec<(usize, usize)>],
    max_gap: Option<usize>,
    slot: usize,
    prev_end: Option<usize>,
    chosen: &mut Vec<(usize, usize)>,
    failed: &mut HashSet<(usize, Option<usize>)>,
) -> bool {
    if slot == occ.len() {
        return true;
    }
    if failed.contains(&(slot, prev_end)) {
        return false;
    }
    let from = match prev_end {
        Some(e) => occ[slot].partition_point(|&(s, _)| s <= e),
        None => 0,
    };
    for &(start, end) in &occ[slot][from..] {
        if let (Some(gap), Some(prev)) = (max_gap, prev_end) {
            if start - prev - 1 > gap {
                break;
            }
        }
        chosen.push((start, end));
        if search(occ, max_gap, slot + 1, Some(end), chosen, failed) {
            return true;
        }
        chosen.pop();
    }
    failed.insert((slot, prev_end));
    false
}

/// Matches one sentence directly against its own tokens and annotations.
pub fn match_sentence(query: &Query, sentence: &Sentence, motion: &Motion) -> Result<Option<Candidate>, QueryError> {
    let action = action_for(query, motion)?;
    let occurrences: Vec<Vec<(usize, usize)>> =
        query.slots.iter().map(|slot| slot_occurrences(slot, sentence, motion, action.as_deref())).collect();
    Ok(assign_slots(&occurrences, query.max_gap).map(|spans| Candidate {
        motion_id: motion.motion_id.clone(),
        sentence: sentence.id.clone(),
        evidence_type: query.evidence_type,
        query_id: query.query_id.clone(),
        spans: spans.into_iter().map(|(a, b)| (a as u32, b as u32)).collect(),
    }))
}

/// Action tokens when the query has an ACTION slot; errors if the motion has none.
pub(crate) fn action_for(query: &Query, motion: &Motion) -> Result<Option<Vec<String>>, QueryError> {
    if !query.slots.contains(&QuerySlot::Action) {
        return Ok(None);
    }
    match motion.action_tokens() {
        Some(a) => Ok(Some(a)),
        None => Err(QueryError::MissingAction { query_id: query.query_id.clone(), motion_id: motion.motion_id.clone() }),
    }
}
