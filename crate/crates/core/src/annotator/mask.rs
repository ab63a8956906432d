use super::Role;
use crate::corpus::{Motion, Sentence};

pub const DEFAULT_MASK_TOKEN: &str = "[TOPIC]";

/// Every token range (inclusive) where the motion's topic appears: wiki links
/// to the topic title plus every occurrence of a topic surface form.
/// Sorted by `(first, last)` and duplicate-free.
pub fn topic_occurrences(sentence: &Sentence, motion: &Motion) -> Vec<(usize, usize)> {
    let mut occ: Vec<(usize, usize)> = sentence
        .annotations
        .iter()
        .filter(|a| matches!(&a.role, Role::WikiLink(t) if *t == motion.topic))
        .map(|a| (a.first as usize, a.last as usize))
        .collect();
    occ.extend(phrase_occurrences(sentence, &motion.topic_surface_forms));
    occ.sort_unstable();
    occ.dedup();
    occ
}

/// All (possibly overlapping) occurrences of any phrase among the
/// sentence's normalized tokens.
pub(crate) fn phrase_occurrences(sentence: &Sentence, phrases: &[Vec<String>]) -> Vec<(usize, usize)> {
    let toks: Vec<&str> = sentence.normalized_tokens().collect();
    let mut out = Vec::new();
    for phrase in phrases.iter().filter(|p| !p.is_empty()) {
        if phrase.len() > toks.len() {
            continue;
        }
        for start in 0..=toks.len() - phrase.len() {
            if phrase.iter().zip(&toks[start..]).all(|(p, t)| p == t) {
                out.push((start, start + phrase.len() - 1));
            }
        }
    }
    out
}

/// Replaces every topic occurrence with `mask_token`.
///
/// Overlapping occurrences merge into one replacement. Whitespace runs next
/// to a replacement collapse to a single space.
pub fn mask_topic(sentence: &Sentence, motion: &Motion, mask_token: &str) -> String {
    let mut ranges: Vec<(usize, usize)> = Vec::new();
    for (first, last) in topic_occurrences(sentence, motion) {
        match ranges.last_mut() {
            Some((_, end)) if first <= *end => *end = (*end).max(last),
            _ => ranges.push((first, last)),
        }
    }
    if ranges.is_empty() {
        return sentence.text.clone();
    }

    let chars: Vec<char> = sentence.text.chars().collect();
    let mut out = String::with_capacity(sentence.text.len());
    let mut pos = 0;
    for (first, last) in ranges {
        let (start, end) = sentence.char_span(first, last);
        let gap: String = chars[pos..start].iter().collect();
        push_gap(&mut out, &gap, pos > 0, true);
        out.push_str(mask_token);
        pos = end;
    }
    let tail: String = chars[pos..].iter().collect();
    push_gap(&mut out, &tail, true, false);
    out
}

/// Emits text between replacements, squeezing whitespace that touches a mask.
fn push_gap(out: &mut String, gap: &str, after_mask: bool, before_mask: bool) {
    let mut s = gap;
    let mut lead = false;
    let mut trail = false;
    if after_mask && s.starts_with(char::is_whitespace) {
        s = s.trim_start();
        lead = true;
    }
    if before_mask && s.ends_with(char::is_whitespace) {
        s = s.trim_end();
        trail = true;
    }
    if lead {
        out.push(' ');
    }
    out.push_str(s);
    if trail && !s.is_empty() {
        out.push(' ');
    }
}
