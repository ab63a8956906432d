use std::collections::HashSet;

use super::matcher::{action_for, assign_slots, match_sentence};
use super::{Candidate, Cascade, CascadeSet, Query, QueryError, QuerySlot};
use crate::corpus::{Motion, Sentence};
use crate::index::{IndexKey, Posting, SemanticIndex};

/// Postings where every token of `phrase` appears at consecutive positions.
fn phrase_postings(index: &SemanticIndex, phrase: &[String]) -> Vec<Posting> {
    let Some((head, rest)) = phrase.split_first() else {
        return Vec::new();
    };
    let tails: Vec<&[Posting]> = rest.iter().map(|t| index.lookup(&IndexKey::Term(t.clone()))).collect();
    if tails.iter().any(|l| l.is_empty()) {
        return Vec::new();
    }
    index
        .lookup(&IndexKey::Term(head.clone()))
        .iter()
        .filter(|p| {
            tails.iter().enumerate().all(|(j, list)| {
                let pos = p.first + 1 + j as u32;
                list.binary_search(&Posting { sentence: p.sentence, first: pos, last: pos }).is_ok()
            })
        })
        .map(|p| Posting { sentence: p.sentence, first: p.first, last: p.first + rest.len() as u32 })
        .collect()
}

fn slot_postings(index: &SemanticIndex, slot: &QuerySlot, motion: &Motion, action: Option<&[String]>) -> Vec<Posting> {
    let mut list = match slot {
        QuerySlot::Topic => {
            let mut l = index.lookup(&IndexKey::Wiki(motion.topic.clone())).to_vec();
            for form in &motion.topic_surface_forms {
                l.extend(phrase_postings(index, form));
            }
            l
        }
        QuerySlot::Action => action.map(|a| phrase_postings(index, a)).unwrap_or_default(),
        QuerySlot::Literal(w) => return index.lookup(&IndexKey::Term(w.clone())).to_vec(),
        QuerySlot::Lexicon(name) => return index.lookup(&IndexKey::Lexicon(name.clone())).to_vec(),
        QuerySlot::Entity(kind) => return index.lookup(&IndexKey::Entity(*kind)).to_vec(),
    };
    list.sort_unstable();
    list.dedup();
    list
}

/// Sentences present in every list, with each list's postings for that
/// sentence. Lists must be sorted; cursors skip ahead by binary search.
fn intersect(lists: &[Vec<Posting>]) -> Vec<Vec<&[Posting]>> {
    let mut out = Vec::new();
    if lists.is_empty() || lists.iter().any(Vec::is_empty) {
        return out;
    }
    let mut cursors = vec![0usize; lists.len()];
    let mut target = lists.iter().map(|l| l[0].sentence).max().unwrap();
    'outer: loop {
        let mut agreed = true;
        for (k, list) in lists.iter().enumerate() {
            let rest = &list[cursors[k]..];
            cursors[k] += rest.partition_point(|p| p.sentence < target);
            match list.get(cursors[k]) {
                None => break 'outer,
                Some(p) if p.sentence > target => {
                    target = p.sentence;
                    agreed = false;
                }
                Some(_) => {}
            }
        }
        if !agreed {
            continue;
        }
        let mut group = Vec::with_capacity(lists.len());
        for (k, list) in lists.iter().enumerate() {
            let rest = &list[cursors[k]..];
            let n = rest.partition_point(|p| p.sentence == target);
            group.push(&rest[..n]);
            cursors[k] += n;
        }
        out.push(group);
        match lists.iter().zip(&cursors).map(|(l, &c)| l.get(c).map(|p| p.sentence)).collect::<Option<Vec<_>>>() {
            Some(next) => target = next.into_iter().max().unwrap(),
            None => break,
        }
    }
    out
}

/// Retrieves every matching sentence through posting-list intersection,
/// in ascending sentence order.
pub fn retrieve_query(index: &SemanticIndex, query: &Query, motion: &Motion) -> Result<Vec<Candidate>, QueryError> {
    let action = action_for(query, motion)?;
    let lists: Vec<Vec<Posting>> =
        query.slots.iter().map(|slot| slot_postings(index, slot, motion, action.as_deref())).collect();

    let mut out = Vec::new();
    for group in intersect(&lists) {
        let occurrences: Vec<Vec<(usize, usize)>> =
            group.iter().map(|ps| ps.iter().map(|p| (p.first as usize, p.last as usize)).collect()).collect();
        if let Some(spans) = assign_slots(&occurrences, query.max_gap) {
            let sentence = index.sentence(group[0][0].sentence);
            out.push(Candidate {
                motion_id: motion.motion_id.clone(),
                sentence: sentence.id.clone(),
                evidence_type: query.evidence_type,
                query_id: query.query_id.clone(),
                spans: spans.into_iter().map(|(a, b)| (a as u32, b as u32)).collect(),
            });
        }
    }
    Ok(out)
}

/// Reference semantics: [`match_sentence`] on every sentence, in ascending
/// sentence order.
pub fn brute_force_retrieve(corpus: &[Sentence], query: &Query, motion: &Motion) -> Result<Vec<Candidate>, QueryError> {
    action_for(query, motion)?;
    let mut out = Vec::new();
    for s in corpus {
        if let Some(c) = match_sentence(query, s, motion)? {
            out.push(c);
        }
    }
    out.sort_by(|a, b| a.sentence.cmp(&b.sentence));
    Ok(out)
}

/// Runs queries in priority order, skipping sentences already retrieved by
/// an earlier query, and stops once `cap` candidates are collected. The
/// query that crosses the cap keeps its lowest sentence ids.
pub fn execute_cascade(index: &SemanticIndex, cascade: &Cascade, motion: &Motion) -> Result<Vec<Candidate>, QueryError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for query in &cascade.queries {
        if out.len() >= cascade.cap {
            break;
        }
        for c in retrieve_query(index, query, motion)? {
            if seen.insert(c.sentence.clone()) {
                out.push(c);
                if out.len() == cascade.cap {
                    break;
                }
            }
        }
    }
    Ok(out)
}

/// Union of the study and expert cascades. A sentence retrieved by both is
/// kept once, attributed to the study query.
pub fn retrieve_for_motion(index: &SemanticIndex, cascades: &CascadeSet, motion: &Motion) -> Result<Vec<Candidate>, QueryError> {
    let mut out = execute_cascade(index, &cascades.study, motion)?;
    let taken: HashSet<_> = out.iter().map(|c| c.sentence.clone()).collect();
    out.extend(execute_cascade(index, &cascades.expert, motion)?.into_iter().filter(|c| !taken.contains(&c.sentence)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotator::{Annotator, Gazetteer, Lexicon, RedirectTable};
    use crate::corpus::{EvidenceType, SentenceId};
    use crate::index::build_index;
    use crate::query::parse_query;

    fn annotator() -> Annotator {
        let study = Lexicon::new("study", ["research", "study", "survey"]).unwrap();
        let sentiment = Lexicon::new("sentiment", ["harm"]).unwrap();
        let redirects = RedirectTable::from_pairs([("gambling", "Gambling"), ("public health", "Public health")]).unwrap();
        Annotator::new(vec![study, sentiment], Gazetteer::default(), redirects)
    }

    fn corpus(texts: &[&str], a: &Annotator) -> Vec<Sentence> {
        texts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut s = Sentence::new(SentenceId::new(format!("d{i:04}"), 0), *t);
                a.annotate(&mut s);
                s
            })
            .collect()
    }

    fn q(text: &str, id: &str) -> Query {
        parse_query(text).unwrap().with_id(id)
    }

    #[test]
    fn empty_index_retrieves_nothing() {
        let a = annotator();
        let m = a.redirects.resolve_motion("m", "x", "gambling", None).unwrap();
        let idx = build_index(Vec::new()).unwrap();
        assert!(retrieve_query(&idx, &q("study: TOPIC", "q"), &m).unwrap().is_empty());
    }

    #[test]
    fn gambling_sentence_retrieved() {
        let a = annotator();
        let m = a.redirects.resolve_motion("m", "x", "gambling", None).unwrap();
        let sents = corpus(&["The University of Glasgow and Healthy Stadia research warns that gambling is a public health issue with potential for harm"], &a);
        let idx = build_index(sents.clone()).unwrap();
        let query = q(r#"study: lex(study) "that" TOPIC lex(sentiment)"#, "q");
        let got = retrieve_query(&idx, &query, &m).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got, brute_force_retrieve(&sents, &query, &m).unwrap());
    }

    #[test]
    fn multiword_surface_form_via_positions() {
        let a = annotator();
        let m = a.redirects.resolve_motion("m", "x", "public health", None).unwrap();
        let sents = corpus(&["health of the public", "a public health study", "public and health"], &a);
        let idx = build_index(sents.clone()).unwrap();
        let query = q("study: TOPIC lex(study)", "q");
        let got = retrieve_query(&idx, &query, &m).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].sentence.doc_id, "d0001");
        assert_eq!(got, brute_force_retrieve(&sents, &query, &m).unwrap());
    }

    fn cascade(queries: Vec<Query>, cap: usize) -> Cascade {
        Cascade::new(EvidenceType::Study, queries, cap).unwrap()
    }

    #[test]
    fn cascade_cap_truncates_first_query() {
        let a = annotator();
        let m = a.redirects.resolve_motion("m", "x", "gambling", None).unwrap();
        let texts: Vec<String> = (0..150).map(|i| format!("gambling item {i}")).collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let idx = build_index(corpus(&refs, &a)).unwrap();
        let c = cascade(vec![q("study: TOPIC", "first"), q(r#"study: TOPIC "item""#, "second")], 100);
        let got = execute_cascade(&idx, &c, &m).unwrap();
        assert_eq!(got.len(), 100);
        assert!(got.iter().all(|c| c.query_id == "first"));
        assert_eq!(got.last().unwrap().sentence.doc_id, "d0099");
    }

    #[test]
    fn cascade_disjoint_queries_concatenate() {
        let a = annotator();
        let m = a.redirects.resolve_motion("m", "x", "gambling", None).unwrap();
        let mut texts: Vec<String> = (0..20).map(|i| format!("gambling survey {i}")).collect();
        texts.extend((0..10).map(|i| format!("research on gambling {i}")));
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let idx = build_index(corpus(&refs, &a)).unwrap();
        let c = cascade(vec![q("study: lex(study) TOPIC", "a"), q("study: TOPIC lex(study)", "b")], 12_000);
        let got = execute_cascade(&idx, &c, &m).unwrap();
        assert_eq!(got.len(), 30);
        assert!(got[..10].iter().all(|c| c.query_id == "a"));
        assert!(got[10..].iter().all(|c| c.query_id == "b"));
    }

    #[test]
    fn cascade_dedups_across_queries() {
        let a = annotator();
        let m = a.redirects.resolve_motion("m", "x", "gambling", None).unwrap();
        let idx = build_index(corpus(&["research shows gambling"], &a)).unwrap();
        let c = cascade(vec![q("study: lex(study) TOPIC", "a"), q("study: TOPIC", "b")], 12_000);
        let got = execute_cascade(&idx, &c, &m).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].query_id, "a");
    }

    #[test]
    fn union_prefers_study() {
        let a = annotator();
        let m = a.redirects.resolve_motion("m", "x", "gambling", None).unwrap();
        let texts = [
            "research gambling 1", "research gambling 2", "research gambling 3", "research gambling 4",
            "research gambling harm", "gambling harm 1", "gambling harm 2", "gambling harm 3", "gambling harm 4",
        ];
        let idx = build_index(corpus(&texts, &a)).unwrap();
        let set = CascadeSet {
            study: cascade(vec![q("study: lex(study) TOPIC", "s")], 12_000),
            expert: Cascade::new(EvidenceType::Expert, vec![q("expert: TOPIC lex(sentiment)", "e")], 12_000).unwrap(),
        };
        let got = retrieve_for_motion(&idx, &set, &m).unwrap();
        assert_eq!(got.len(), 9);
        let both = got.iter().find(|c| c.sentence.doc_id == "d0004").unwrap();
        assert_eq!(both.evidence_type, EvidenceType::Study);
        let unique: HashSet<_> = got.iter().map(|c| &c.sentence).collect();
        assert_eq!(unique.len(), 9);
    }

    #[test]
    fn intersect_groups_by_sentence() {
        let p = |s, f| Posting { sentence: s, first: f, last: f };
        let lists = vec![vec![p(0, 0), p(2, 1), p(2, 3), p(5, 0)], vec![p(1, 0), p(2, 0), p(5, 2), p(6, 0)]];
        let groups = intersect(&lists);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0][0].len(), 2);
        assert_eq!(groups[1][1], &[p(5, 2)]);
    }
}
