//! Shared generators for integration tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use evidencer::annotator::{Annotator, EntityKind, Gazetteer, Lexicon, RedirectTable};
use evidencer::corpus::{EvidenceType, Motion, Sentence, SentenceId};
use evidencer::index::{build_index, SemanticIndex};
use evidencer::labeling::Label;
use evidencer::query::{Query, QuerySlot};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const FILLER: &[&str] = &[
    "the", "a", "of", "and", "in", "to", "children", "rates", "people", "said", "found", "increase", "risk", "players",
    "data", "new", "more", "young", "adults", "time", "links", "shows", "policy", "ban", "banning", "games",
];
pub const STUDY: &[&str] = &["study", "research", "survey", "researchers", "evidence"];
pub const EXPERT: &[&str] = &["professor", "expert", "according", "director"];
pub const SENTIMENT: &[&str] = &["harm", "violence", "aggressive", "benefit"];
pub const TOPIC_FORMS: &[&str] = &["video games", "video game", "gaming", "gambling", "betting"];
pub const NUMBERS: &[&str] = &["three", "42", "1,000", "twenty", "7.5"];
pub const PERSONS: &[&str] = &["john smith", "mary jones"];
pub const ORGS: &[&str] = &["world health organization", "oxford university"];
pub const LEXICONS: &[&str] = &["study", "expert", "sentiment"];

pub fn annotator() -> Annotator {
    let lexicons = vec![
        Lexicon::new("study", STUDY.iter().copied()).unwrap(),
        Lexicon::new("expert", EXPERT.iter().copied()).unwrap(),
        Lexicon::new("sentiment", SENTIMENT.iter().copied()).unwrap(),
    ];
    let mut gazetteer = Gazetteer::default();
    for p in PERSONS {
        gazetteer.insert(EntityKind::Person, p);
    }
    for o in ORGS {
        gazetteer.insert(EntityKind::Organization, o);
    }
    let redirects = RedirectTable::from_pairs([
        ("video game", "Video game"),
        ("video games", "Video game"),
        ("gaming", "Video game"),
        ("gambling", "Gambling"),
        ("betting", "Gambling"),
    ])
    .unwrap();
    Annotator::new(lexicons, gazetteer, redirects)
}

/// Video games (with the action "ban") and gambling (no action).
pub fn motions(a: &Annotator) -> Vec<Motion> {
    vec![
        a.redirects.resolve_motion("m1", "We should ban violent video games", "video games", Some("ban")).unwrap(),
        a.redirects.resolve_motion("m2", "Gambling does more harm than good", "gambling", None).unwrap(),
    ]
}

fn random_word(rng: &mut impl Rng) -> &'static str {
    let pool: &[&str] = match rng.random_range(0..20) {
        0..=9 => FILLER,
        10..=11 => STUDY,
        12 => EXPERT,
        13 => SENTIMENT,
        14..=16 => TOPIC_FORMS,
        17 => NUMBERS,
        18 => PERSONS,
        _ => ORGS,
    };
    pool.choose(rng).unwrap()
}

pub fn random_text(rng: &mut impl Rng, max_words: usize) -> String {
    let n = rng.random_range(1..=max_words);
    let words: Vec<&str> = (0..n).map(|_| random_word(rng)).collect();
    format!("{}.", words.join(" "))
}

/// Annotated sentences spread over a handful of documents.
pub fn random_corpus(rng: &mut impl Rng, a: &Annotator, n: usize) -> Vec<Sentence> {
    let docs = (n / 8).max(1);
    let mut per_doc = vec![0u32; docs];
    (0..n)
        .map(|_| {
            let d = rng.random_range(0..docs);
            let id = SentenceId::new(format!("doc{d:03}"), per_doc[d]);
            per_doc[d] += 1;
            let mut s = Sentence::new(id, random_text(rng, 18));
            a.annotate(&mut s);
            s
        })
        .collect()
}

pub fn random_index(rng: &mut impl Rng, a: &Annotator, n: usize) -> (Vec<Sentence>, SemanticIndex) {
    let corpus = random_corpus(rng, a, n);
    let index = build_index(corpus.clone()).unwrap();
    (corpus, index)
}

fn random_slot(rng: &mut impl Rng, with_action: bool) -> QuerySlot {
    match rng.random_range(0..6) {
        0 if with_action => QuerySlot::Action,
        0 | 1 => QuerySlot::Literal(FILLER.choose(rng).unwrap().to_string()),
        2 | 3 => QuerySlot::Lexicon(LEXICONS.choose(rng).unwrap().to_string()),
        4 => QuerySlot::Literal(STUDY.choose(rng).unwrap().to_string()),
        _ => QuerySlot::Entity(*EntityKind::ALL.choose(rng).unwrap()),
    }
}

/// One to four slots, exactly one of them TOPIC.
pub fn random_query(rng: &mut impl Rng, id: &str, with_action: bool) -> Query {
    let n = rng.random_range(1..=4);
    let topic_at = rng.random_range(0..n);
    let slots = (0..n).map(|i| if i == topic_at { QuerySlot::Topic } else { random_slot(rng, with_action) }).collect();
    let max_gap = if rng.random_bool(0.5) { Some(rng.random_range(0..6)) } else { None };
    let evidence_type = *EvidenceType::ALL.choose(rng).unwrap();
    Query { query_id: id.to_string(), evidence_type, slots, max_gap }
}

pub fn sample_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample").canonicalize().expect("sample data present")
}

pub fn sample_config(dir: &Path) -> PathBuf {
    sample_config_with(dir, |_| {})
}

/// Writes a copy of the sample config with absolute input paths and
/// outputs under `dir/out`, after applying `edit`. Returns the config path.
pub fn sample_config_with(dir: &Path, edit: impl FnOnce(&mut toml::Table)) -> PathBuf {
    let text = std::fs::read_to_string(sample_dir().join("config.toml")).unwrap();
    let sample = sample_dir();
    let out = dir.join("out");
    let mut doc: toml::Table = text.parse().unwrap();
    let paths = doc["paths"].as_table_mut().unwrap();
    for (key, value) in paths.iter_mut() {
        let abs = |v: &str| {
            if key == "index" || key == "out" {
                dir.join(v).display().to_string()
            } else {
                sample.join(v).display().to_string()
            }
        };
        let new = match &*value {
            toml::Value::String(s) => toml::Value::String(abs(s)),
            toml::Value::Array(items) => {
                toml::Value::Array(items.iter().map(|i| toml::Value::String(abs(i.as_str().unwrap()))).collect())
            }
            other => other.clone(),
        };
        *value = new;
    }
    paths.insert("out".into(), toml::Value::String(out.display().to_string()));
    edit(&mut doc);
    let path = dir.join("config.toml");
    std::fs::write(&path, toml::to_string(&doc).unwrap()).unwrap();
    path
}

/// `(a, b, κ numerator, κ denominator)`, κ from `(pₒ − pₑ)/(1 − pₑ)` in
/// exact rational arithmetic; 1 when pₑ = 1 and all agree, else 0.
pub const KAPPA: &[(&str, &str, i64, i64)] = &[
    ("1", "1", 1, 1),
    ("1", "0", 0, 1),
    ("10", "10", 1, 1),
    ("10", "01", -1, 1),
    ("1100", "1010", 0, 1),
    ("111000", "110100", 1, 3),
    ("1111", "1110", 0, 1),
    ("101010", "101010", 1, 1),
    ("11110000", "00001111", -1, 1),
    ("1110", "0111", -1, 3),
    ("1000000000", "0100000000", -1, 9),
    ("1111111110", "1111111101", -1, 9),
    ("110110", "110011", 1, 4),
    ("0000", "0000", 1, 1),
    ("0000", "0001", 0, 1),
    ("010110111011", "001001011100", -8, 19),
    ("1110111101", "0000011101", 2, 7),
    ("00110011011111", "00100000010100", 5, 19),
    ("10111110", "01110101", -3, 7),
    ("01001101", "00000000", 0, 1),
];

pub fn labels(s: &str) -> Vec<Label> {
    s.chars().map(|c| (c == '1').into()).collect()
}
