use std::path::Path;

use super::{normalize_phrase, resource_error, AnnotationSpan, AnnotatorError, EntityKind, PhraseTable, Role};
use crate::corpus::Sentence;

pub const NUMBER_WORDS: &[&str] = &[
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
    "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety", "hundred",
    "thousand", "million", "billion", "trillion", "dozen",
];

/// Person and organization name lists.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gazetteer {
    persons: PhraseTable<()>,
    organizations: PhraseTable<()>,
}

impl Gazetteer {
    pub fn insert(&mut self, kind: EntityKind, name: &str) {
        let table = match kind {
            EntityKind::Person => &mut self.persons,
            EntityKind::Organization => &mut self.organizations,
            EntityKind::Number => return,
        };
        table.insert(normalize_phrase(name), ());
    }

    /// Parses `kind<TAB>name` lines, kind being `person` or `org`.
    /// Blank lines and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut g = Gazetteer::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (kind, name) = line.split_once('\t').ok_or_else(|| format!("line {}: expected `kind<TAB>name`", n + 1))?;
            let kind = match EntityKind::parse(kind.trim()) {
                Some(k @ (EntityKind::Person | EntityKind::Organization)) => k,
                _ => return Err(format!("line {}: unknown entity kind `{kind}`", n + 1)),
            };
            if name.trim().is_empty() {
                return Err(format!("line {}: empty name", n + 1));
            }
            g.insert(kind, name);
        }
        Ok(g)
    }

    pub fn from_file(path: &Path) -> Result<Self, AnnotatorError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| resource_error(path, e))
    }
}

fn is_numeric_token(tok: &str) -> bool {
    tok.starts_with(|c: char| c.is_ascii_digit()) && tok.chars().all(|c| c.is_ascii_digit() || c == '.' || c == ',')
}

/// Numbers by pattern; persons and organizations by gazetteer longest match.
///
/// A number span is a maximal run of digit tokens and number words, extended
/// by a trailing `%` or `percent`.
pub fn tag_named_entities(sentence: &Sentence, gazetteer: &Gazetteer) -> Vec<AnnotationSpan> {
    let toks: Vec<&str> = sentence.normalized_tokens().collect();
    let mut out = Vec::new();

    let mut i = 0;
    while i < toks.len() {
        let is_num = |t: &str| is_numeric_token(t) || NUMBER_WORDS.contains(&t);
        if is_num(toks[i]) {
            let start = i;
            while i + 1 < toks.len() && is_num(toks[i + 1]) {
                i += 1;
            }
            if i + 1 < toks.len() && (toks[i + 1] == "%" || toks[i + 1] == "percent") {
                i += 1;
            }
            out.push(AnnotationSpan::new(start, i, Role::NamedEntity(EntityKind::Number)));
        }
        i += 1;
    }

    for (kind, table) in [(EntityKind::Person, &gazetteer.persons), (EntityKind::Organization, &gazetteer.organizations)] {
        for (first, last, _) in table.greedy_matches(&toks) {
            out.push(AnnotationSpan::new(first, last, Role::NamedEntity(kind)));
        }
    }
    out
}
