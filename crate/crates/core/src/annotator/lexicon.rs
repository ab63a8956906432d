use std::collections::BTreeSet;
use std::path::Path;

use super::{normalize_phrase, resource_error, AnnotationSpan, AnnotatorError, PhraseTable, Role};
use crate::corpus::Sentence;

/// A named set of (possibly multi-word) normalized terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    name: String,
    terms: BTreeSet<Vec<String>>,
    table: PhraseTable<()>,
}

impl Lexicon {
    pub fn new<I, S>(name: impl Into<String>, terms: I) -> Result<Self, AnnotatorError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let name = name.into();
        if name.trim().is_empty() {
            return Err(AnnotatorError::InvalidLexicon("empty lexicon name".into()));
        }
        let mut set = BTreeSet::new();
        for term in terms {
            let toks = normalize_phrase(term.as_ref());
            if toks.is_empty() {
                return Err(AnnotatorError::InvalidLexicon(format!("{name}: empty term")));
            }
            set.insert(toks);
        }
        let mut table = PhraseTable::new();
        for t in &set {
            table.insert(t.clone(), ());
        }
        Ok(Self { name, terms: set, table })
    }

    /// Parses `name=<lexicon name>` followed by one term per line.
    /// Blank lines are skipped.
    pub fn parse(text: &str) -> Result<Self, AnnotatorError> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| AnnotatorError::InvalidLexicon("missing `name=` header".into()))?;
        let name = header
            .trim()
            .strip_prefix("name=")
            .ok_or_else(|| AnnotatorError::InvalidLexicon(format!("bad header `{header}`")))?;
        Self::new(name.trim(), lines.map(str::trim).filter(|l| !l.is_empty()))
    }

    pub fn from_file(path: &Path) -> Result<Self, AnnotatorError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| resource_error(path, e.to_string()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn terms(&self) -> &BTreeSet<Vec<String>> {
        &self.terms
    }

    pub fn contains_token(&self, token: &str) -> bool {
        self.table.get(&[token.to_string()]).is_some()
    }
}

/// Lexicon hits: per lexicon, greedy left-to-right longest matches.
/// Different lexicons may overlap one another.
pub fn tag_lexicons(sentence: &Sentence, lexicons: &[Lexicon]) -> Vec<AnnotationSpan> {
    let toks: Vec<&str> = sentence.normalized_tokens().collect();
    let mut out = Vec::new();
    for lex in lexicons {
        for (first, last, _) in lex.table.greedy_matches(&toks) {
            out.push(AnnotationSpan::new(first, last, Role::LexiconHit(lex.name.clone())));
        }
    }
    out
}
