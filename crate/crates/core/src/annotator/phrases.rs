use std::collections::HashMap;

/// Normalized token sequences mapped to a payload, with longest-match lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseTable<V> {
    entries: HashMap<Vec<String>, V>,
    max_len: usize,
}

impl<V> Default for PhraseTable<V> {
    fn default() -> Self {
        Self { entries: HashMap::new(), max_len: 0 }
    }
}

impl<V> PhraseTable<V> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a phrase, returning the previous payload. Empty phrases are ignored.
    pub fn insert(&mut self, phrase: Vec<String>, value: V) -> Option<V> {
        if phrase.is_empty() {
            return None;
        }
        self.max_len = self.max_len.max(phrase.len());
        self.entries.insert(phrase, value)
    }

    pub fn get(&self, phrase: &[String]) -> Option<&V> {
        self.entries.get(phrase)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<String>, &V)> {
        self.entries.iter()
    }

    /// Longest phrase starting at `start`, as `(length, payload)`.
    pub fn longest_at(&self, tokens: &[&str], start: usize) -> Option<(usize, &V)> {
        let avail = tokens.len().saturating_sub(start).min(self.max_len);
        let mut key: Vec<String> = tokens[start..start + avail].iter().map(|s| s.to_string()).collect();
        for len in (1..=avail).rev() {
            key.truncate(len);
            if let Some(v) = self.entries.get(&key) {
                return Some((len, v));
            }
        }
        None
    }

    /// Greedy left-to-right longest matches; matched tokens are consumed.
    /// Yields `(first, last, payload)` with `last` inclusive.
    pub fn greedy_matches<'a>(&'a self, tokens: &[&str]) -> Vec<(usize, usize, &'a V)> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            match self.longest_at(tokens, i) {
                Some((len, v)) => {
                    out.push((i, i + len - 1, v));
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }
}
