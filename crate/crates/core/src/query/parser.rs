//! Query language.
//!
//! ```text
//! query   := evidence ":" slot+ [ "gap<=" N ]
//! evidence:= "study" | "expert"
//! slot    := "TOPIC" | "ACTION" | '"' word '"' | "lex(" name ")" | "ent(" kind ")"
//! kind    := "number" | "person" | "org"
//! ```
//!
//! Cascade files hold `cascade <evidence> cap=<N>` headers, each followed by
//! its query lines in priority order. Blank lines and `#` comments are
//! ignored. Queries are named `<evidence>-<n>`, counting from 1 within their
//! cascade.

use std::path::Path;

use super::{Cascade, Query, QueryError, QuerySlot};
use crate::annotator::{normalize_phrase, EntityKind};
use crate::corpus::EvidenceType;

struct Cursor {
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn new(src: &str) -> Self {
        Self { chars: src.chars().collect(), pos: 0 }
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, QueryError> {
        Err(QueryError::Syntax { column: self.pos + 1, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, s: &str) -> bool {
        let n = s.chars().count();
        if self.chars.len() >= self.pos + n && self.chars[self.pos..self.pos + n].iter().copied().eq(s.chars()) {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> String {
        let start = self.pos;
        while self.peek().is_some_and(&f) {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    /// Reads up to (and consumes) `close`.
    fn until(&mut self, close: char) -> Result<String, QueryError> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == close {
                let s = self.chars[start..self.pos].iter().collect();
                self.pos += 1;
                return Ok(s);
            }
            self.pos += 1;
        }
        self.pos = start;
        self.err(format!("missing closing `{close}`"))
    }
}

/// Parses one query line. The resulting query id is empty.
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let mut c = Cursor::new(text);
    c.skip_ws();
    let ev = c.take_while(|ch| ch.is_alphabetic());
    let evidence_type = match ev.parse::<EvidenceType>() {
        Ok(t) => t,
        Err(_) => {
            c.pos -= ev.chars().count();
            return c.err(format!("expected `study` or `expert`, found `{ev}`"));
        }
    };
    c.skip_ws();
    if !c.eat(":") {
        return c.err("expected `:` after evidence type");
    }

    let mut slots = Vec::new();
    let mut max_gap = None;
    loop {
        c.skip_ws();
        if c.at_end() {
            break;
        }
        if max_gap.is_some() {
            return c.err("`gap<=N` must be the last element");
        }
        let start = c.pos;
        if c.eat("TOPIC") {
            slots.push(QuerySlot::Topic);
        } else if c.eat("ACTION") {
            slots.push(QuerySlot::Action);
        } else if c.eat("\"") {
            let word = c.until('"')?;
            let toks = normalize_phrase(&word);
            if toks.len() != 1 {
                c.pos = start;
                return c.err(format!("literal must be a single token, got `{word}`"));
            }
            slots.push(QuerySlot::Literal(toks.into_iter().next().unwrap()));
        } else if c.eat("lex(") {
            let name = c.until(')')?;
            let name = name.trim();
            if name.is_empty() {
                c.pos = start;
                return c.err("empty lexicon name");
            }
            slots.push(QuerySlot::Lexicon(name.to_string()));
        } else if c.eat("ent(") {
            let kind = c.until(')')?;
            match EntityKind::parse(kind.trim()) {
                Some(k) => slots.push(QuerySlot::Entity(k)),
                None => {
                    c.pos = start;
                    return c.err(format!("unknown entity kind `{}`", kind.trim()));
                }
            }
        } else if c.eat("gap<=") {
            let digits = c.take_while(|ch| ch.is_ascii_digit());
            match digits.parse::<usize>() {
                Ok(n) => max_gap = Some(n),
                Err(_) => return c.err("expected a non-negative integer after `gap<=`"),
            }
        } else {
            return c.err("expected a slot");
        }
        if !c.at_end() && !c.peek().is_some_and(char::is_whitespace) {
            return c.err("expected whitespace between slots");
        }
    }
    if slots.is_empty() {
        return c.err("query needs at least one slot");
    }
    let query = Query { query_id: String::new(), evidence_type, slots, max_gap };
    query.validate()?;
    Ok(query)
}

pub fn parse_cascades(text: &str) -> Result<Vec<Cascade>, QueryError> {
    let mut cascades: Vec<(usize, Cascade)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| QueryError::Cascade { line: line_no, message };
        if let Some(rest) = line.strip_prefix("cascade ") {
            let mut parts = rest.split_whitespace();
            let ev: EvidenceType = parts.next().ok_or_else(|| bad("missing evidence type".into()))?.parse().map_err(bad)?;
            let cap = match parts.next() {
                None => super::DEFAULT_CAP,
                Some(p) => p
                    .strip_prefix("cap=")
                    .and_then(|v| v.parse::<usize>().ok())
                    .filter(|&v| v > 0)
                    .ok_or_else(|| bad(format!("bad cap `{p}`")))?,
            };
            if parts.next().is_some() {
                return Err(bad("unexpected text after cap".into()));
            }
            if cascades.iter().any(|(_, c)| c.evidence_type == ev) {
                return Err(bad(format!("second {ev} cascade")));
            }
            cascades.push((line_no, Cascade { evidence_type: ev, queries: Vec::new(), cap }));
            continue;
        }
        let (_, cascade) = cascades.last_mut().ok_or_else(|| bad("query before any `cascade` header".into()))?;
        let q = parse_query(line).map_err(|e| bad(e.to_string()))?;
        if q.evidence_type != cascade.evidence_type {
            return Err(bad(format!("{} query inside {} cascade", q.evidence_type, cascade.evidence_type)));
        }
        let id = format!("{}-{}", cascade.evidence_type, cascade.queries.len() + 1);
        cascade.queries.push(q.with_id(id));
    }
    Ok(cascades.into_iter().map(|(_, c)| c).collect())
}

pub fn read_cascade_file(path: &Path) -> Result<Vec<Cascade>, QueryError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| QueryError::Cascade { line: 0, message: format!("{}: {e}", path.display()) })?;
    parse_cascades(&text)
}
