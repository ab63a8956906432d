//! Binary index file.
//!
//! All integers are little-endian; a string is a `u32` byte length followed
//! by UTF-8 bytes.
//!
//! ```text
//! magic        "EVIX"
//! version      u32 (= FORMAT_VERSION)
//! file_len     u64, total file size in bytes including the checksum
//! metadata     doc_count u32, sentence_count u32, key_count u32
//! documents    doc_count × { doc_id str, source str, title str }
//! sentences    sentence_count × {
//!                doc_id str, index u32, text str,
//!                token_count u32, token_count × { start u32, end u32 },
//!                span_count u32, span_count × { first u32, last u32, role }
//!              }
//! keys         key_count × key
//! postings     key_count × { count u32, count × { sentence u32, first u32, last u32 } }
//! checksum     u32, CRC-32 (IEEE) of every preceding byte
//! ```
//!
//! `role` and `key` share one encoding: a tag byte (0 term, 1 lexicon,
//! 2 entity, 3 wiki) then a string payload, except entity which carries one
//! kind byte (0 number, 1 person, 2 organization). Role tag 0 is invalid.
//! Posting blocks follow key order. Character offsets count Unicode scalar
//! values.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{DocumentMeta, IndexError, IndexKey, Posting, SemanticIndex};
use crate::annotator::{AnnotationSpan, EntityKind, Role};
use crate::corpus::{Sentence, SentenceId, Token};

pub const MAGIC: &[u8; 4] = b"EVIX";
pub const FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 16;

pub fn write_index(index: &SemanticIndex) -> Vec<u8> {
    let mut w = Writer::default();
    w.buf.extend_from_slice(MAGIC);
    w.u32(FORMAT_VERSION);
    w.u64(0); // patched below

    w.u32(index.documents.len() as u32);
    w.u32(index.sentences.len() as u32);
    w.u32(index.postings.len() as u32);

    for (id, meta) in &index.documents {
        w.str(id);
        w.str(&meta.source);
        w.str(&meta.title);
    }
    for s in &index.sentences {
        w.str(&s.id.doc_id);
        w.u32(s.id.index);
        w.str(&s.text);
        w.u32(s.tokens.len() as u32);
        for t in &s.tokens {
            w.u32(t.start as u32);
            w.u32(t.end as u32);
        }
        w.u32(s.annotations.len() as u32);
        for a in &s.annotations {
            w.u32(a.first);
            w.u32(a.last);
            w.key(&IndexKey::for_role(&a.role));
        }
    }
    for key in index.postings.keys() {
        w.key(key);
    }
    for list in index.postings.values() {
        w.u32(list.len() as u32);
        for p in list {
            w.u32(p.sentence);
            w.u32(p.first);
            w.u32(p.last);
        }
    }

    let total = (w.buf.len() + 4) as u64;
    w.buf[8..16].copy_from_slice(&total.to_le_bytes());
    let crc = crc32fast::hash(&w.buf);
    w.u32(crc);
    w.buf
}

pub fn save_index(index: &SemanticIndex, path: &Path) -> Result<(), IndexError> {
    let bytes = write_index(index);
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    f.sync_all()?;
    Ok(())
}

pub fn load_index(path: &Path) -> Result<SemanticIndex, IndexError> {
    read_index(&fs::read(path)?)
}

pub fn read_index(bytes: &[u8]) -> Result<SemanticIndex, IndexError> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        let found = String::from_utf8_lossy(&bytes[..bytes.len().min(4)]).into_owned();
        return Err(IndexError::VersionMismatch(format!("bad magic {found:?}")));
    }
    if bytes.len() < 8 {
        return Err(IndexError::Truncated { expected: HEADER_LEN as u64 + 4, found: bytes.len() as u64 });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(IndexError::VersionMismatch(format!("file version {version}, supported {FORMAT_VERSION}")));
    }
    if bytes.len() < HEADER_LEN + 4 {
        return Err(IndexError::Truncated { expected: HEADER_LEN as u64 + 4, found: bytes.len() as u64 });
    }
    let declared = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    if (bytes.len() as u64) < declared {
        return Err(IndexError::Truncated { expected: declared, found: bytes.len() as u64 });
    }
    if (bytes.len() as u64) > declared {
        return Err(IndexError::Corrupt(format!("{} trailing bytes", bytes.len() as u64 - declared)));
    }
    let body = &bytes[..bytes.len() - 4];
    let stored = u32::from_le_bytes(bytes[bytes.len() - 4..].try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(IndexError::Checksum { stored, computed });
    }

    let mut r = Reader { buf: body, pos: HEADER_LEN };
    let doc_count = r.u32()? as usize;
    let sentence_count = r.u32()? as usize;
    let key_count = r.u32()? as usize;

    let mut documents = BTreeMap::new();
    for _ in 0..doc_count {
        let id = r.str()?;
        let source = r.str()?;
        let title = r.str()?;
        documents.insert(id, DocumentMeta { source, title });
    }

    let mut sentences = Vec::with_capacity(sentence_count.min(1 << 20));
    for _ in 0..sentence_count {
        sentences.push(r.sentence()?);
    }
    if sentences.windows(2).any(|w| w[0].id >= w[1].id) {
        return Err(IndexError::Corrupt("sentence store not strictly sorted".into()));
    }

    let mut keys = Vec::with_capacity(key_count.min(1 << 20));
    for _ in 0..key_count {
        keys.push(r.key()?);
    }
    let mut postings = BTreeMap::new();
    for key in keys {
        let n = r.u32()? as usize;
        let mut list = Vec::with_capacity(n.min(1 << 20));
        for _ in 0..n {
            let p = Posting { sentence: r.u32()?, first: r.u32()?, last: r.u32()? };
            let s = sentences
                .get(p.sentence as usize)
                .ok_or_else(|| IndexError::Corrupt(format!("posting references sentence {}", p.sentence)))?;
            if p.first > p.last || p.last as usize >= s.tokens.len() {
                return Err(IndexError::Corrupt(format!("posting token range out of bounds for {key}")));
            }
            list.push(p);
        }
        if list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(IndexError::Corrupt(format!("posting list for {key} not sorted")));
        }
        if postings.insert(key, list).is_some() {
            return Err(IndexError::Corrupt("duplicate key".into()));
        }
    }
    if r.pos != body.len() {
        return Err(IndexError::Corrupt("unread bytes before checksum".into()));
    }

    let doc_ids: std::collections::BTreeSet<&str> = sentences.iter().map(|s| s.id.doc_id.as_str()).collect();
    let doc_count = doc_ids.len().max(documents.len());
    Ok(SemanticIndex { sentences, postings, documents, doc_count })
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }

    fn key(&mut self, key: &IndexKey) {
        match key {
            IndexKey::Term(t) => {
                self.buf.push(0);
                self.str(t);
            }
            IndexKey::Lexicon(l) => {
                self.buf.push(1);
                self.str(l);
            }
            IndexKey::Entity(k) => {
                self.buf.push(2);
                self.buf.push(match k {
                    EntityKind::Number => 0,
                    EntityKind::Person => 1,
                    EntityKind::Organization => 2,
                });
            }
            IndexKey::Wiki(w) => {
                self.buf.push(3);
                self.str(w);
            }
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], IndexError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| IndexError::Corrupt(format!("record overruns block at byte {}", self.pos)))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8, IndexError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, IndexError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn str(&mut self) -> Result<String, IndexError> {
        let n = self.u32()? as usize;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| IndexError::Corrupt("invalid UTF-8 string".into()))
    }

    fn key(&mut self) -> Result<IndexKey, IndexError> {
        Ok(match self.u8()? {
            0 => IndexKey::Term(self.str()?),
            1 => IndexKey::Lexicon(self.str()?),
            2 => IndexKey::Entity(match self.u8()? {
                0 => EntityKind::Number,
                1 => EntityKind::Person,
                2 => EntityKind::Organization,
                k => return Err(IndexError::Corrupt(format!("unknown entity kind {k}"))),
            }),
            3 => IndexKey::Wiki(self.str()?),
            t => return Err(IndexError::Corrupt(format!("unknown key tag {t}"))),
        })
    }

    fn sentence(&mut self) -> Result<Sentence, IndexError> {
        let doc_id = self.str()?;
        let index = self.u32()?;
        let text = self.str()?;
        let chars: Vec<char> = text.chars().collect();
        let ntok = self.u32()? as usize;
        let mut tokens = Vec::with_capacity(ntok.min(1 << 16));
        let mut prev_end = 0;
        for _ in 0..ntok {
            let start = self.u32()? as usize;
            let end = self.u32()? as usize;
            if start < prev_end || end <= start || end > chars.len() {
                return Err(IndexError::Corrupt(format!("bad token span in {doc_id}#{index}")));
            }
            prev_end = end;
            let surface: String = chars[start..end].iter().collect();
            let normalized = surface.to_lowercase();
            tokens.push(Token { surface, normalized, start, end });
        }
        let nspan = self.u32()? as usize;
        let mut annotations = Vec::with_capacity(nspan.min(1 << 16));
        for _ in 0..nspan {
            let first = self.u32()?;
            let last = self.u32()?;
            let role = match self.key()? {
                IndexKey::Lexicon(l) => Role::LexiconHit(l),
                IndexKey::Entity(k) => Role::NamedEntity(k),
                IndexKey::Wiki(w) => Role::WikiLink(w),
                IndexKey::Term(_) => return Err(IndexError::Corrupt("term tag used as annotation role".into())),
            };
            if first > last || last as usize >= tokens.len() {
                return Err(IndexError::Corrupt(format!("annotation out of range in {doc_id}#{index}")));
            }
            annotations.push(AnnotationSpan { first, last, role });
        }
        Ok(Sentence { id: SentenceId { doc_id, index }, text, tokens, annotations })
    }
}
