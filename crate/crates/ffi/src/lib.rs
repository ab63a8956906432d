//! C ABI for the evidencer engine.
//!
//! Every function returns an [`EvxStatus`]; results go through out-pointers.
//! On failure, [`evx_last_error`] describes the most recent error on the
//! calling thread. Handles are opaque and must be released with their
//! matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::path::Path;
use std::ptr;

use evidencer::annotator::RedirectTable;
use evidencer::corpus::{EvidenceType, Motion};
use evidencer::eval::welch_t_test;
use evidencer::index::{load_index, SemanticIndex};
use evidencer::labeling::{cohen_kappa, Label};
use evidencer::pipeline::load_cascades;
use evidencer::query::{parse_query, retrieve_for_motion, retrieve_query, Candidate, CascadeSet};

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvxStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Index = 5,
    Resource = 6,
    Query = 7,
    OutOfRange = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvxEvidenceType {
    Study = 0,
    Expert = 1,
}

impl From<EvidenceType> for EvxEvidenceType {
    fn from(t: EvidenceType) -> Self {
        match t {
            EvidenceType::Study => EvxEvidenceType::Study,
            EvidenceType::Expert => EvxEvidenceType::Expert,
        }
    }
}

/// A loaded index with its redirect table and, optionally, cascades.
pub struct EvxEngine {
    index: SemanticIndex,
    redirects: RedirectTable,
    cascades: Option<CascadeSet>,
}

struct OwnedCandidate {
    doc_id: CString,
    query_id: CString,
    text: CString,
    sent_idx: u32,
    evidence_type: EvxEvidenceType,
}

/// Retrieved candidates, in retrieval order.
pub struct EvxCandidates {
    items: Vec<OwnedCandidate>,
}

/// Borrowed view of one candidate. Strings stay valid until the owning
/// `EvxCandidates` is freed.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EvxCandidate {
    pub doc_id: *const c_char,
    pub sent_idx: u32,
    pub evidence_type: EvxEvidenceType,
    pub query_id: *const c_char,
    pub text: *const c_char,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvxTTest {
    pub t: f64,
    /// Two-sided.
    pub p: f64,
    pub df: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(EvxStatus, String);

type Outcome = Result<(), Failure>;

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Outcome + UnwindSafe) -> EvxStatus {
    match catch_unwind(f) {
        Ok(Ok(())) => {
            set_error("");
            EvxStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EvxStatus::Panic
        }
    }
}

fn fail<T>(status: EvxStatus, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, message.into()))
}

unsafe fn string_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(EvxStatus::NullArgument, format!("{name} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| fail(EvxStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn optional_string_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        string_arg(p, name).map(Some)
    }
}

fn non_null<T>(p: *const T, name: &str) -> Outcome {
    if p.is_null() {
        fail(EvxStatus::NullArgument, format!("{name} is null"))
    } else {
        Ok(())
    }
}

unsafe fn labels(p: *const u8, n: usize, name: &str) -> Result<Vec<Label>, Failure> {
    if n == 0 {
        return Ok(Vec::new());
    }
    non_null(p, name)?;
    std::slice::from_raw_parts(p, n)
        .iter()
        .map(|&v| match v {
            0 => Ok(Label::Negative),
            1 => Ok(Label::Positive),
            _ => fail(EvxStatus::InvalidArgument, format!("{name} holds {v}; labels are 0 or 1")),
        })
        .collect()
}

unsafe fn samples<'a>(p: *const f64, n: usize, name: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    non_null(p, name)?;
    Ok(std::slice::from_raw_parts(p, n))
}

fn motion(engine: &EvxEngine, topic: &str, action: Option<&str>) -> Result<Motion, Failure> {
    engine
        .redirects
        .resolve_motion("ffi", topic, topic, action)
        .or_else(|e| fail(EvxStatus::InvalidArgument, e.to_string()))
}

fn to_handle(engine: &EvxEngine, candidates: Vec<Candidate>) -> Box<EvxCandidates> {
    let c = |s: &str| CString::new(s.replace('\0', " ")).expect("no interior nul");
    let items = candidates
        .into_iter()
        .map(|cand| {
            let text = engine.index.get(&cand.sentence).map(|s| s.text.as_str()).unwrap_or("");
            OwnedCandidate {
                doc_id: c(&cand.sentence.doc_id),
                query_id: c(&cand.query_id),
                text: c(text),
                sent_idx: cand.sentence.index,
                evidence_type: cand.evidence_type.into(),
            }
        })
        .collect();
    Box::new(EvxCandidates { items })
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn evx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn evx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads an index file and a redirect table. `cascades_path` may be null, in
/// which case only [`evx_retrieve_query`] is available.
///
/// # Safety
/// Path arguments must be null or nul-terminated strings; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn evx_engine_open(
    index_path: *const c_char,
    redirects_path: *const c_char,
    cascades_path: *const c_char,
    out: *mut *mut EvxEngine,
) -> EvxStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let index_path = string_arg(index_path, "index_path")?;
        let redirects_path = string_arg(redirects_path, "redirects_path")?;
        let cascades_path = optional_string_arg(cascades_path, "cascades_path")?;
        let index = load_index(Path::new(index_path)).or_else(|e| {
            let status = if matches!(e, evidencer::index::IndexError::Io(_)) { EvxStatus::Io } else { EvxStatus::Index };
            fail(status, e.to_string())
        })?;
        let redirects =
            RedirectTable::from_file(Path::new(redirects_path)).or_else(|e| fail(EvxStatus::Resource, e.to_string()))?;
        let cascades = match cascades_path {
            Some(p) => Some(load_cascades(Path::new(p), None).or_else(|e| fail(EvxStatus::Query, e.to_string()))?),
            None => None,
        };
        *out = Box::into_raw(Box::new(EvxEngine { index, redirects, cascades }));
        Ok(())
    })
}

/// # Safety
/// `engine` must be null or a handle from [`evx_engine_open`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn evx_engine_free(engine: *mut EvxEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// # Safety
/// `engine` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn evx_engine_sentence_count(engine: *const EvxEngine, out: *mut usize) -> EvxStatus {
    guard(|| {
        non_null(engine, "engine")?;
        non_null(out, "out")?;
        *out = (*engine).index.sentence_count();
        Ok(())
    })
}

/// Runs both cascades for a motion given by its topic (a title or redirect
/// surface form) and optional action (null for none).
///
/// # Safety
/// `engine` must be a live handle, strings nul-terminated (or null where
/// allowed) and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn evx_retrieve(
    engine: *const EvxEngine,
    topic: *const c_char,
    action: *const c_char,
    out: *mut *mut EvxCandidates,
) -> EvxStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        non_null(engine, "engine")?;
        let engine = &*engine;
        let Some(cascades) = &engine.cascades else {
            return fail(EvxStatus::InvalidArgument, "engine was opened without cascades");
        };
        let m = motion(engine, string_arg(topic, "topic")?, optional_string_arg(action, "action")?)?;
        let found = retrieve_for_motion(&engine.index, cascades, &m).or_else(|e| fail(EvxStatus::Query, e.to_string()))?;
        *out = Box::into_raw(to_handle(engine, found));
        Ok(())
    })
}

/// Runs one query written in the query language, e.g.
/// `study: lex(study) TOPIC gap<=3`.
///
/// # Safety
/// As for [`evx_retrieve`].
#[no_mangle]
pub unsafe extern "C" fn evx_retrieve_query(
    engine: *const EvxEngine,
    query: *const c_char,
    topic: *const c_char,
    action: *const c_char,
    out: *mut *mut EvxCandidates,
) -> EvxStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        non_null(engine, "engine")?;
        let engine = &*engine;
        let q = parse_query(string_arg(query, "query")?).or_else(|e| fail(EvxStatus::Query, e.to_string()))?;
        let m = motion(engine, string_arg(topic, "topic")?, optional_string_arg(action, "action")?)?;
        let found = retrieve_query(&engine.index, &q.with_id("q"), &m).or_else(|e| fail(EvxStatus::Query, e.to_string()))?;
        *out = Box::into_raw(to_handle(engine, found));
        Ok(())
    })
}

/// # Safety
/// `candidates` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn evx_candidates_len(candidates: *const EvxCandidates, out: *mut usize) -> EvxStatus {
    guard(|| {
        non_null(candidates, "candidates")?;
        non_null(out, "out")?;
        *out = (*candidates).items.len();
        Ok(())
    })
}

/// # Safety
/// `candidates` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn evx_candidates_get(candidates: *const EvxCandidates, i: usize, out: *mut EvxCandidate) -> EvxStatus {
    guard(|| {
        non_null(candidates, "candidates")?;
        non_null(out, "out")?;
        let items = &(*candidates).items;
        let Some(c) = items.get(i) else {
            return fail(EvxStatus::OutOfRange, format!("index {i} with {} candidates", items.len()));
        };
        *out = EvxCandidate {
            doc_id: c.doc_id.as_ptr(),
            sent_idx: c.sent_idx,
            evidence_type: c.evidence_type,
            query_id: c.query_id.as_ptr(),
            text: c.text.as_ptr(),
        };
        Ok(())
    })
}

/// # Safety
/// `candidates` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn evx_candidates_free(candidates: *mut EvxCandidates) {
    if !candidates.is_null() {
        drop(Box::from_raw(candidates));
    }
}

/// Cohen's kappa of two binary label arrays (0 or 1) of length `n`.
///
/// # Safety
/// `a` and `b` must point to `n` readable bytes; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn evx_cohen_kappa(a: *const u8, b: *const u8, n: usize, out: *mut f64) -> EvxStatus {
    guard(|| {
        non_null(out, "out")?;
        let (a, b) = (labels(a, n, "a")?, labels(b, n, "b")?);
        *out = cohen_kappa(&a, &b).or_else(|e| fail(EvxStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}

/// Two-sided Welch's t-test.
///
/// # Safety
/// `a` and `b` must point to `na` and `nb` readable doubles; `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn evx_welch_t_test(a: *const f64, na: usize, b: *const f64, nb: usize, out: *mut EvxTTest) -> EvxStatus {
    guard(|| {
        non_null(out, "out")?;
        let r = welch_t_test(samples(a, na, "a")?, samples(b, nb, "b")?)
            .or_else(|e| fail(EvxStatus::InvalidArgument, e.to_string()))?;
        *out = EvxTTest { t: r.t, p: r.p, df: r.df };
        Ok(())
    })
}
