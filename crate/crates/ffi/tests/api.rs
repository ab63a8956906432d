mod common;

use std::ffi::{CStr, CString};
use std::ptr;

use evidencer::config::RunConfig;
use evidencer::corpus::EvidenceType;
use evidencer::index::load_index;
use evidencer::pipeline::{load_cascades, load_motions, load_redirects};
use evidencer::query::retrieve_for_motion;
use evidencer_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(evx_last_error()) }.to_string_lossy().into_owned()
}

struct Fixture {
    _dir: tempfile::TempDir,
    index: CString,
    redirects: CString,
    cascades: CString,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let index = common::sample_index(dir.path());
    let sample = common::sample_dir();
    Fixture {
        index: c(index.to_str().unwrap()),
        redirects: c(sample.join("redirects.tsv").to_str().unwrap()),
        cascades: c(sample.join("cascades.txt").to_str().unwrap()),
        _dir: dir,
    }
}

fn open(f: &Fixture, with_cascades: bool) -> *mut EvxEngine {
    let mut engine = ptr::null_mut();
    let cascades = if with_cascades { f.cascades.as_ptr() } else { ptr::null() };
    let status = unsafe { evx_engine_open(f.index.as_ptr(), f.redirects.as_ptr(), cascades, &mut engine) };
    assert_eq!(status, EvxStatus::Ok, "{}", last_error());
    assert!(!engine.is_null());
    engine
}

fn collect(list: *mut EvxCandidates) -> Vec<(String, u32, EvxEvidenceType, String)> {
    let mut n = 0;
    assert_eq!(unsafe { evx_candidates_len(list, &mut n) }, EvxStatus::Ok);
    (0..n)
        .map(|i| {
            let mut cand = EvxCandidate {
                doc_id: ptr::null(),
                sent_idx: 0,
                evidence_type: EvxEvidenceType::Study,
                query_id: ptr::null(),
                text: ptr::null(),
            };
            assert_eq!(unsafe { evx_candidates_get(list, i, &mut cand) }, EvxStatus::Ok);
            let s = |p| unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
            assert!(!s(cand.text).is_empty());
            (s(cand.doc_id), cand.sent_idx, cand.evidence_type, s(cand.query_id))
        })
        .collect()
}

#[test]
fn retrieve_matches_library() {
    let f = fixture();
    let engine = open(&f, true);
    let mut count = 0;
    assert_eq!(unsafe { evx_engine_sentence_count(engine, &mut count) }, EvxStatus::Ok);
    assert_eq!(count, 50);

    let cfg = RunConfig::from_file(&common::sample_dir().join("config.toml")).unwrap();
    let index = load_index(std::path::Path::new(f.index.to_str().unwrap())).unwrap();
    let cascades = load_cascades(&cfg.paths.cascades, None).unwrap();
    let motions = load_motions(&cfg.paths.motions, &load_redirects(&cfg).unwrap()).unwrap();
    for m in &motions {
        let topic = c(&m.topic);
        let action = m.action.as_deref().map(c);
        let mut list = ptr::null_mut();
        let status =
            unsafe { evx_retrieve(engine, topic.as_ptr(), action.as_ref().map_or(ptr::null(), |a| a.as_ptr()), &mut list) };
        assert_eq!(status, EvxStatus::Ok, "{}", last_error());
        let want: Vec<_> = retrieve_for_motion(&index, &cascades, m)
            .unwrap()
            .into_iter()
            .map(|c| {
                let ty = if c.evidence_type == EvidenceType::Study { EvxEvidenceType::Study } else { EvxEvidenceType::Expert };
                (c.sentence.doc_id, c.sentence.index, ty, c.query_id)
            })
            .collect();
        assert!(!want.is_empty());
        assert_eq!(collect(list), want, "motion {}", m.motion_id);
        unsafe { evx_candidates_free(list) };
    }
    unsafe { evx_engine_free(engine) };
}

#[test]
fn single_query_without_cascades() {
    let f = fixture();
    let engine = open(&f, false);
    let mut list = ptr::null_mut();
    let topic = c("gambling");
    let status = unsafe { evx_retrieve(engine, topic.as_ptr(), ptr::null(), &mut list) };
    assert_eq!(status, EvxStatus::InvalidArgument);
    assert!(list.is_null());
    assert!(last_error().contains("cascades"));

    let q = c("study: TOPIC");
    assert_eq!(unsafe { evx_retrieve_query(engine, q.as_ptr(), topic.as_ptr(), ptr::null(), &mut list) }, EvxStatus::Ok);
    assert!(!collect(list).is_empty());
    assert!(last_error().is_empty());
    unsafe { evx_candidates_free(list) };

    let bad = c("study: lex(study)");
    assert_eq!(unsafe { evx_retrieve_query(engine, bad.as_ptr(), topic.as_ptr(), ptr::null(), &mut list) }, EvxStatus::Query);
    assert!(last_error().contains("TOPIC"), "{}", last_error());
    unsafe { evx_engine_free(engine) };
}

#[test]
fn open_reports_error_kinds() {
    let f = fixture();
    let mut engine = ptr::null_mut();
    let missing = c("/nonexistent/index.evix");
    assert_eq!(unsafe { evx_engine_open(missing.as_ptr(), f.redirects.as_ptr(), ptr::null(), &mut engine) }, EvxStatus::Io);
    assert!(engine.is_null());
    assert!(!last_error().is_empty());

    let not_index = f.redirects.clone();
    assert_eq!(unsafe { evx_engine_open(not_index.as_ptr(), f.redirects.as_ptr(), ptr::null(), &mut engine) }, EvxStatus::Index);
    assert_eq!(unsafe { evx_engine_open(ptr::null(), f.redirects.as_ptr(), ptr::null(), &mut engine) }, EvxStatus::NullArgument);
    assert_eq!(unsafe { evx_engine_open(f.index.as_ptr(), f.redirects.as_ptr(), ptr::null(), ptr::null_mut()) }, EvxStatus::NullArgument);
    let bad_utf8 = CString::new(vec![0xff, 0xfe]).unwrap();
    assert_eq!(unsafe { evx_engine_open(bad_utf8.as_ptr(), f.redirects.as_ptr(), ptr::null(), &mut engine) }, EvxStatus::InvalidUtf8);
}

#[test]
fn unknown_topic_and_bad_index() {
    let f = fixture();
    let engine = open(&f, true);
    let mut list = ptr::null_mut();
    let topic = c("astrology");
    assert_eq!(unsafe { evx_retrieve(engine, topic.as_ptr(), ptr::null(), &mut list) }, EvxStatus::InvalidArgument);

    let topic = c("gambling");
    assert_eq!(unsafe { evx_retrieve(engine, topic.as_ptr(), ptr::null(), &mut list) }, EvxStatus::Ok);
    let mut n = 0;
    unsafe { evx_candidates_len(list, &mut n) };
    let mut cand = std::mem::MaybeUninit::<EvxCandidate>::uninit();
    assert_eq!(unsafe { evx_candidates_get(list, n, cand.as_mut_ptr()) }, EvxStatus::OutOfRange);
    unsafe {
        evx_candidates_free(list);
        evx_engine_free(engine);
        evx_candidates_free(ptr::null_mut());
        evx_engine_free(ptr::null_mut());
    }
}

#[test]
fn kappa_through_c_abi() {
    let a = [1u8, 1, 1, 0, 0, 0];
    let b = [1u8, 1, 0, 1, 0, 0];
    let mut k = 0.0;
    assert_eq!(unsafe { evx_cohen_kappa(a.as_ptr(), b.as_ptr(), a.len(), &mut k) }, EvxStatus::Ok);
    assert!((k - 1.0 / 3.0).abs() < 1e-12);
    let bad = [2u8; 6];
    assert_eq!(unsafe { evx_cohen_kappa(a.as_ptr(), bad.as_ptr(), 6, &mut k) }, EvxStatus::InvalidArgument);
    assert_eq!(unsafe { evx_cohen_kappa(ptr::null(), b.as_ptr(), 6, &mut k) }, EvxStatus::NullArgument);
    assert_eq!(unsafe { evx_cohen_kappa(a.as_ptr(), b.as_ptr(), 0, &mut k) }, EvxStatus::InvalidArgument);
}

#[test]
fn welch_through_c_abi() {
    let a = [1.0, 2.0, 3.0, 4.0, 5.0];
    let b = [2.0, 4.0, 6.0, 8.0, 10.0];
    let mut r = EvxTTest::default();
    assert_eq!(unsafe { evx_welch_t_test(a.as_ptr(), 5, b.as_ptr(), 5, &mut r) }, EvxStatus::Ok);
    assert!((r.t - -1.8973665961010275).abs() < 1e-12);
    assert!((r.p - 0.10753119493062725).abs() < 1e-12);
    assert_eq!(unsafe { evx_welch_t_test(a.as_ptr(), 1, b.as_ptr(), 5, &mut r) }, EvxStatus::InvalidArgument);
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(evx_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
