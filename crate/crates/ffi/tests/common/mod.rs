#![allow(dead_code)]

use std::path::{Path, PathBuf};

use evidencer::config::RunConfig;
use evidencer::corpus::read_corpus_file;
use evidencer::index::save_index;
use evidencer::pipeline::{index_corpus, load_annotator};

pub fn sample_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/sample").canonicalize().expect("sample data present")
}

/// Indexes the bundled sample corpus into `dir`; returns the index path.
pub fn sample_index(dir: &Path) -> PathBuf {
    let cfg = RunConfig::from_file(&sample_dir().join("config.toml")).unwrap();
    let docs = read_corpus_file(&cfg.paths.corpus).unwrap();
    let index = index_corpus(&docs, &load_annotator(&cfg).unwrap()).unwrap();
    let path = dir.join("sample.evix");
    save_index(&index, &path).unwrap();
    path
}
