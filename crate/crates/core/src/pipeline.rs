//! File-based pipeline stages shared by the command-line tool and tests.
//!
//! * motions: `motion_id,text,topic,action`
//! * truth: `motion_id,doc_id,sent_idx,label`
//! * candidates: `motion_id,evidence_type,query_id,doc_id,sent_idx,spans,text`
//!   with spans as space-separated `first-last` token ranges
//! * ranking: `motion_id,rank,score,label,evidence_type,query_id,doc_id,sent_idx`

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::annotator::{mask_topic, Annotator, AnnotatorError, RedirectTable};
use crate::config::{ConfigError, RunConfig};
use crate::corpus::{segment_sentences, CorpusError, Document, EvidenceType, Motion, SentenceId};
use crate::eval::EvalError;
use crate::index::{IndexBuilder, IndexError, SemanticIndex};
use crate::labeling::{AnnotatorProfile, Label, LabelError, OracleAnnotators, PairKey, PoolItem};
use crate::query::{read_cascade_file, retrieve_for_motion, Candidate, CascadeSet, QueryError};
use crate::ranker::{
    binarize, extract_features, rank, Deduper, RankError, ScoredCandidate, Scorer, ScoringRequest, StopWords,
};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Annotator(#[from] AnnotatorError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Query(#[from] QueryError),
    #[error(transparent)]
    Rank(#[from] RankError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Data(String),
}

impl PipelineError {
    /// Short category printed with the message.
    pub fn category(&self) -> &'static str {
        match self {
            PipelineError::Config(_) => "config",
            PipelineError::Corpus(_) | PipelineError::Annotator(_) | PipelineError::Csv { .. } | PipelineError::Data(_) => "input",
            PipelineError::Index(_) => "index",
            PipelineError::Query(_) => "query",
            PipelineError::Rank(_) => "scorer",
            PipelineError::Label(_) => "labeling",
            PipelineError::Eval(_) => "eval",
            PipelineError::Io { .. } => "io",
        }
    }

    /// Process exit status; 2 is left to usage errors.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" => 3,
            "input" => 4,
            "io" => 5,
            "index" => 6,
            "query" => 7,
            "scorer" => 8,
            "labeling" => 9,
            _ => 10,
        }
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> PipelineError + '_ {
    move |source| PipelineError::Csv { path: path.to_path_buf(), source }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(csv_err(path))?;
    r.deserialize().collect::<Result<Vec<T>, _>>().map_err(csv_err(path))
}

fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

#[derive(Deserialize)]
struct MotionRow {
    motion_id: String,
    text: String,
    topic: String,
    #[serde(default)]
    action: Option<String>,
}

/// Reads the motions file, resolving each topic through the redirect table.
pub fn load_motions(path: &Path, redirects: &RedirectTable) -> Result<Vec<Motion>, PipelineError> {
    let rows: Vec<MotionRow> = read_csv(path)?;
    let mut seen = std::collections::BTreeSet::new();
    rows.into_iter()
        .map(|r| {
            if !seen.insert(r.motion_id.clone()) {
                return Err(PipelineError::Data(format!("{}: duplicate motion_id `{}`", path.display(), r.motion_id)));
            }
            Ok(redirects.resolve_motion(&r.motion_id, &r.text, &r.topic, r.action.as_deref())?)
        })
        .collect()
}

pub fn load_annotator(cfg: &RunConfig) -> Result<Annotator, PipelineError> {
    Ok(Annotator::load(&cfg.paths.lexicons, cfg.paths.gazetteer.as_deref(), &cfg.paths.redirects)?)
}

pub fn load_redirects(cfg: &RunConfig) -> Result<RedirectTable, PipelineError> {
    Ok(RedirectTable::from_file(&cfg.paths.redirects)?)
}

/// Cascades from the configured file, with the optional cap override applied.
pub fn load_cascades(path: &Path, cap: Option<usize>) -> Result<CascadeSet, PipelineError> {
    let mut set = CascadeSet::from_cascades(read_cascade_file(path)?)?;
    if let Some(cap) = cap {
        set.study.cap = cap;
        set.expert.cap = cap;
    }
    Ok(set)
}

pub fn load_stop_words(cfg: &RunConfig) -> Result<StopWords, PipelineError> {
    match &cfg.paths.stop_words {
        Some(p) => StopWords::from_file(p).map_err(io_err(p)),
        None => Ok(StopWords::default()),
    }
}

/// Segments, annotates and indexes every document.
pub fn index_corpus(docs: &[Document], annotator: &Annotator) -> Result<SemanticIndex, PipelineError> {
    let mut builder = IndexBuilder::new().documents(docs);
    for doc in docs {
        for mut s in segment_sentences(doc) {
            annotator.annotate(&mut s);
            builder.add(s);
        }
    }
    Ok(builder.finish()?)
}

/// Candidates for every motion, grouped in motion-file order.
pub fn retrieve_all(index: &SemanticIndex, cascades: &CascadeSet, motions: &[Motion]) -> Result<Vec<Candidate>, PipelineError> {
    let mut out = Vec::new();
    for m in motions {
        out.extend(retrieve_for_motion(index, cascades, m)?);
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct CandidateRow {
    motion_id: String,
    evidence_type: String,
    query_id: String,
    doc_id: String,
    sent_idx: u32,
    spans: String,
    text: String,
}

pub fn write_candidates(path: &Path, index: &SemanticIndex, candidates: &[Candidate]) -> Result<(), PipelineError> {
    let rows = candidates.iter().map(|c| CandidateRow {
        motion_id: c.motion_id.clone(),
        evidence_type: c.evidence_type.to_string(),
        query_id: c.query_id.clone(),
        doc_id: c.sentence.doc_id.clone(),
        sent_idx: c.sentence.index,
        spans: c.spans.iter().map(|(f, l)| format!("{f}-{l}")).collect::<Vec<_>>().join(" "),
        text: index.get(&c.sentence).map(|s| s.text.clone()).unwrap_or_default(),
    });
    write_csv(path, &["motion_id", "evidence_type", "query_id", "doc_id", "sent_idx", "spans", "text"], rows)
}

pub fn read_candidates(path: &Path) -> Result<Vec<Candidate>, PipelineError> {
    let bad = |m: String| PipelineError::Data(format!("{}: {m}", path.display()));
    read_csv::<CandidateRow>(path)?
        .into_iter()
        .map(|r| {
            let evidence_type: EvidenceType = r.evidence_type.parse().map_err(|e: String| bad(e))?;
            let spans = r
                .spans
                .split_whitespace()
                .map(|s| {
                    let (f, l) = s.split_once('-').ok_or_else(|| bad(format!("bad span `{s}`")))?;
                    Ok((f.parse().map_err(|_| bad(format!("bad span `{s}`")))?, l.parse().map_err(|_| bad(format!("bad span `{s}`")))?))
                })
                .collect::<Result<Vec<(u32, u32)>, PipelineError>>()?;
            Ok(Candidate {
                motion_id: r.motion_id,
                sentence: SentenceId::new(r.doc_id, r.sent_idx),
                evidence_type,
                query_id: r.query_id,
                spans,
            })
        })
        .collect()
}

/// Everything a scorer sees for one candidate.
pub fn scoring_request(index: &SemanticIndex, candidate: &Candidate, motion: &Motion, mask_token: &str) -> Result<ScoringRequest, PipelineError> {
    let sentence = index
        .get(&candidate.sentence)
        .ok_or_else(|| PipelineError::Data(format!("candidate sentence {} not in index", candidate.sentence)))?;
    Ok(ScoringRequest {
        id: PairKey::new(candidate.motion_id.clone(), candidate.sentence.clone()).to_string(),
        motion_text: motion.text.clone(),
        sentence: sentence.text.clone(),
        masked: mask_topic(sentence, motion, mask_token),
        features: extract_features(candidate, sentence, motion),
    })
}

fn motion_for<'m>(motions: &'m BTreeMap<&str, &Motion>, c: &Candidate) -> Result<&'m Motion, PipelineError> {
    motions.get(c.motion_id.as_str()).copied().ok_or_else(|| PipelineError::Data(format!("unknown motion `{}`", c.motion_id)))
}

/// Retrieved candidates with scoring requests, for the labeling loop.
pub fn build_pool(index: &SemanticIndex, cascades: &CascadeSet, motions: &[Motion], mask_token: &str) -> Result<Vec<PoolItem>, PipelineError> {
    let by_id: BTreeMap<&str, &Motion> = motions.iter().map(|m| (m.motion_id.as_str(), m)).collect();
    retrieve_all(index, cascades, motions)?
        .into_iter()
        .map(|c| {
            let request = scoring_request(index, &c, motion_for(&by_id, &c)?, mask_token)?;
            Ok(PoolItem { candidate: c, request })
        })
        .collect()
}

/// One ranked candidate with its binarized label.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedRow {
    pub rank: usize,
    pub scored: ScoredCandidate,
    pub label: Label,
}

pub struct RankSettings<'a> {
    pub mask_token: &'a str,
    pub dedup_threshold: Option<f64>,
    pub binarize_threshold: f64,
    pub stop_words: &'a StopWords,
}

/// Scores, sorts and deduplicates each motion's candidates. Motions keep the
/// order in which they first appear among the candidates.
pub fn rank_candidates(
    index: &SemanticIndex,
    motions: &[Motion],
    candidates: &[Candidate],
    scorer: &mut dyn Scorer,
    settings: &RankSettings<'_>,
) -> Result<Vec<RankedRow>, PipelineError> {
    let by_id: BTreeMap<&str, &Motion> = motions.iter().map(|m| (m.motion_id.as_str(), m)).collect();
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&Candidate>> = BTreeMap::new();
    for c in candidates {
        let g = groups.entry(c.motion_id.as_str()).or_default();
        if g.is_empty() {
            order.push(c.motion_id.as_str());
        }
        g.push(c);
    }
    let mut out = Vec::new();
    for motion_id in order {
        let group: Vec<Candidate> = groups[motion_id].iter().map(|c| (*c).clone()).collect();
        let motion = motion_for(&by_id, &group[0])?;
        let requests = group
            .iter()
            .map(|c| scoring_request(index, c, motion, settings.mask_token))
            .collect::<Result<Vec<_>, _>>()?;
        let deduper = settings.dedup_threshold.map(|threshold| Deduper { index, motion, stop_words: settings.stop_words, threshold });
        let ranked = rank(&group, &requests, scorer, deduper.as_ref())?;
        let labels = binarize(&ranked, settings.binarize_threshold);
        for (i, (scored, (_, positive))) in ranked.into_iter().zip(labels).enumerate() {
            out.push(RankedRow { rank: i + 1, scored, label: positive.into() });
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct RankingRow {
    motion_id: String,
    rank: usize,
    score: f64,
    label: String,
    evidence_type: String,
    query_id: String,
    doc_id: String,
    sent_idx: u32,
}

pub fn write_ranking(path: &Path, rows: &[RankedRow]) -> Result<(), PipelineError> {
    let rows = rows.iter().map(|r| {
        let c = &r.scored.candidate;
        RankingRow {
            motion_id: c.motion_id.clone(),
            rank: r.rank,
            score: r.scored.score,
            label: r.label.as_str().into(),
            evidence_type: c.evidence_type.to_string(),
            query_id: c.query_id.clone(),
            doc_id: c.sentence.doc_id.clone(),
            sent_idx: c.sentence.index,
        }
    });
    write_csv(path, &["motion_id", "rank", "score", "label", "evidence_type", "query_id", "doc_id", "sent_idx"], rows)
}

/// Ranked pairs per motion in file order; motions in order of appearance.
pub fn read_ranking(path: &Path) -> Result<Vec<(String, Vec<PairKey>)>, PipelineError> {
    let mut out: Vec<(String, Vec<PairKey>)> = Vec::new();
    for r in read_csv::<RankingRow>(path)? {
        let pair = PairKey::new(r.motion_id.clone(), SentenceId::new(r.doc_id, r.sent_idx));
        match out.last_mut() {
            Some((m, list)) if *m == r.motion_id => list.push(pair),
            _ => out.push((r.motion_id, vec![pair])),
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
struct TruthRow {
    motion_id: String,
    doc_id: String,
    sent_idx: u32,
    label: String,
}

/// Ground truth for simulated annotators.
pub fn read_truth(path: &Path) -> Result<BTreeMap<PairKey, Label>, PipelineError> {
    read_csv::<TruthRow>(path)?
        .into_iter()
        .map(|r| {
            let label: Label = r.label.parse().map_err(|e: String| PipelineError::Data(format!("{}: {e}", path.display())))?;
            Ok((PairKey::new(r.motion_id, SentenceId::new(r.doc_id, r.sent_idx)), label))
        })
        .collect()
}

/// Simulated crowd with uniform noise. Pairs missing from `truth` are
/// negative, so every retrieved candidate can be judged.
pub fn simulated_crowd(
    mut truth: BTreeMap<PairKey, Label>,
    pool: &[PoolItem],
    cfg: &RunConfig,
    seed: u64,
) -> Result<OracleAnnotators, PipelineError> {
    for item in pool {
        truth.entry(item.pair()).or_insert(Label::Negative);
    }
    let s = cfg.simulation;
    let profiles = (0..s.annotators).map(|i| AnnotatorProfile::honest(format!("sim{i:02}"), s.noise)).collect();
    Ok(OracleAnnotators::new(truth, profiles, s.per_pair, seed)?)
}

/// Corpus name used in report file names: the corpus file stem.
pub fn corpus_name(cfg: &RunConfig) -> String {
    cfg.paths.corpus.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "corpus".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotator::{Gazetteer, Lexicon};
    use crate::query::parse_cascades;
    use crate::ranker::{BuiltinScorer, LogisticModel};

    fn fixture() -> (SemanticIndex, CascadeSet, Vec<Motion>) {
        let docs = vec![
            Document {
                doc_id: "d1".into(),
                source: "Journal A".into(),
                title: "t".into(),
                text: "A study found that gambling causes harm. Experts said gambling is fine.".into(),
            },
            Document { doc_id: "d2".into(), source: "Journal B".into(), title: "t".into(), text: "Research shows that betting harms families.".into() },
        ];
        let annotator = Annotator::new(
            vec![Lexicon::new("study", ["study", "research"]).unwrap(), Lexicon::new("expert", ["experts"]).unwrap()],
            Gazetteer::default(),
            RedirectTable::from_pairs([("gambling", "Gambling"), ("betting", "Gambling")]).unwrap(),
        );
        let index = index_corpus(&docs, &annotator).unwrap();
        let cascades = CascadeSet::from_cascades(
            parse_cascades("cascade study cap=10\nstudy: lex(study) \"that\" TOPIC\ncascade expert cap=10\nexpert: lex(expert) TOPIC\n").unwrap(),
        )
        .unwrap();
        let motion = annotator.redirects.resolve_motion("m1", "ban gambling", "gambling", None).unwrap();
        (index, cascades, vec![motion])
    }

    #[test]
    fn candidates_round_trip_through_csv() {
        let (index, cascades, motions) = fixture();
        let cands = retrieve_all(&index, &cascades, &motions).unwrap();
        assert_eq!(cands.len(), 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_candidates(&path, &index, &cands).unwrap();
        assert_eq!(read_candidates(&path).unwrap(), cands);
    }

    #[test]
    fn ranking_rows_per_motion() {
        let (index, cascades, motions) = fixture();
        let cands = retrieve_all(&index, &cascades, &motions).unwrap();
        let mut model = LogisticModel::default();
        model.weights.insert("query:study-1".into(), 2.0);
        let sw = StopWords::default();
        let settings = RankSettings { mask_token: "[TOPIC]", dedup_threshold: Some(0.8), binarize_threshold: 0.5, stop_words: &sw };
        let rows = rank_candidates(&index, &motions, &cands, &mut BuiltinScorer { model }, &settings).unwrap();
        assert_eq!(rows.iter().map(|r| r.rank).collect::<Vec<_>>(), [1, 2, 3]);
        assert!(rows[0].scored.score > 0.5 && rows[0].label == Label::Positive);
        assert_eq!(rows[2].label, Label::Positive); // sigmoid(0) = 0.5
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_ranking(&path, &rows).unwrap();
        let back = read_ranking(&path).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back[0].1.len(), 3);
    }

    #[test]
    fn pool_requests_are_masked() {
        let (index, cascades, motions) = fixture();
        let pool = build_pool(&index, &cascades, &motions, "[TOPIC]").unwrap();
        assert!(pool.iter().all(|p| p.request.masked.contains("[TOPIC]") && !p.request.masked.to_lowercase().contains("gambling")));
        assert_eq!(pool[0].request.id, "m1/d1#0");
    }

    #[test]
    fn error_categories() {
        let e = PipelineError::Data("x".into());
        assert_eq!((e.category(), e.exit_code()), ("input", 4));
        let e = PipelineError::from(ConfigError::Invalid("x".into()));
        assert_eq!((e.category(), e.exit_code()), ("config", 3));
    }
}
