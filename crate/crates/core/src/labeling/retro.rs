use std::collections::{BTreeMap, BTreeSet};

use super::{
    aggregate_labels, filter_annotators, AnnotationSource, Aggregation, DatasetSnapshot, FilterConfig, FilterOutcome, GoldPair,
    LabelError, LabelRecord, PairKey, DEFAULT_MIN_TRUSTED,
};
use crate::corpus::EvidenceType;
use crate::query::Candidate;
use crate::ranker::{
    rank_order, score_batch, train_logistic, BuiltinScorer, FeatureVector, LogisticModel, ScoredCandidate, Scorer,
    ScoringRequest, TrainConfig,
};

/// Top predictions labeled per motion (and per evidence type) each iteration.
pub const DEFAULT_K: usize = 40;

/// A retrieved candidate with everything needed to score it.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolItem {
    pub candidate: Candidate,
    pub request: ScoringRequest,
}

impl PoolItem {
    pub fn pair(&self) -> PairKey {
        PairKey::new(self.candidate.motion_id.clone(), self.candidate.sentence.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    pub k: usize,
    /// Take the top k separately for each evidence type.
    pub per_type: bool,
    pub iterations: usize,
    pub filter: FilterConfig,
    pub min_trusted: usize,
    /// Rounds of extra judgments requested for under-labeled pairs.
    pub top_up_rounds: usize,
    pub train: TrainConfig,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            per_type: true,
            iterations: 1,
            filter: FilterConfig::default(),
            min_trusted: DEFAULT_MIN_TRUSTED,
            top_up_rounds: 3,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IterationOutcome {
    pub snapshot: DatasetSnapshot,
    /// Pairs sent for annotation, in selection order.
    pub selected: Vec<PairKey>,
    /// Judgments gathered in this iteration, top-ups included.
    pub records: Vec<LabelRecord>,
    pub filter: FilterOutcome,
    pub aggregation: Aggregation,
}

fn select_top_k(scored: Vec<ScoredCandidate>, k: usize, per_type: bool) -> Vec<PairKey> {
    let mut groups: BTreeMap<(String, Option<EvidenceType>), Vec<ScoredCandidate>> = BTreeMap::new();
    for s in scored {
        let ty = per_type.then_some(s.candidate.evidence_type);
        groups.entry((s.candidate.motion_id.clone(), ty)).or_default().push(s);
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for ((motion, ty), mut group) in groups {
        group.sort_by(rank_order);
        let before = out.len();
        for s in group {
            if out.len() - before == k {
                break;
            }
            let pair = PairKey::new(s.candidate.motion_id, s.candidate.sentence);
            if seen.insert(pair.clone()) {
                out.push(pair);
            }
        }
        if out.len() - before < k {
            log::warn!(
                "motion {motion}{}: only {} candidates for k = {k}",
                ty.map(|t| format!(" ({t})")).unwrap_or_default(),
                out.len() - before
            );
        }
    }
    out
}

/// One round: score the unlabeled pool, label each group's top k, aggregate
/// the judgments and extend the dataset.
///
/// `history` holds judgments from earlier iterations; annotator trust is
/// assessed over history and new judgments together.
pub fn retrospective_iteration(
    pool: &[PoolItem],
    scorer: &mut dyn Scorer,
    source: &mut dyn AnnotationSource,
    accumulated: &DatasetSnapshot,
    history: &[LabelRecord],
    config: &LoopConfig,
) -> Result<IterationOutcome, LabelError> {
    if config.k == 0 {
        return Err(LabelError::ZeroK);
    }
    let labeled: BTreeSet<&PairKey> = accumulated.pairs.iter().map(|p| &p.pair).collect();
    let eligible: Vec<&PoolItem> = pool.iter().filter(|item| !labeled.contains(&item.pair())).collect();
    let candidates: Vec<Candidate> = eligible.iter().map(|i| i.candidate.clone()).collect();
    let requests: Vec<ScoringRequest> = eligible.iter().map(|i| i.request.clone()).collect();
    let scored = score_batch(scorer, &candidates, &requests)?;
    let selected = select_top_k(scored, config.k, config.per_type);

    let mut records = source.annotate(&selected)?;
    let selected_set: BTreeSet<&PairKey> = selected.iter().collect();
    let mut round = 0;
    let (filter, aggregation) = loop {
        let all: Vec<LabelRecord> = history.iter().chain(&records).cloned().collect();
        let filter = filter_annotators(&all, &config.filter);
        let current: Vec<LabelRecord> = records.iter().filter(|r| selected_set.contains(&r.pair())).cloned().collect();
        let mut aggregation = aggregate_labels(&current, &filter.trusted, config.min_trusted);
        // selected pairs nobody judged
        let judged: BTreeSet<PairKey> = current.iter().map(LabelRecord::pair).collect();
        for p in &selected {
            if !judged.contains(p) {
                aggregation.under_labeled.push((p.clone(), 0));
            }
        }
        aggregation.under_labeled.sort();
        if aggregation.under_labeled.is_empty() || round == config.top_up_rounds {
            break (filter, aggregation);
        }
        round += 1;
        let need: Vec<(PairKey, usize)> =
            aggregation.under_labeled.iter().map(|(p, have)| (p.clone(), config.min_trusted - have)).collect();
        let extra = source.top_up(&need)?;
        if extra.is_empty() {
            break (filter, aggregation);
        }
        records.extend(extra);
    };

    let iteration = accumulated.iteration + 1;
    let mut pairs = accumulated.pairs.clone();
    pairs.extend(aggregation.labels.iter().map(|l| GoldPair { pair: l.pair.clone(), gold: l.gold, iteration }));
    Ok(IterationOutcome { snapshot: DatasetSnapshot::from_pairs(iteration, pairs), selected, records, filter, aggregation })
}

#[derive(Debug, Clone)]
pub struct LoopOutcome {
    /// One snapshot per iteration.
    pub snapshots: Vec<DatasetSnapshot>,
    /// The model trained after each iteration.
    pub models: Vec<LogisticModel>,
    pub records: Vec<LabelRecord>,
    /// Pairs still short of trusted judgments after the last iteration.
    pub under_labeled: Vec<(PairKey, usize)>,
}

/// Training examples for every gold pair present in the pool.
pub fn training_data(pool: &[PoolItem], snapshot: &DatasetSnapshot) -> Vec<(FeatureVector, bool)> {
    let mut features: BTreeMap<PairKey, &FeatureVector> = BTreeMap::new();
    for item in pool {
        features.entry(item.pair()).or_insert(&item.request.features);
    }
    snapshot
        .pairs
        .iter()
        .filter_map(|g| features.get(&g.pair).map(|fv| ((*fv).clone(), g.gold.is_positive())))
        .collect()
}

/// Iteration i ranks with the model trained after iteration i − 1 (the
/// bootstrap model first), labels the top k and retrains on everything
/// labeled so far.
pub fn run_loop(
    pool: &[PoolItem],
    bootstrap: &LogisticModel,
    source: &mut dyn AnnotationSource,
    config: &LoopConfig,
) -> Result<LoopOutcome, LabelError> {
    if config.iterations == 0 {
        return Err(LabelError::ZeroIterations);
    }
    let mut model = bootstrap.clone();
    let mut snapshot = DatasetSnapshot::empty();
    let mut records: Vec<LabelRecord> = Vec::new();
    let mut out = LoopOutcome { snapshots: Vec::new(), models: Vec::new(), records: Vec::new(), under_labeled: Vec::new() };
    for _ in 0..config.iterations {
        let mut scorer = BuiltinScorer { model: model.clone() };
        let step = retrospective_iteration(pool, &mut scorer, source, &snapshot, &records, config)?;
        records.extend(step.records);
        snapshot = step.snapshot;
        let data = training_data(pool, &snapshot);
        if !data.is_empty() {
            model = train_logistic(&data, &config.train)?;
        }
        out.snapshots.push(snapshot.clone());
        out.models.push(model.clone());
        out.under_labeled = step.aggregation.under_labeled;
    }
    out.records = records;
    Ok(out)
}
