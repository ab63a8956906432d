use std::collections::{BTreeMap, BTreeSet};

use super::agreement::judgments_by_annotator;
use super::{Label, LabelRecord, PairKey};

pub const DEFAULT_MIN_TRUSTED: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregatedLabel {
    pub pair: PairKey,
    pub gold: Label,
    pub pos_count: usize,
    pub neg_count: usize,
    pub trusted_total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Aggregation {
    /// Sorted by pair.
    pub labels: Vec<AggregatedLabel>,
    /// Pairs short of `min_trusted` trusted judgments, with their current count.
    pub under_labeled: Vec<(PairKey, usize)>,
}

/// Majority vote over trusted annotators; ties are negative. Each annotator
/// counts once per pair.
pub fn aggregate_labels(records: &[LabelRecord], trusted: &BTreeSet<String>, min_trusted: usize) -> Aggregation {
    let mut counts: BTreeMap<PairKey, (usize, usize)> = BTreeMap::new();
    for (annotator, judgments) in judgments_by_annotator(records) {
        if !trusted.contains(&annotator) {
            continue;
        }
        for (pair, label) in judgments {
            let c = counts.entry(pair).or_default();
            match label {
                Label::Positive => c.0 += 1,
                Label::Negative => c.1 += 1,
            }
        }
    }
    // pairs judged only by untrusted annotators still need labels
    for r in records {
        counts.entry(r.pair()).or_default();
    }
    let mut out = Aggregation::default();
    for (pair, (pos, neg)) in counts {
        let total = pos + neg;
        if total < min_trusted || total == 0 {
            out.under_labeled.push((pair, total));
        } else {
            let gold = (pos > neg).into();
            out.labels.push(AggregatedLabel { pair, gold, pos_count: pos, neg_count: neg, trusted_total: total });
        }
    }
    out
}
