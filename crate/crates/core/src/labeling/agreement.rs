use std::collections::{BTreeMap, BTreeSet};

use super::{Label, LabelError, LabelRecord, PairKey};

/// Cohen's kappa for two aligned binary label lists.
///
/// Computed from integer counts, so fixtures with exact rational answers come
/// out exact. When chance agreement is 1 (both lists constant and equal) the
/// result is 1.
pub fn cohen_kappa(a: &[Label], b: &[Label]) -> Result<f64, LabelError> {
    if a.len() != b.len() || a.is_empty() {
        return Err(LabelError::KappaInput { a: a.len(), b: b.len() });
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let pos_a = a.iter().filter(|l| l.is_positive()).count() as f64;
    let pos_b = b.iter().filter(|l| l.is_positive()).count() as f64;
    // n² · p_e
    let chance = pos_a * pos_b + (n - pos_a) * (n - pos_b);
    let denom = n * n - chance;
    if denom == 0.0 {
        return Ok(if agree == n { 1.0 } else { 0.0 });
    }
    Ok((agree * n - chance) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConfig {
    /// Pairs of annotators sharing fewer items are ignored.
    pub min_common: usize,
    pub min_avg_kappa: f64,
    /// Stop after this many discarding passes; `None` runs to a fixed point.
    pub max_passes: Option<usize>,
    /// Keep annotators that share `min_common` items with nobody.
    pub trust_isolated: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self { min_common: 50, min_avg_kappa: 0.3, max_passes: None, trust_isolated: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatorReport {
    pub annotator_id: String,
    /// other annotator → (kappa, common item count), qualifying pairs only
    pub pairwise: BTreeMap<String, (f64, usize)>,
    /// `None` when the annotator has no qualifying pair.
    pub weighted_avg_kappa: Option<f64>,
    pub trusted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutcome {
    pub trusted: BTreeSet<String>,
    /// One report per annotator, sorted by id. Discarded annotators carry the
    /// statistics of the pass that discarded them.
    pub reports: Vec<AnnotatorReport>,
    pub passes: usize,
}

/// Per-annotator judgments. Repeated judgments of one pair by one annotator
/// collapse to positive only if all of them are positive.
pub(crate) fn judgments_by_annotator(records: &[LabelRecord]) -> BTreeMap<String, BTreeMap<PairKey, Label>> {
    let mut out: BTreeMap<String, BTreeMap<PairKey, Label>> = BTreeMap::new();
    for r in records {
        out.entry(r.annotator_id.clone())
            .or_default()
            .entry(r.pair())
            .and_modify(|l| *l = (*l).min(r.label))
            .or_insert(r.label);
    }
    out
}

fn pair_stats(a: &BTreeMap<PairKey, Label>, b: &BTreeMap<PairKey, Label>, min_common: usize) -> Option<(f64, usize)> {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let (mut la, mut lb) = (Vec::new(), Vec::new());
    for (pair, l) in small {
        if let Some(m) = large.get(pair) {
            la.push(*l);
            lb.push(*m);
        }
    }
    if la.len() < min_common.max(1) {
        return None;
    }
    let kappa = cohen_kappa(&la, &lb).expect("aligned non-empty lists");
    Some((kappa, la.len()))
}

fn reports_for(
    active: &BTreeSet<String>,
    judgments: &BTreeMap<String, BTreeMap<PairKey, Label>>,
    min_common: usize,
) -> BTreeMap<String, AnnotatorReport> {
    let ids: Vec<&String> = active.iter().collect();
    let mut pairwise: BTreeMap<&String, BTreeMap<String, (f64, usize)>> = ids.iter().map(|id| (*id, BTreeMap::new())).collect();
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            if let Some(stats) = pair_stats(&judgments[*a], &judgments[*b], min_common) {
                pairwise.get_mut(a).unwrap().insert((*b).clone(), stats);
                pairwise.get_mut(b).unwrap().insert((*a).clone(), stats);
            }
        }
    }
    pairwise
        .into_iter()
        .map(|(id, pw)| {
            let total: usize = pw.values().map(|&(_, n)| n).sum();
            let avg = (total > 0).then(|| pw.values().map(|&(k, n)| k * n as f64).sum::<f64>() / total as f64);
            (id.clone(), AnnotatorReport { annotator_id: id.clone(), pairwise: pw, weighted_avg_kappa: avg, trusted: true })
        })
        .collect()
}

/// Discards low-agreement annotators. Each pass recomputes pairwise kappas
/// among the remaining annotators and drops every annotator whose weighted
/// average falls below `min_avg_kappa`; passes repeat until nobody is dropped.
pub fn filter_annotators(records: &[LabelRecord], config: &FilterConfig) -> FilterOutcome {
    let judgments = judgments_by_annotator(records);
    let mut active: BTreeSet<String> = judgments.keys().cloned().collect();
    let mut discarded: BTreeMap<String, AnnotatorReport> = BTreeMap::new();
    let mut passes = 0;
    loop {
        let reports = reports_for(&active, &judgments, config.min_common);
        let drop: Vec<String> = reports
            .values()
            .filter(|r| match r.weighted_avg_kappa {
                Some(k) => k < config.min_avg_kappa,
                None => !config.trust_isolated,
            })
            .map(|r| r.annotator_id.clone())
            .collect();
        let limit_hit = config.max_passes.is_some_and(|m| passes >= m);
        if drop.is_empty() || limit_hit {
            let mut all = discarded;
            all.extend(reports);
            return FilterOutcome { trusted: active, reports: all.into_values().collect(), passes };
        }
        passes += 1;
        for id in drop {
            active.remove(&id);
            let mut r = reports[&id].clone();
            r.trusted = false;
            discarded.insert(id, r);
        }
    }
}

/// Σ κ·n / Σ n over unordered pairs of trusted annotators.
pub fn weighted_overall_kappa(reports: &[AnnotatorReport]) -> Result<f64, LabelError> {
    let trusted: BTreeSet<&str> = reports.iter().filter(|r| r.trusted).map(|r| r.annotator_id.as_str()).collect();
    let (mut num, mut den) = (0.0, 0usize);
    for r in reports.iter().filter(|r| r.trusted) {
        for (other, &(k, n)) in &r.pairwise {
            if r.annotator_id.as_str() < other.as_str() && trusted.contains(other.as_str()) {
                num += k * n as f64;
                den += n;
            }
        }
    }
    if den == 0 {
        return Err(LabelError::NoQualifyingPairs);
    }
    Ok(num / den as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SentenceId;
    use proptest::prelude::*;
    use Label::{Negative as N, Positive as P};

    fn labels(s: &str) -> Vec<Label> {
        s.chars().map(|c| if c == '+' { P } else { N }).collect()
    }

    #[test]
    fn kappa_hand_values() {
        assert_eq!(cohen_kappa(&labels("++--"), &labels("+--+")).unwrap(), 0.0);
        assert_eq!(cohen_kappa(&labels("+-+-"), &labels("-+-+")).unwrap(), -1.0);
        assert_eq!(cohen_kappa(&labels("+-+--"), &labels("+-+--")).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&labels("+++"), &labels("+++")).unwrap(), 1.0);
        assert_eq!(cohen_kappa(&labels("---"), &labels("---")).unwrap(), 1.0);
        // one constant list: p_e = p_o, kappa 0
        assert_eq!(cohen_kappa(&labels("++++"), &labels("++--")).unwrap(), 0.0);
    }

    #[test]
    fn kappa_rejects_bad_input() {
        assert!(cohen_kappa(&[], &[]).is_err());
        assert!(cohen_kappa(&labels("+-"), &labels("+")).is_err());
    }

    proptest! {
        #[test]
        fn kappa_symmetric_and_bounded(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..60)) {
            let a: Vec<Label> = pairs.iter().map(|p| p.0.into()).collect();
            let b: Vec<Label> = pairs.iter().map(|p| p.1.into()).collect();
            let k = cohen_kappa(&a, &b).unwrap();
            prop_assert_eq!(k, cohen_kappa(&b, &a).unwrap());
            prop_assert!((-1.0..=1.0).contains(&k));
            if a.iter().any(|l| *l != a[0]) {
                prop_assert_eq!(cohen_kappa(&a, &a).unwrap(), 1.0);
            }
        }
    }

    fn rec(item: u32, annotator: &str, label: Label) -> LabelRecord {
        LabelRecord::new(&PairKey::new("m", SentenceId::new("d", item)), annotator, label)
    }

    fn truth(i: u32) -> Label {
        i.is_multiple_of(3).into()
    }

    #[test]
    fn identical_annotators_all_trusted() {
        let records: Vec<_> = (0..60).flat_map(|i| ["a", "b", "c"].map(|a| rec(i, a, truth(i)))).collect();
        let out = filter_annotators(&records, &FilterConfig::default());
        assert_eq!(out.trusted.len(), 3);
        for r in &out.reports {
            assert!(r.pairwise.values().all(|&(k, n)| k == 1.0 && n == 60));
        }
        assert_eq!(weighted_overall_kappa(&out.reports).unwrap(), 1.0);
    }

    #[test]
    fn adversary_discarded() {
        let mut records: Vec<_> = (0..100).flat_map(|i| ["a", "b", "c"].map(|a| rec(i, a, truth(i)))).collect();
        records.extend((0..100).map(|i| rec(i, "evil", truth(i).flipped())));
        let out = filter_annotators(&records, &FilterConfig::default());
        assert_eq!(out.trusted, ["a", "b", "c"].into_iter().map(String::from).collect());
        let evil = out.reports.iter().find(|r| r.annotator_id == "evil").unwrap();
        assert!(!evil.trusted);
        // 34 of 100 items positive: agreement 0, n²·p_e = 2·34·66 = 4488
        assert!((evil.weighted_avg_kappa.unwrap() + 4488.0 / 5512.0).abs() < 1e-12);
        assert_eq!(out.passes, 1);
    }

    #[test]
    fn small_overlap_has_no_entry() {
        let records: Vec<_> = (0..10).flat_map(|i| ["a", "b"].map(|a| rec(i, a, truth(i)))).collect();
        let out = filter_annotators(&records, &FilterConfig::default());
        assert!(out.reports.iter().all(|r| r.pairwise.is_empty() && r.weighted_avg_kappa.is_none()));
        assert_eq!(out.trusted.len(), 2);
        assert!(weighted_overall_kappa(&out.reports).is_err());
        let strict = filter_annotators(&records, &FilterConfig { trust_isolated: false, ..Default::default() });
        assert!(strict.trusted.is_empty());
    }

    #[test]
    fn pass_limit_stops_early() {
        let mut records: Vec<_> = (0..100).flat_map(|i| ["a", "b", "c"].map(|a| rec(i, a, truth(i)))).collect();
        records.extend((0..100).map(|i| rec(i, "evil", truth(i).flipped())));
        let none = filter_annotators(&records, &FilterConfig { max_passes: Some(0), ..Default::default() });
        assert_eq!(none.passes, 0);
        assert_eq!(none.trusted.len(), 4);
    }

    #[test]
    fn second_pass_recomputes() {
        // x disagrees with everyone
        let mut records: Vec<_> = (0..100).flat_map(|i| ["a", "b", "c", "d"].map(|a| rec(i, a, truth(i)))).collect();
        records.extend((0..100).map(|i| rec(i, "x", truth(i).flipped())));
        // y judged only 60 items
        records.extend((0..60).map(|i| rec(i, "y", truth(i))));
        let out = filter_annotators(&records, &FilterConfig::default());
        assert!(!out.trusted.contains("x"));
        assert!(out.trusted.contains("y"));
        for r in out.reports.iter().filter(|r| r.trusted) {
            assert!(!r.pairwise.contains_key("x"));
        }
    }

    #[test]
    fn weighted_overall_hand_value() {
        let r = |id: &str, pw: &[(&str, f64, usize)]| AnnotatorReport {
            annotator_id: id.into(),
            pairwise: pw.iter().map(|&(o, k, n)| (o.to_string(), (k, n))).collect(),
            weighted_avg_kappa: None,
            trusted: true,
        };
        let reports = [
            r("a", &[("b", 1.0, 50), ("c", 0.0, 150)]),
            r("b", &[("a", 1.0, 50)]),
            r("c", &[("a", 0.0, 150)]),
        ];
        assert_eq!(weighted_overall_kappa(&reports).unwrap(), 0.25);
        assert!(weighted_overall_kappa(&reports[..1]).is_err());
    }

    #[test]
    fn duplicate_judgments_collapse() {
        let records = [rec(0, "a", P), rec(0, "a", N)];
        let j = judgments_by_annotator(&records);
        assert_eq!(j["a"].values().copied().collect::<Vec<_>>(), [N]);
    }
}
