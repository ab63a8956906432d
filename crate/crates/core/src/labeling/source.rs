use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{read_label_records, Label, LabelError, LabelRecord, PairKey};

/// Supplies crowd judgments for selected pairs.
pub trait AnnotationSource {
    /// Initial judgments for newly selected pairs.
    fn annotate(&mut self, pairs: &[PairKey]) -> Result<Vec<LabelRecord>, LabelError>;

    /// Up to `need` further judgments per pair, from annotators that have not
    /// judged it yet. An empty answer means no more are available.
    fn top_up(&mut self, requests: &[(PairKey, usize)]) -> Result<Vec<LabelRecord>, LabelError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatorProfile {
    pub id: String,
    /// Probability of flipping a judgment, in `[0, 0.5)`.
    pub noise: f64,
    /// Inverts the truth before noise is applied.
    pub adversarial: bool,
}

impl AnnotatorProfile {
    pub fn honest(id: impl Into<String>, noise: f64) -> Self {
        Self { id: id.into(), noise, adversarial: false }
    }
}

/// Simulated crowd answering from a ground-truth table.
#[derive(Debug, Clone)]
pub struct OracleAnnotators {
    truth: BTreeMap<PairKey, Label>,
    annotators: Vec<AnnotatorProfile>,
    per_pair: usize,
    rng: ChaCha8Rng,
    used: BTreeMap<PairKey, BTreeSet<usize>>,
}

impl OracleAnnotators {
    pub fn new(
        truth: BTreeMap<PairKey, Label>,
        annotators: Vec<AnnotatorProfile>,
        per_pair: usize,
        seed: u64,
    ) -> Result<Self, LabelError> {
        for a in &annotators {
            if !(0.0..0.5).contains(&a.noise) {
                return Err(LabelError::InvalidNoise { annotator: a.id.clone(), noise: a.noise });
            }
        }
        Ok(Self { truth, annotators, per_pair, rng: ChaCha8Rng::seed_from_u64(seed), used: BTreeMap::new() })
    }

    /// `n` noise-free annotators, all of whom judge every pair.
    pub fn noiseless(truth: BTreeMap<PairKey, Label>, n: usize, seed: u64) -> Self {
        let annotators = (0..n).map(|i| AnnotatorProfile::honest(format!("oracle{i}"), 0.0)).collect();
        Self::new(truth, annotators, n, seed).expect("zero noise is valid")
    }

    fn draw(&mut self, pair: &PairKey, want: usize, out: &mut Vec<LabelRecord>) -> Result<(), LabelError> {
        let truth = *self.truth.get(pair).ok_or_else(|| LabelError::UnknownPair(pair.clone()))?;
        let used = self.used.entry(pair.clone()).or_default();
        let free: Vec<usize> = (0..self.annotators.len()).filter(|i| !used.contains(i)).collect();
        let take = want.min(free.len());
        let mut picked: Vec<usize> = sample(&mut self.rng, free.len(), take).into_iter().map(|j| free[j]).collect();
        picked.sort_unstable();
        for i in picked {
            used.insert(i);
            let a = &self.annotators[i];
            let mut label = if a.adversarial { truth.flipped() } else { truth };
            if self.rng.random::<f64>() < a.noise {
                label = label.flipped();
            }
            out.push(LabelRecord::new(pair, a.id.clone(), label));
        }
        Ok(())
    }
}

impl AnnotationSource for OracleAnnotators {
    fn annotate(&mut self, pairs: &[PairKey]) -> Result<Vec<LabelRecord>, LabelError> {
        let mut out = Vec::new();
        for p in pairs {
            self.draw(p, self.per_pair, &mut out)?;
        }
        Ok(out)
    }

    fn top_up(&mut self, requests: &[(PairKey, usize)]) -> Result<Vec<LabelRecord>, LabelError> {
        let mut out = Vec::new();
        for (p, need) in requests {
            self.draw(p, *need, &mut out)?;
        }
        Ok(out)
    }
}

/// Judgments collected offline, read from a label records file.
#[derive(Debug, Clone, Default)]
pub struct FileSource {
    records: Vec<LabelRecord>,
}

impl FileSource {
    pub fn new(records: Vec<LabelRecord>) -> Self {
        Self { records }
    }

    pub fn from_file(path: &Path) -> Result<Self, LabelError> {
        Ok(Self::new(read_label_records(path)?))
    }
}

impl AnnotationSource for FileSource {
    fn annotate(&mut self, pairs: &[PairKey]) -> Result<Vec<LabelRecord>, LabelError> {
        let wanted: BTreeSet<&PairKey> = pairs.iter().collect();
        Ok(self.records.iter().filter(|r| wanted.contains(&r.pair())).cloned().collect())
    }

    /// Offline labels cannot grow; under-labeled pairs go to a needs-labels file.
    fn top_up(&mut self, _requests: &[(PairKey, usize)]) -> Result<Vec<LabelRecord>, LabelError> {
        Ok(Vec::new())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::SentenceId;

    fn truth(n: u32) -> BTreeMap<PairKey, Label> {
        (0..n).map(|i| (PairKey::new("m", SentenceId::new("d", i)), (i % 2 == 0).into())).collect()
    }

    #[test]
    fn noiseless_matches_truth() {
        let t = truth(5);
        let mut o = OracleAnnotators::noiseless(t.clone(), 10, 1);
        let pairs: Vec<PairKey> = t.keys().cloned().collect();
        let recs = o.annotate(&pairs).unwrap();
        assert_eq!(recs.len(), 50);
        assert!(recs.iter().all(|r| t[&r.pair()] == r.label));
    }

    #[test]
    fn per_pair_count_and_top_up_uses_fresh_annotators() {
        let t = truth(3);
        let profiles = (0..12).map(|i| AnnotatorProfile::honest(format!("a{i}"), 0.2)).collect();
        let mut o = OracleAnnotators::new(t.clone(), profiles, 10, 7).unwrap();
        let p = t.keys().next().unwrap().clone();
        let first = o.annotate(std::slice::from_ref(&p)).unwrap();
        assert_eq!(first.len(), 10);
        let more = o.top_up(&[(p.clone(), 5)]).unwrap();
        assert_eq!(more.len(), 2);
        let ids: BTreeSet<&str> = first.iter().chain(&more).map(|r| r.annotator_id.as_str()).collect();
        assert_eq!(ids.len(), 12);
        assert!(o.top_up(&[(p, 1)]).unwrap().is_empty());
    }

    #[test]
    fn seeded_runs_repeat() {
        let t = truth(20);
        let pairs: Vec<PairKey> = t.keys().cloned().collect();
        let profiles: Vec<_> = (0..10).map(|i| AnnotatorProfile::honest(format!("a{i}"), 0.3)).collect();
        let run = |seed| OracleAnnotators::new(t.clone(), profiles.clone(), 5, seed).unwrap().annotate(&pairs).unwrap();
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn noise_validated_and_unknown_pair_fails() {
        assert!(OracleAnnotators::new(truth(1), vec![AnnotatorProfile::honest("a", 0.5)], 1, 0).is_err());
        let mut o = OracleAnnotators::noiseless(truth(1), 1, 0);
        let stranger = PairKey::new("other", SentenceId::new("d", 0));
        assert!(matches!(o.annotate(&[stranger]), Err(LabelError::UnknownPair(_))));
    }

    #[test]
    fn file_source_filters_pairs() {
        let p0 = PairKey::new("m", SentenceId::new("d", 0));
        let p1 = PairKey::new("m", SentenceId::new("d", 1));
        let mut f = FileSource::new(vec![LabelRecord::new(&p0, "a", Label::Positive), LabelRecord::new(&p1, "a", Label::Negative)]);
        assert_eq!(f.annotate(std::slice::from_ref(&p1)).unwrap().len(), 1);
        assert!(f.top_up(&[(p1, 3)]).unwrap().is_empty());
    }
}
