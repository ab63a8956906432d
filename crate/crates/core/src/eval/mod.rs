//! Precision@k and diversity curves, Welch's t-test and CSV reports.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use statrs::function::beta::beta_reg;

use crate::labeling::{Label, PairKey};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("k values must be positive and strictly increasing")]
    BadGrid,
    #[error("k = {k} exceeds the {len} ranked candidates")]
    PrefixTooShort { k: usize, len: usize },
    #[error("no gold label for {} pair(s) in the ranked prefix: {}", .0.len(), list(.0))]
    MissingGold(Vec<PairKey>),
    #[error("curves use different k grids")]
    GridMismatch,
    #[error("no curves to average")]
    NoCurves,
    #[error("t-test needs two samples of at least 2 values and nonzero variance (got {a} and {b} values)")]
    DegenerateSample { a: usize, b: usize },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn list(pairs: &[PairKey]) -> String {
    pairs.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrecisionCurve {
    /// (k, precision@k), k strictly increasing
    pub points: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiversityCurve {
    /// (k, average distinct documents, average distinct sources)
    pub points: Vec<(usize, f64, f64)>,
}

fn check_grid(ks: &[usize]) -> Result<(), EvalError> {
    if ks.first() == Some(&0) || ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::BadGrid);
    }
    Ok(())
}

/// Positives among the top k over k. Every pair in the top `max(ks)` must
/// have a gold label; unlabeled pairs are never assumed negative.
pub fn precision_at_k(ranked: &[PairKey], gold: &BTreeMap<PairKey, Label>, ks: &[usize]) -> Result<PrecisionCurve, EvalError> {
    check_grid(ks)?;
    let Some(&max_k) = ks.last() else {
        return Ok(PrecisionCurve::default());
    };
    if max_k > ranked.len() {
        return Err(EvalError::PrefixTooShort { k: max_k, len: ranked.len() });
    }
    let prefix = &ranked[..max_k];
    let missing: Vec<PairKey> = prefix.iter().filter(|p| !gold.contains_key(p)).cloned().collect();
    if !missing.is_empty() {
        return Err(EvalError::MissingGold(missing));
    }
    let mut hits = Vec::with_capacity(max_k + 1);
    hits.push(0usize);
    for p in prefix {
        hits.push(hits.last().unwrap() + gold[p].is_positive() as usize);
    }
    Ok(PrecisionCurve { points: ks.iter().map(|&k| (k, hits[k] as f64 / k as f64)).collect() })
}

/// Order-independent mean: values are summed in sorted order.
fn mean(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// Pointwise mean over curves sharing one k grid.
pub fn average_curves(curves: &[PrecisionCurve]) -> Result<PrecisionCurve, EvalError> {
    let first = curves.first().ok_or(EvalError::NoCurves)?;
    let grid: Vec<usize> = first.points.iter().map(|p| p.0).collect();
    if curves.iter().any(|c| c.points.len() != grid.len() || c.points.iter().zip(&grid).any(|(p, k)| p.0 != *k)) {
        return Err(EvalError::GridMismatch);
    }
    let points = grid
        .iter()
        .enumerate()
        .map(|(i, &k)| (k, mean(curves.iter().map(|c| c.points[i].1).collect())))
        .collect();
    Ok(PrecisionCurve { points })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub doc_id: String,
    /// Journal, site or other origin of the document.
    pub source: String,
}

/// Distinct documents and sources among each list's top k, averaged over
/// lists. Lists shorter than k contribute all their items.
pub fn diversity_at_k(lists: &[Vec<Provenance>], ks: &[usize]) -> Result<DiversityCurve, EvalError> {
    check_grid(ks)?;
    if lists.is_empty() {
        return Ok(DiversityCurve { points: ks.iter().map(|&k| (k, 0.0, 0.0)).collect() });
    }
    let points = ks
        .iter()
        .map(|&k| {
            let (docs, sources): (Vec<f64>, Vec<f64>) = lists
                .iter()
                .map(|l| {
                    let top = &l[..k.min(l.len())];
                    let d: BTreeSet<&str> = top.iter().map(|p| p.doc_id.as_str()).collect();
                    let s: BTreeSet<&str> = top.iter().map(|p| p.source.as_str()).collect();
                    (d.len() as f64, s.len() as f64)
                })
                .unzip();
            (k, mean(docs), mean(sources))
        })
        .collect();
    Ok(DiversityCurve { points })
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TTest {
    pub t: f64,
    /// Two-sided.
    pub p: f64,
    /// Welch–Satterthwaite degrees of freedom.
    pub df: f64,
}

/// Two-sided Welch's t-test of `mean(a) = mean(b)`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTest, EvalError> {
    let degenerate = EvalError::DegenerateSample { a: a.len(), b: b.len() };
    if a.len() < 2 || b.len() < 2 || a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(degenerate);
    }
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = sa + sb;
    if se2 == 0.0 {
        return Err(degenerate);
    }
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    // P(|T| ≥ |t|) = I_{df/(df+t²)}(df/2, 1/2)
    let p = if t == 0.0 { 1.0 } else { beta_reg(df / 2.0, 0.5, df / (df + t * t)) };
    Ok(TTest { t, p, df })
}

/// Writes `<model>_<corpus>_precision.csv` (`k,precision`) and
/// `<model>_<corpus>_diversity.csv` (`k,avg_docs,avg_sources`) into `dir`.
pub fn emit_report(
    dir: &Path,
    model: &str,
    corpus: &str,
    precision: &PrecisionCurve,
    diversity: &DiversityCurve,
) -> Result<Vec<PathBuf>, EvalError> {
    std::fs::create_dir_all(dir)?;
    let p_path = dir.join(format!("{model}_{corpus}_precision.csv"));
    let mut w = csv::Writer::from_path(&p_path)?;
    w.write_record(["k", "precision"])?;
    for (k, p) in &precision.points {
        w.write_record([k.to_string(), p.to_string()])?;
    }
    w.flush()?;

    let d_path = dir.join(format!("{model}_{corpus}_diversity.csv"));
    let mut w = csv::Writer::from_path(&d_path)?;
    w.write_record(["k", "avg_docs", "avg_sources"])?;
    for (k, d, s) in &diversity.points {
        w.write_record([k.to_string(), d.to_string(), s.to_string()])?;
    }
    w.flush()?;
    Ok(vec![p_path, d_path])
}
