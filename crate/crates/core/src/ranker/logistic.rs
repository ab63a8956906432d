use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{FeatureVector, RankError};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LogisticModel {
    pub weights: BTreeMap<String, f64>,
    pub bias: f64,
}

impl LogisticModel {
    /// Model with every weight and the bias negated.
    pub fn negated(&self) -> Self {
        Self { weights: self.weights.iter().map(|(k, v)| (k.clone(), -v)).collect(), bias: -self.bias }
    }

    /// `bias + Σ wᵢ·xᵢ`, summed in feature-id order.
    pub fn margin(&self, fv: &FeatureVector) -> f64 {
        let mut z = self.bias;
        for (id, x) in fv.iter() {
            if let Some(w) = self.weights.get(id) {
                z += w * x;
            }
        }
        z
    }

    /// Parses `bias <value>` followed by `feature_id <weight>` lines.
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, RankError> {
        let mut bias = None;
        let mut weights = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |message: String| RankError::ModelFile { line: line_no, message };
            let mut parts = line.split_whitespace();
            let (Some(id), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(bad(format!("expected `<id> <value>`, got `{line}`")));
            };
            let value: f64 = value.parse().map_err(|_| bad(format!("bad number `{value}`")))?;
            if !value.is_finite() {
                return Err(bad(format!("non-finite value for `{id}`")));
            }
            if bias.is_none() {
                if id != "bias" {
                    return Err(bad("first entry must be `bias`".into()));
                }
                bias = Some(value);
            } else if weights.insert(id.to_string(), value).is_some() || id == "bias" {
                return Err(bad(format!("duplicate entry `{id}`")));
            }
        }
        let bias = bias.ok_or(RankError::ModelFile { line: 0, message: "missing `bias` line".into() })?;
        Ok(Self { weights, bias })
    }

    /// Serializes in feature-id order with round-trip exact floats.
    pub fn to_text(&self) -> String {
        let mut out = format!("bias {:?}\n", self.bias);
        for (id, w) in &self.weights {
            let _ = writeln!(out, "{id} {w:?}");
        }
        out
    }

    pub fn from_file(path: &Path) -> Result<Self, RankError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), RankError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn logistic_score(model: &LogisticModel, fv: &FeatureVector) -> f64 {
    sigmoid(model.margin(fv))
}

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    /// Initial step size of each epoch; halved until the objective does not increase.
    pub learning_rate: f64,
    pub epochs: usize,
    /// L2 penalty on weights (not the bias).
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 1.0, epochs: 300, l2: 1e-3 }
    }
}

/// Mean cross-entropy plus `l2/2 · ‖w‖²`.
pub fn objective(model: &LogisticModel, data: &[(FeatureVector, bool)], l2: f64) -> f64 {
    let n = data.len().max(1) as f64;
    let ce: f64 = data
        .iter()
        .map(|(fv, y)| {
            let z = model.margin(fv);
            if *y {
                softplus(-z)
            } else {
                softplus(z)
            }
        })
        .sum();
    ce / n + 0.5 * l2 * model.weights.values().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`objective`]: `(d/dw, d/dbias)`. Covers every
/// feature in the model or the data.
pub fn objective_gradient(model: &LogisticModel, data: &[(FeatureVector, bool)], l2: f64) -> (BTreeMap<String, f64>, f64) {
    let n = data.len().max(1) as f64;
    let mut grad: BTreeMap<String, f64> = model.weights.iter().map(|(k, w)| (k.clone(), l2 * w)).collect();
    let mut gb = 0.0;
    for (fv, y) in data {
        let r = (sigmoid(model.margin(fv)) - if *y { 1.0 } else { 0.0 }) / n;
        gb += r;
        for (id, x) in fv.iter() {
            *grad.entry(id.to_string()).or_insert(0.0) += r * x;
        }
    }
    (grad, gb)
}

/// Dense view of the training data for fast epochs.
struct Dense {
    rows: Vec<Vec<(usize, f64)>>,
    labels: Vec<f64>,
    ids: Vec<String>,
}

impl Dense {
    fn new(data: &[(FeatureVector, bool)]) -> Self {
        let mut ids: Vec<String> = data.iter().flat_map(|(fv, _)| fv.iter().map(|(k, _)| k.to_string())).collect();
        ids.sort();
        ids.dedup();
        let rows = data
            .iter()
            .map(|(fv, _)| fv.iter().map(|(k, v)| (ids.binary_search_by(|i| i.as_str().cmp(k)).unwrap(), v)).collect())
            .collect();
        let labels = data.iter().map(|(_, y)| if *y { 1.0 } else { 0.0 }).collect();
        Self { rows, labels, ids }
    }

    fn objective(&self, w: &[f64], b: f64, l2: f64) -> f64 {
        let n = self.rows.len() as f64;
        let ce: f64 = self
            .rows
            .iter()
            .zip(&self.labels)
            .map(|(row, y)| {
                let z = b + row.iter().map(|&(j, x)| w[j] * x).sum::<f64>();
                if *y > 0.5 {
                    softplus(-z)
                } else {
                    softplus(z)
                }
            })
            .sum();
        ce / n + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>()
    }

    fn gradient(&self, w: &[f64], b: f64, l2: f64) -> (Vec<f64>, f64) {
        let n = self.rows.len() as f64;
        let mut g: Vec<f64> = w.iter().map(|v| l2 * v).collect();
        let mut gb = 0.0;
        for (row, y) in self.rows.iter().zip(&self.labels) {
            let z = b + row.iter().map(|&(j, x)| w[j] * x).sum::<f64>();
            let r = (sigmoid(z) - y) / n;
            gb += r;
            for &(j, x) in row {
                g[j] += r * x;
            }
        }
        (g, gb)
    }
}

/// Full-batch gradient descent with step halving, so the objective never
/// increases between epochs. Returns the model and the objective after each
/// epoch (index 0 is the starting objective).
pub fn train_logistic_with_history(
    data: &[(FeatureVector, bool)],
    config: &TrainConfig,
) -> Result<(LogisticModel, Vec<f64>), RankError> {
    if data.is_empty() {
        return Err(RankError::EmptyTrainingData);
    }
    let dense = Dense::new(data);
    let mut w = vec![0.0; dense.ids.len()];
    let mut b = 0.0;
    let mut loss = dense.objective(&w, b, config.l2);
    let mut history = vec![loss];
    for _ in 0..config.epochs {
        let (g, gb) = dense.gradient(&w, b, config.l2);
        let mut step = config.learning_rate;
        let mut accepted = false;
        for _ in 0..40 {
            let w2: Vec<f64> = w.iter().zip(&g).map(|(wi, gi)| wi - step * gi).collect();
            let b2 = b - step * gb;
            let l2 = dense.objective(&w2, b2, config.l2);
            if l2 <= loss {
                w = w2;
                b = b2;
                loss = l2;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        history.push(loss);
        if !accepted {
            break;
        }
    }
    let weights = dense.ids.into_iter().zip(w).filter(|(_, v)| *v != 0.0).collect();
    Ok((LogisticModel { weights, bias: b }, history))
}

pub fn train_logistic(data: &[(FeatureVector, bool)], config: &TrainConfig) -> Result<LogisticModel, RankError> {
    train_logistic_with_history(data, config).map(|(m, _)| m)
}
