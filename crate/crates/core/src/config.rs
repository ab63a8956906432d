//! Run configuration, read from TOML. Relative paths resolve against the
//! directory holding the config file.
//!
//! ```toml
//! seed = 7
//! k = 40
//!
//! [paths]
//! corpus = "corpus.jsonl"
//! lexicons = ["study.lex", "expert.lex", "sentiment.lex"]
//! redirects = "redirects.tsv"
//! cascades = "cascades.txt"
//! motions = "motions.csv"
//! index = "out/sample.evix"
//! out = "out"
//! ```

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;

use crate::annotator::DEFAULT_MASK_TOKEN;
use crate::labeling::DEFAULT_K;
use crate::ranker::{ExternalSpec, InputVariant};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("config value `{field}` = {value} outside {range}")]
    OutOfRange { field: &'static str, value: String, range: &'static str },
    #[error("{field}: file {} does not exist", path.display())]
    MissingFile { field: &'static str, path: PathBuf },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    pub corpus: PathBuf,
    #[serde(default)]
    pub lexicons: Vec<PathBuf>,
    pub redirects: PathBuf,
    #[serde(default)]
    pub gazetteer: Option<PathBuf>,
    pub cascades: PathBuf,
    pub motions: PathBuf,
    pub index: PathBuf,
    /// Crowd label records (`motion_id,doc_id,sent_idx,annotator_id,label`).
    #[serde(default)]
    pub labels: Option<PathBuf>,
    /// Ground truth (`motion_id,doc_id,sent_idx,label`) for simulated annotators.
    #[serde(default)]
    pub truth: Option<PathBuf>,
    /// Bootstrap model; an empty model when absent.
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(default)]
    pub stop_words: Option<PathBuf>,
    /// Directory for every generated artifact.
    pub out: PathBuf,
    /// Report directory; `<out>/reports` when absent.
    #[serde(default)]
    pub reports: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    pub dedup: f64,
    pub binarize: f64,
    pub kappa: f64,
    pub min_common: usize,
    pub min_trusted: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { dedup: 0.8, binarize: 0.5, kappa: 0.3, min_common: 50, min_trusted: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
pub enum ScorerConfig {
    Builtin,
    External {
        command: Vec<String>,
        #[serde(default = "default_variant")]
        variant: String,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
    },
}

fn default_variant() -> String {
    "S+M".into()
}

fn default_timeout_ms() -> u64 {
    30_000
}

/// Simulated crowd used by `label-loop` when ground truth is configured.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Simulation {
    pub annotators: usize,
    pub per_pair: usize,
    pub noise: f64,
}

impl Default for Simulation {
    fn default() -> Self {
        Self { annotators: 12, per_pair: 10, noise: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    /// Overrides every cascade's cap.
    #[serde(default)]
    pub cap: Option<usize>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_true")]
    pub per_type: bool,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_mask")]
    pub mask_token: String,
    /// Grid for precision and diversity curves.
    #[serde(default = "default_ks")]
    pub eval_ks: Vec<usize>,
    pub paths: Paths,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default = "default_scorer")]
    pub scorer: ScorerConfig,
    #[serde(default)]
    pub simulation: Simulation,
}

fn default_k() -> usize {
    DEFAULT_K
}

fn default_true() -> bool {
    true
}

fn default_iterations() -> usize {
    1
}

fn default_mask() -> String {
    DEFAULT_MASK_TOKEN.into()
}

fn default_ks() -> Vec<usize> {
    vec![1, 5, 10, 20, 40]
}

fn default_scorer() -> ScorerConfig {
    ScorerConfig::Builtin
}

fn check_range(field: &'static str, value: f64, ok: bool, range: &'static str) -> Result<(), ConfigError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::OutOfRange { field, value: value.to_string(), range })
    }
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path, origin: &Path) -> Result<Self, ConfigError> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| ConfigError::Parse { path: origin.to_path_buf(), message: e.to_string() })?;
        cfg.resolve(base);
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, path)
    }

    fn resolve(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        for path in [&mut p.corpus, &mut p.redirects, &mut p.cascades, &mut p.motions, &mut p.index, &mut p.out] {
            join(path);
        }
        p.lexicons.iter_mut().for_each(join);
        for path in [&mut p.gazetteer, &mut p.labels, &mut p.truth, &mut p.model, &mut p.stop_words, &mut p.reports]
            .into_iter()
            .flatten()
        {
            join(path);
        }
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.paths.reports.clone().unwrap_or_else(|| self.paths.out.join("reports"))
    }

    /// Range checks on every threshold and count.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.thresholds;
        check_range("thresholds.dedup", t.dedup, t.dedup > 0.0 && t.dedup <= 1.0, "(0, 1]")?;
        check_range("thresholds.binarize", t.binarize, (0.0..=1.0).contains(&t.binarize), "[0, 1]")?;
        check_range("thresholds.kappa", t.kappa, (-1.0..=1.0).contains(&t.kappa), "[-1, 1]")?;
        check_range("thresholds.min_common", t.min_common as f64, t.min_common >= 1, ">= 1")?;
        check_range("thresholds.min_trusted", t.min_trusted as f64, t.min_trusted >= 1, ">= 1")?;
        check_range("k", self.k as f64, self.k >= 1, ">= 1")?;
        check_range("iterations", self.iterations as f64, self.iterations >= 1, ">= 1")?;
        if let Some(cap) = self.cap {
            check_range("cap", cap as f64, cap >= 1, ">= 1")?;
        }
        let s = &self.simulation;
        check_range("simulation.noise", s.noise, (0.0..0.5).contains(&s.noise), "[0, 0.5)")?;
        check_range("simulation.per_pair", s.per_pair as f64, s.per_pair >= 1 && s.per_pair <= s.annotators, "[1, annotators]")?;
        if self.eval_ks.is_empty() || self.eval_ks[0] == 0 || self.eval_ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::Invalid("eval_ks must be positive and strictly increasing".into()));
        }
        if self.mask_token.trim().is_empty() {
            return Err(ConfigError::Invalid("mask_token must not be blank".into()));
        }
        self.scorer_spec()?;
        Ok(())
    }

    /// Checks that every configured input file exists.
    pub fn check_inputs(&self) -> Result<(), ConfigError> {
        let p = &self.paths;
        let mut required: Vec<(&'static str, &PathBuf)> =
            vec![("paths.corpus", &p.corpus), ("paths.redirects", &p.redirects), ("paths.cascades", &p.cascades), ("paths.motions", &p.motions)];
        required.extend(p.lexicons.iter().map(|l| ("paths.lexicons", l)));
        let optional = [
            ("paths.gazetteer", &p.gazetteer),
            ("paths.labels", &p.labels),
            ("paths.truth", &p.truth),
            ("paths.model", &p.model),
            ("paths.stop_words", &p.stop_words),
        ];
        required.extend(optional.into_iter().filter_map(|(f, o)| o.as_ref().map(|path| (f, path))));
        for (field, path) in required {
            if !path.is_file() {
                return Err(ConfigError::MissingFile { field, path: path.clone() });
            }
        }
        Ok(())
    }

    /// `None` for the builtin scorer.
    pub fn scorer_spec(&self) -> Result<Option<ExternalSpec>, ConfigError> {
        match &self.scorer {
            ScorerConfig::Builtin => Ok(None),
            ScorerConfig::External { command, variant, timeout_ms } => {
                if command.is_empty() {
                    return Err(ConfigError::Invalid("scorer.command must not be empty".into()));
                }
                let variant: InputVariant = variant.parse().map_err(ConfigError::Invalid)?;
                Ok(Some(ExternalSpec { command: command.clone(), variant, timeout: Duration::from_millis(*timeout_ms) }))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [paths]
        corpus = "c.jsonl"
        redirects = "r.tsv"
        cascades = "q.txt"
        motions = "m.csv"
        index = "/abs/x.evix"
        out = "out"
    "#;

    #[test]
    fn defaults_and_relative_paths() {
        let cfg = RunConfig::parse(MINIMAL, Path::new("/data"), Path::new("cfg.toml")).unwrap();
        assert_eq!(cfg.paths.corpus, Path::new("/data/c.jsonl"));
        assert_eq!(cfg.paths.index, Path::new("/abs/x.evix"));
        assert_eq!(cfg.thresholds, Thresholds::default());
        assert_eq!(cfg.k, 40);
        assert_eq!(cfg.scorer, ScorerConfig::Builtin);
        assert_eq!(cfg.reports_dir(), Path::new("/data/out/reports"));
        cfg.validate().unwrap();
    }

    #[test]
    fn out_of_range_rejected() {
        let text = format!("{MINIMAL}\n[thresholds]\ndedup = 1.5\n");
        let cfg = RunConfig::parse(&text, Path::new("."), Path::new("cfg.toml")).unwrap();
        assert!(matches!(cfg.validate(), Err(ConfigError::OutOfRange { field: "thresholds.dedup", .. })));
        let text = format!("k = 0\n{MINIMAL}");
        let cfg = RunConfig::parse(&text, Path::new("."), Path::new("cfg.toml")).unwrap();
        assert!(matches!(cfg.validate(), Err(ConfigError::OutOfRange { field: "k", .. })));
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = format!("colour = 1\n{MINIMAL}");
        assert!(matches!(RunConfig::parse(&text, Path::new("."), Path::new("c")), Err(ConfigError::Parse { .. })));
    }

    #[test]
    fn external_scorer_spec() {
        let text = format!("{MINIMAL}\n[scorer]\nkind = \"external\"\ncommand = [\"plugin\", \"--mode\", \"echo\"]\nvariant = \"MaskS\"\n");
        let cfg = RunConfig::parse(&text, Path::new("."), Path::new("c")).unwrap();
        let spec = cfg.scorer_spec().unwrap().unwrap();
        assert_eq!(spec.variant, InputVariant::MaskedSentence);
        assert_eq!(spec.timeout, Duration::from_secs(30));
        let bad = format!("{MINIMAL}\n[scorer]\nkind = \"external\"\ncommand = [\"p\"]\nvariant = \"X\"\n");
        assert!(RunConfig::parse(&bad, Path::new("."), Path::new("c")).unwrap().validate().is_err());
    }

    #[test]
    fn missing_inputs_reported() {
        let cfg = RunConfig::parse(MINIMAL, Path::new("/nonexistent"), Path::new("c")).unwrap();
        assert!(matches!(cfg.check_inputs(), Err(ConfigError::MissingFile { field: "paths.corpus", .. })));
    }
}
