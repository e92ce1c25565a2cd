//! Run configuration, read from TOML. Relative paths resolve against the
//! directory holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusFormat, StemmerKind};
use crate::error::{Error, Result};
use crate::inference::{ModelSpec, TiesMethod};
use crate::panel::HeterogeneityIndex;
use crate::scoring::CompositeWeights;
use crate::semnet::DEFAULT_WINDOW;
use crate::topics::TopicOptions;

fn default_window() -> usize {
    DEFAULT_WINDOW
}

fn default_weights() -> [f64; 3] {
    [1.0, 1.0, 1.0]
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_outlier_k() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    /// Inferred from the corpus file extension when absent.
    #[serde(default)]
    pub corpus_format: Option<CorpusFormat>,
    pub registry: PathBuf,
    #[serde(default)]
    pub directors: Option<PathBuf>,
    #[serde(default)]
    pub phd: Option<PathBuf>,
    /// Extra labels as CSV with columns doc_id, startup_id, label.
    #[serde(default)]
    pub labels: Option<PathBuf>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,

    #[serde(default)]
    pub stopword_path: Option<PathBuf>,
    #[serde(default)]
    pub stemmer: StemmerKind,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_weights")]
    pub composite_weights: [f64; 3],
    /// Min-max rescale memorability to [0, 1] within each year.
    #[serde(default)]
    pub rescale_memorability: bool,

    #[serde(default)]
    pub topics: TopicOptions,

    /// Last observed year; defaults to the last corpus year.
    #[serde(default)]
    pub censor_year: Option<i32>,
    #[serde(default)]
    pub heterogeneity: HeterogeneityIndex,
    #[serde(default)]
    pub ties: TiesMethod,
    /// Threshold in standard deviations used by outlier-filtered models.
    #[serde(default = "default_outlier_k")]
    pub outlier_k: f64,
    /// Model whose design is checked with variance inflation factors.
    #[serde(default)]
    pub vif_model: Option<String>,
    /// Absent: the default model suite. Empty: no models.
    #[serde(default)]
    pub models: Option<Vec<ModelSpec>>,

    #[serde(default)]
    pub threads: Option<usize>,

    /// Directory the relative paths above resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        RunConfig::from_toml_str(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn corpus_path(&self) -> PathBuf {
        self.resolve(&self.corpus)
    }

    pub fn registry_path(&self) -> PathBuf {
        self.resolve(&self.registry)
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn corpus_format(&self) -> Result<CorpusFormat> {
        match self.corpus_format {
            Some(f) => Ok(f),
            None => CorpusFormat::from_path(&self.corpus).ok_or_else(|| {
                Error::Config(format!(
                    "cannot infer corpus format of {}; set corpus_format",
                    self.corpus.display()
                ))
            }),
        }
    }

    pub fn weights(&self) -> Result<CompositeWeights> {
        let [p, d, c] = self.composite_weights;
        CompositeWeights::new(p, d, c)
    }

    /// Models to fit: the configured list, or the default suite when none is given.
    pub fn model_specs(&self) -> Vec<ModelSpec> {
        match &self.models {
            Some(m) => m.clone(),
            None => {
                let mut models = crate::inference::default_models();
                for m in &mut models {
                    if let Some(rule) = &mut m.outlier_filter {
                        rule.k = self.outlier_k;
                    }
                }
                models
            }
        }
    }

    /// Checks settings and that every referenced input exists; runs before any work.
    pub fn validate(&self) -> Result<()> {
        let mut inputs = vec![("corpus", self.corpus_path()), ("registry", self.registry_path())];
        for (what, p) in [
            ("directors", &self.directors),
            ("phd", &self.phd),
            ("labels", &self.labels),
            ("stopword_path", &self.stopword_path),
        ] {
            if let Some(p) = p {
                inputs.push((what, self.resolve(p)));
            }
        }
        for (what, p) in inputs {
            if !p.is_file() {
                return Err(Error::Config(format!("{what} path {} does not exist", p.display())));
            }
        }
        self.corpus_format()?;
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        self.weights()?;
        if !(self.topics.resolution > 0.0) {
            return Err(Error::Config("topic resolution must be positive".into()));
        }
        if self.topics.min_cluster_size == 0 || self.topics.keywords == 0 {
            return Err(Error::Config(
                "topic min_cluster_size and keywords must be at least 1".into(),
            ));
        }
        if !(self.outlier_k > 0.0) {
            return Err(Error::Config("outlier_k must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        let specs = self.model_specs();
        let mut names = std::collections::BTreeSet::new();
        for m in &specs {
            m.validate()?;
            if !names.insert(m.name.as_str()) {
                return Err(Error::Config(format!("duplicate model name '{}'", m.name)));
            }
        }
        Ok(())
    }
}
