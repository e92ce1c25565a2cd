//! End-to-end orchestration from configured inputs to written outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::corpus::{
    default_stopwords, load_corpus, load_labels, load_registry, load_stopwords, DocumentSet,
    PreprocessConfig, Preprocessor, Registry, TokenSequence,
};
use crate::error::{Error, Result};
use crate::inference::{fit_model, vif_for_spec, ModelReport};
use crate::panel::{build_panel, correlation_matrix, descriptive_stats, PanelTable};
use crate::scoring::{rescale_memorability, score_year};
use crate::semnet::{build_global_network, build_network, SemanticNetwork};
use crate::sentiment::{favorability, tally_labels};
use crate::table::{ScoreRow, ScoreTable};
use crate::topics::{detect_topics, topic_intensities, TopicModel};

pub struct Inputs {
    pub docs: DocumentSet,
    pub registry: Registry,
    pub stopwords: BTreeSet<String>,
}

/// Validates the config, then reads corpus, labels, registry and stopwords.
pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    cfg.validate()?;
    let mut docs = load_corpus(&cfg.corpus_path(), cfg.corpus_format()?)?;
    if let Some(p) = &cfg.labels {
        docs.attach_labels(load_labels(&cfg.resolve(p))?)?;
    }
    let registry = load_registry(
        &cfg.registry_path(),
        cfg.directors.as_ref().map(|p| cfg.resolve(p)).as_deref(),
        cfg.phd.as_ref().map(|p| cfg.resolve(p)).as_deref(),
    )?;
    let problems = registry.validate();
    if !problems.is_empty() {
        return Err(Error::InvalidData(problems.join("; ")));
    }
    let stopwords = match &cfg.stopword_path {
        Some(p) => load_stopwords(&cfg.resolve(p))?,
        None => default_stopwords(),
    };
    Ok(Inputs {
        docs,
        registry,
        stopwords,
    })
}

pub fn tokenize(cfg: &RunConfig, inputs: &Inputs) -> Vec<TokenSequence> {
    let pcfg = PreprocessConfig {
        stopwords: inputs.stopwords.clone(),
        stemmer: cfg.stemmer,
        aliases: inputs.registry.aliases(),
    };
    let pre = Preprocessor::new(&pcfg);
    inputs.docs.documents().par_iter().map(|d| pre.run(d)).collect()
}

pub struct ScoreRun {
    pub sequences: Vec<TokenSequence>,
    pub networks: BTreeMap<i32, SemanticNetwork>,
    pub global: SemanticNetwork,
    pub topics: TopicModel,
    pub table: ScoreTable,
}

impl ScoreRun {
    /// (year, terms, edges) per yearly network.
    pub fn term_counts(&self) -> Vec<(i32, usize, usize)> {
        self.networks
            .iter()
            .map(|(y, n)| (*y, n.node_count(), n.edge_count()))
            .collect()
    }
}

/// Pooled network and topics only.
pub fn run_topics(cfg: &RunConfig, sequences: &[TokenSequence]) -> Result<(SemanticNetwork, TopicModel)> {
    let refs: Vec<&TokenSequence> = sequences.iter().collect();
    let global = build_global_network(&refs, cfg.window)?;
    let topics = detect_topics(&global, &cfg.topics)?;
    Ok((global, topics))
}

/// Networks, brand scores, favorability and topic intensities for every
/// registry startup in every corpus year.
pub fn run_scoring(cfg: &RunConfig, inputs: &Inputs) -> Result<ScoreRun> {
    let weights = cfg.weights()?;
    let sequences = tokenize(cfg, inputs);
    let (global, topics) = run_topics(cfg, &sequences)?;

    let mut by_year: BTreeMap<i32, Vec<&TokenSequence>> = BTreeMap::new();
    for s in &sequences {
        by_year.entry(s.year).or_default().push(s);
    }
    let docs_by_year = inputs.docs.by_year();
    let ids: Vec<&str> = inputs.registry.iter().map(|s| s.startup_id.as_str()).collect();

    let per_year: Vec<(i32, SemanticNetwork, Vec<ScoreRow>)> = by_year
        .par_iter()
        .map(|(&year, seqs)| {
            let net = build_network(seqs, cfg.window)?;
            let mut scored = score_year(year, seqs, &net, &ids, &weights)?;
            if cfg.rescale_memorability {
                rescale_memorability(&mut scored.records);
            }
            let docs = docs_by_year.get(&year).map(Vec::as_slice).unwrap_or(&[]);
            let rows = scored
                .records
                .into_iter()
                .map(|record| {
                    let tally = tally_labels(docs.iter().copied(), &record.startup_id, year)?;
                    let intensities = topic_intensities(&record.startup_id, year, seqs, &topics)?;
                    Ok(ScoreRow {
                        media_favorability: favorability(&tally),
                        topics: intensities,
                        record,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((year, net, rows))
        })
        .collect::<Result<_>>()?;

    let mut table = ScoreTable::new(topics.k);
    let mut networks = BTreeMap::new();
    for (year, net, rows) in per_year {
        for r in rows {
            table.insert(r)?;
        }
        networks.insert(year, net);
    }
    Ok(ScoreRun {
        sequences,
        networks,
        global,
        topics,
        table,
    })
}

pub fn censor_year(cfg: &RunConfig, docs: &DocumentSet) -> Result<i32> {
    match cfg.censor_year {
        Some(y) => Ok(y),
        None => docs.years().last().copied().ok_or_else(|| {
            Error::Config("empty corpus: set censor_year explicitly".into())
        }),
    }
}

pub fn run_panel(cfg: &RunConfig, registry: &Registry, table: &ScoreTable, censor: i32) -> Result<PanelTable> {
    if let Some(s) = registry.iter().find(|s| s.founding_year > censor) {
        return Err(Error::Config(format!(
            "censor year {censor} precedes founding year {} of {}",
            s.founding_year, s.startup_id
        )));
    }
    build_panel(registry, table, censor, cfg.heterogeneity)
}

/// Fits every configured model, in parallel across models, keeping config order.
pub fn run_models(cfg: &RunConfig, panel: &PanelTable) -> Result<ModelReport> {
    let specs = cfg.model_specs();
    if specs.is_empty() {
        let mut report = ModelReport::default();
        report.warnings.push("no models configured; nothing was fitted".into());
        return Ok(report);
    }
    for s in &specs {
        s.terms(panel).map_err(|e| match e {
            Error::UnknownCovariate(c) => {
                Error::Config(format!("model '{}' names unknown covariate '{c}'", s.name))
            }
            other => other,
        })?;
    }
    let fits = specs
        .par_iter()
        .map(|s| fit_model(panel, s, cfg.ties))
        .collect::<Result<Vec<_>>>()?;
    let mut report = ModelReport::new(fits);
    let vif_target = cfg.vif_model.clone().or_else(|| {
        specs
            .iter()
            .find(|s| s.name == "model_9")
            .map(|s| s.name.clone())
    });
    if let Some(name) = vif_target {
        match specs.iter().find(|s| s.name == name) {
            Some(spec) => match vif_for_spec(panel, spec) {
                Ok(v) => report.vif = Some((name, v)),
                Err(e) => report.warnings.push(format!("VIF for {name}: {e}")),
            },
            None => return Err(Error::Config(format!("vif_model '{name}' is not a configured model"))),
        }
    }
    Ok(report)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes())
        .and_then(|_| tmp.as_file().sync_all())
        .map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub struct Outputs {
    pub dir: PathBuf,
}

impl Outputs {
    pub fn new(dir: PathBuf) -> Self {
        Outputs { dir }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_topics(&self, global: &SemanticNetwork, topics: &TopicModel) -> Result<Vec<PathBuf>> {
        let net = self.path("networks/network_all.txt");
        let json = self.path("topics.json");
        write_atomic(&net, &global.to_canonical_string())?;
        write_atomic(&json, &topics.to_json())?;
        Ok(vec![net, json])
    }

    pub fn write_scores(&self, run: &ScoreRun) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (year, net) in &run.networks {
            let p = self.path(&format!("networks/network_{year}.txt"));
            write_atomic(&p, &net.to_canonical_string())?;
            written.push(p);
        }
        written.extend(self.write_topics(&run.global, &run.topics)?);
        let scores = self.path("scores.csv");
        write_atomic(&scores, &run.table.to_csv_string())?;
        written.push(scores);
        Ok(written)
    }

    pub fn write_panel(&self, panel: &PanelTable) -> Result<Vec<PathBuf>> {
        let mut files = vec![("panel.csv", panel.to_csv_string())];
        let desc = descriptive_stats(panel, true);
        files.push(("descriptives.csv", desc.to_csv_string()));
        files.push(("descriptives.md", desc.to_markdown()));
        if panel.len() >= 3 {
            let corr = correlation_matrix(panel)?;
            files.push(("correlations.csv", corr.to_csv_string()));
            files.push(("correlations.md", corr.to_markdown()));
        }
        let mut written = Vec::new();
        for (name, text) in files {
            let p = self.path(name);
            write_atomic(&p, &text)?;
            written.push(p);
        }
        Ok(written)
    }

    pub fn write_report(&self, report: &ModelReport) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (name, text) in [
            ("report.txt", report.to_text()),
            ("coefficients.csv", report.coefficients_csv()),
            ("fit_stats.csv", report.fit_stats_csv()),
            ("report.json", report.to_json()),
        ] {
            let p = self.path(name);
            write_atomic(&p, &text)?;
            written.push(p);
        }
        Ok(written)
    }
}

/// Everything a full run produces.
pub struct FullRun {
    pub scores: ScoreRun,
    pub panel: PanelTable,
    pub report: ModelReport,
    pub written: Vec<PathBuf>,
}

/// Scores, panel and models, writing all outputs.
pub fn run_all(cfg: &RunConfig) -> Result<FullRun> {
    let inputs = load_inputs(cfg)?;
    let censor = censor_year(cfg, &inputs.docs)?;
    let scores = run_scoring(cfg, &inputs)?;
    let panel = run_panel(cfg, &inputs.registry, &scores.table, censor)?;
    let report = run_models(cfg, &panel)?;
    let out = Outputs::new(cfg.output_path());
    let mut written = out.write_scores(&scores)?;
    written.extend(out.write_panel(&panel)?);
    written.extend(out.write_report(&report)?);
    Ok(FullRun {
        scores,
        panel,
        report,
        written,
    })
}
