//! Synthetic data: the bundled mini corpus and simulated survival panels.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, StandardNormal};

use crate::config::RunConfig;
use crate::corpus::{
    default_stopwords, DirectorCategory, DirectorCounts, Document, DocumentSet, LabelEntry,
    PhdCounts, Registry, StartupRecord,
};
use crate::error::Result;
use crate::panel::{PanelRow, PanelTable};
use crate::pipeline::{run_scoring, write_atomic, Inputs};

/// Exponential event times with hazard `baseline * exp(beta * x)`, `x ~ N(0, 1)`,
/// observed yearly and censored administratively after `horizon` years.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalDesign {
    pub n: usize,
    pub beta: f64,
    /// Events per subject-year at `x = 0`.
    pub baseline: f64,
    pub horizon: u32,
}

impl Default for SurvivalDesign {
    fn default() -> Self {
        SurvivalDesign {
            n: 500,
            beta: 0.7,
            baseline: 0.04,
            horizon: 30,
        }
    }
}

/// Panel with one row per subject-year and a single covariate `x`. A subject
/// whose event time falls in `(k, k + 1]` has its event on the row for year `k`.
pub fn simulate_survival_panel(design: &SurvivalDesign, seed: u64) -> PanelTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Exp::new(1.0).expect("unit rate");
    let mut rows = Vec::new();
    for i in 0..design.n {
        let x: f64 = rng.sample(StandardNormal);
        let t: f64 = rng.sample(unit) / (design.baseline * (design.beta * x).exp());
        let (last, event) = if t < design.horizon as f64 {
            ((t.ceil() as u32).max(1) - 1, true)
        } else {
            (design.horizon - 1, false)
        };
        for k in 0..=last {
            rows.push(PanelRow {
                startup_id: format!("u{i:04}"),
                year: k as i32,
                t_start: k as f64,
                t_stop: k as f64 + 1.0,
                event: event && k == last,
                covariates: vec![x],
            });
        }
    }
    PanelTable {
        covariate_names: vec!["x".into()],
        rows,
    }
}

/// Shape of the bundled mini corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiniSpec {
    pub startups: usize,
    pub documents: usize,
    pub first_year: i32,
    pub years: usize,
    pub seed: u64,
}

impl Default for MiniSpec {
    fn default() -> Self {
        MiniSpec {
            startups: 20,
            documents: 200,
            first_year: 2005,
            years: 6,
            seed: 8,
        }
    }
}

impl MiniSpec {
    pub fn last_year(&self) -> i32 {
        self.first_year + self.years as i32 - 1
    }
}

pub struct MiniCorpus {
    pub spec: MiniSpec,
    pub documents: Vec<Document>,
    pub registry: Registry,
    /// Startups planted with heavy, favorable coverage.
    pub high_buzz: Vec<String>,
}

const PREFIXES: [&str; 20] = [
    "Nano", "Quanta", "Helio", "Cyto", "Graphen", "Opti", "Vira", "Terra", "Neuro", "Lumen",
    "Ferro", "Aero", "Hydro", "Photon", "Cryo", "Magna", "Synth", "Omni", "Vecto", "Astra",
];
const SUFFIXES: [&str; 10] = ["flux", "gen", "wave", "trix", "logic", "cell", "core", "sense", "mind", "via"];
const FORMS: [&str; 5] = ["Systems", "Labs", "Technologies", "Therapeutics", "Devices"];
const OUTLETS: [&str; 6] = [
    "Financial Times",
    "The Guardian",
    "The Times",
    "Evening Standard",
    "The Daily Telegraph",
    "The Independent",
];

const TECH: [&str; 14] = [
    "sensor", "chip", "laser", "battery", "graphene", "algorithm", "software", "imaging",
    "molecule", "prototype", "semiconductor", "drug", "platform", "robot",
];
const BUSINESS: [&str; 12] = [
    "revenue", "customer", "contract", "expansion", "partnership", "export", "market", "sales",
    "growth", "retailer", "distributor", "order",
];
const FINANCE: [&str; 10] = [
    "investor", "capital", "valuation", "shares", "fund", "stake", "equity", "round",
    "financing", "bank",
];
const TEAM: [&str; 10] = [
    "founder", "chairman", "executive", "director", "board", "scientist", "engineer", "manager",
    "professor", "recruit",
];
const PUBLIC: [&str; 10] = [
    "award", "prize", "exhibition", "conference", "university", "festival", "minister",
    "competition", "showcase", "charity",
];

fn pick<'a, R: Rng>(rng: &mut R, words: &'a [&'a str]) -> &'a str {
    words.choose(rng).expect("non-empty word list")
}

fn topic_sentence<R: Rng>(rng: &mut R) -> String {
    match rng.gen_range(0..5) {
        0 => format!(
            "Analysts expect {} {} to lift {} across the sector.",
            pick(rng, BUSINESS.as_slice()),
            pick(rng, BUSINESS.as_slice()),
            pick(rng, BUSINESS.as_slice())
        ),
        1 => format!(
            "The new {} uses a {} {} developed with a {}.",
            pick(rng, TECH.as_slice()),
            pick(rng, TECH.as_slice()),
            pick(rng, TECH.as_slice()),
            pick(rng, PUBLIC.as_slice())
        ),
        2 => format!(
            "Several {} and {} are watching the {} {} closely.",
            pick(rng, FINANCE.as_slice()),
            pick(rng, FINANCE.as_slice()),
            pick(rng, FINANCE.as_slice()),
            pick(rng, BUSINESS.as_slice())
        ),
        3 => format!(
            "A former {} joined as {} after the {}.",
            pick(rng, TEAM.as_slice()),
            pick(rng, TEAM.as_slice()),
            pick(rng, PUBLIC.as_slice())
        ),
        _ => format!(
            "The {} at the {} drew a large crowd of {} visitors.",
            pick(rng, PUBLIC.as_slice()),
            pick(rng, PUBLIC.as_slice()),
            pick(rng, TECH.as_slice())
        ),
    }
}

fn brand_sentence<R: Rng>(rng: &mut R, name: &str, favorable: bool) -> String {
    match (rng.gen_range(0..4), favorable) {
        (0, _) => format!(
            "{name} unveiled a {} {} aimed at {} customers.",
            pick(rng, TECH.as_slice()),
            pick(rng, TECH.as_slice()),
            pick(rng, BUSINESS.as_slice())
        ),
        (1, true) => format!(
            "{name} reported strong {} and a growing {} of {}.",
            pick(rng, BUSINESS.as_slice()),
            pick(rng, BUSINESS.as_slice()),
            pick(rng, BUSINESS.as_slice())
        ),
        (1, false) => format!(
            "{name} warned that weak {} could delay the {}.",
            pick(rng, BUSINESS.as_slice()),
            pick(rng, TECH.as_slice())
        ),
        (2, _) => format!(
            "The {} of {} spoke about the {} and the {}.",
            pick(rng, TEAM.as_slice()),
            pick(rng, TEAM.as_slice()),
            pick(rng, TECH.as_slice()),
            pick(rng, PUBLIC.as_slice())
        ) + &format!(" {name} plans to hire a {}.", pick(rng, TEAM.as_slice())),
        _ => format!(
            "{name} won the {} {} for its {}.",
            pick(rng, PUBLIC.as_slice()),
            pick(rng, PUBLIC.as_slice()),
            pick(rng, TECH.as_slice())
        ),
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Funding probability in a year given the startup's memorability that year.
fn funding_probability(memorability: f64) -> f64 {
    sigmoid(-1.8 + 0.45 * memorability)
}

/// Generates the mini corpus. Half of the startups get frequent, mostly
/// favorable coverage; funding years are then drawn from the realized
/// memorability scores, so well-remembered startups tend to be funded earlier.
pub fn generate_mini(spec: &MiniSpec) -> Result<MiniCorpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.startups;

    let mut records = Vec::with_capacity(n);
    let mut buzz = Vec::with_capacity(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let high: Vec<bool> = (0..n).map(|i| order[i] < n / 2).collect();
    for i in 0..n {
        let stem = format!(
            "{}{}",
            PREFIXES[i % PREFIXES.len()],
            SUFFIXES[rng.gen_range(0..SUFFIXES.len())]
        );
        let canonical = format!("{stem} {}", FORMS[rng.gen_range(0..FORMS.len())]);
        let founding = spec.first_year + rng.gen_range(0..2);
        let mut dirs: BTreeMap<i32, DirectorCounts> = BTreeMap::new();
        let mut phd = BTreeMap::new();
        for year in [founding, founding + 2] {
            let total = rng.gen_range(2..8u32);
            let mut counts = DirectorCounts::new();
            for _ in 0..total {
                let c = DirectorCategory::ALL[rng.gen_range(0..DirectorCategory::ALL.len())];
                *counts.entry(c).or_insert(0) += 1;
            }
            dirs.insert(year, counts);
            phd.insert(
                year,
                PhdCounts {
                    phd: rng.gen_range(0..=total),
                    total,
                },
            );
        }
        records.push(StartupRecord {
            startup_id: format!("s{:02}", i + 1),
            canonical_name: canonical,
            aliases: vec![stem],
            founding_year: founding,
            first_vc_year: None,
            london: rng.gen_bool(0.4),
            academic_spinoff: rng.gen_bool(0.25),
            yearly_director_categories: dirs,
            yearly_phd_directors: phd,
            patent_stock: rng.gen_range(0..6) as f64,
            publication_count: rng.gen_range(0..4) as f64,
        });
        buzz.push(if high[i] { 6.0 } else { 1.0 });
    }

    let mut documents = Vec::with_capacity(spec.documents);
    for d in 0..spec.documents {
        let year = spec.first_year + (d * spec.years / spec.documents) as i32;
        let eligible: Vec<usize> = (0..n).filter(|&i| records[i].founding_year <= year).collect();
        let weights: Vec<f64> = eligible.iter().map(|&i| buzz[i]).collect();
        let dist = WeightedIndex::new(&weights).expect("positive weights");
        let mut mentioned = vec![eligible[dist.sample(&mut rng)]];
        if rng.gen_bool(0.25) {
            let other = eligible[dist.sample(&mut rng)];
            if other != mentioned[0] {
                mentioned.push(other);
            }
        }

        let mut sentences = Vec::new();
        let mut labels = Vec::new();
        for &i in &mentioned {
            let r = &records[i];
            let u: f64 = rng.gen();
            let label = match (high[i], u) {
                (true, u) if u < 0.65 => "favorable",
                (true, u) if u < 0.9 => "neutral",
                (false, u) if u < 0.35 => "favorable",
                (false, u) if u < 0.7 => "neutral",
                _ => "unfavorable",
            };
            let repeats = if high[i] { rng.gen_range(2..4) } else { 1 };
            for k in 0..repeats {
                let name = if k == 0 { &r.canonical_name } else { &r.aliases[0] };
                sentences.push(brand_sentence(&mut rng, name, label != "unfavorable"));
            }
            labels.push(LabelEntry {
                startup_id: r.startup_id.clone(),
                label: label.to_string(),
            });
        }
        for _ in 0..rng.gen_range(2..5) {
            let s = topic_sentence(&mut rng);
            let at = rng.gen_range(0..=sentences.len());
            sentences.insert(at, s);
        }
        let date = NaiveDate::from_ymd_opt(year, rng.gen_range(1..=12), rng.gen_range(1..=28))
            .expect("valid date");
        documents.push(Document {
            doc_id: String::new(),
            date,
            outlet: pick(&mut rng, OUTLETS.as_slice()).to_string(),
            text: sentences.join(" "),
            labels,
        });
    }
    documents.sort_by_key(|d| d.date);
    for (k, d) in documents.iter_mut().enumerate() {
        d.doc_id = format!("d{:04}", k + 1);
    }

    // Draw funding from the scores the pipeline itself will compute.
    let registry = Registry::new(records.clone())?;
    let cfg = RunConfig::from_toml_str("corpus = \"docs.jsonl\"\nregistry = \"registry.csv\"\n", Path::new("."))?;
    let inputs = Inputs {
        docs: DocumentSet::new(documents.clone())?,
        registry,
        stopwords: default_stopwords(),
    };
    let scores = run_scoring(&cfg, &inputs)?;
    for r in records.iter_mut() {
        for year in r.founding_year..=spec.last_year() {
            let mem = scores
                .table
                .get(&r.startup_id, year)
                .map_or(0.0, |row| row.record.memorability);
            if rng.gen_bool(funding_probability(mem)) {
                r.first_vc_year = Some(year);
                break;
            }
        }
    }

    let high_buzz = (0..n)
        .filter(|&i| high[i])
        .map(|i| records[i].startup_id.clone())
        .collect();
    Ok(MiniCorpus {
        spec: *spec,
        documents,
        registry: Registry::new(records)?,
        high_buzz,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl MiniCorpus {
    pub fn docs_jsonl(&self) -> String {
        let mut out = String::new();
        for d in &self.documents {
            let labels: Vec<serde_json::Value> = d
                .labels
                .iter()
                .map(|l| serde_json::json!({"startup_id": l.startup_id, "label": l.label}))
                .collect();
            let v = serde_json::json!({
                "doc_id": d.doc_id,
                "date": d.date.format("%Y-%m-%d").to_string(),
                "outlet": d.outlet,
                "text": d.text,
                "labels": labels,
            });
            out.push_str(&v.to_string());
            out.push('\n');
        }
        out
    }

    pub fn registry_csv(&self) -> String {
        let mut out = String::from(
            "startup_id,canonical_name,aliases,founding_year,first_vc_year,london,academic_spinoff,patent_stock,publication_count\n",
        );
        for r in self.registry.iter() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.startup_id,
                csv_field(&r.canonical_name),
                csv_field(&r.aliases.join("|")),
                r.founding_year,
                r.first_vc_year.map_or(String::new(), |y| y.to_string()),
                r.london as u8,
                r.academic_spinoff as u8,
                r.patent_stock,
                r.publication_count
            );
        }
        out
    }

    pub fn directors_csv(&self) -> String {
        let mut out = String::from("startup_id,year,category,count\n");
        for r in self.registry.iter() {
            for (year, counts) in &r.yearly_director_categories {
                for (c, k) in counts {
                    let _ = writeln!(out, "{},{year},{},{k}", r.startup_id, c.as_str());
                }
            }
        }
        out
    }

    pub fn phd_csv(&self) -> String {
        let mut out = String::from("startup_id,year,phd_count,total_directors\n");
        for r in self.registry.iter() {
            for (year, p) in &r.yearly_phd_directors {
                let _ = writeln!(out, "{},{year},{},{}", r.startup_id, p.phd, p.total);
            }
        }
        out
    }

    pub fn config_toml(&self) -> String {
        format!(
            r#"# Synthetic corpus bundled for smoke tests; regenerate with
# `mediamem synth --out data/mini --seed {seed}`.
corpus = "docs.jsonl"
registry = "registry.csv"
directors = "directors.csv"
phd = "phd.csv"
output_dir = "out"
censor_year = {censor}
window = 7
ties = "efron"

[topics]
seed = 42
resolution = 1.0
min_cluster_size = 2
keywords = 50

[[models]]
name = "memorability"
covariates = ["memorability"]

[[models]]
name = "memorability_favorability"
covariates = ["memorability", "media_favorability"]

[[models]]
name = "news_count"
covariates = ["news_count"]

[[models]]
name = "logit_memorability"
kind = "logit"
covariates = ["memorability"]
"#,
            seed = self.spec.seed,
            censor = self.spec.last_year()
        )
    }

    /// Writes docs.jsonl, registry.csv, directors.csv, phd.csv and config.toml.
    pub fn write(&self, dir: &Path) -> Result<()> {
        write_atomic(&dir.join("docs.jsonl"), &self.docs_jsonl())?;
        write_atomic(&dir.join("registry.csv"), &self.registry_csv())?;
        write_atomic(&dir.join("directors.csv"), &self.directors_csv())?;
        write_atomic(&dir.join("phd.csv"), &self.phd_csv())?;
        write_atomic(&dir.join("config.toml"), &self.config_toml())?;
        Ok(())
    }
}
