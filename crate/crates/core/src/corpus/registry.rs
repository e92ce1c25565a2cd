use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use super::BrandAlias;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DirectorCategory {
    Accounting,
    GeneralManagement,
    Law,
    Engineering,
    Finance,
    Other,
}

impl DirectorCategory {
    pub const ALL: [DirectorCategory; 6] = [
        DirectorCategory::Accounting,
        DirectorCategory::GeneralManagement,
        DirectorCategory::Law,
        DirectorCategory::Engineering,
        DirectorCategory::Finance,
        DirectorCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DirectorCategory::Accounting => "accounting",
            DirectorCategory::GeneralManagement => "general_management",
            DirectorCategory::Law => "law",
            DirectorCategory::Engineering => "engineering",
            DirectorCategory::Finance => "finance",
            DirectorCategory::Other => "other",
        }
    }
}

impl fmt::Display for DirectorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DirectorCategory {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let norm: String = s
            .trim()
            .to_lowercase()
            .chars()
            .map(|c| if c == ' ' || c == '-' { '_' } else { c })
            .collect();
        DirectorCategory::ALL
            .into_iter()
            .find(|c| c.as_str() == norm)
            .ok_or_else(|| format!("unknown director category '{s}'"))
    }
}

pub type DirectorCounts = BTreeMap<DirectorCategory, u32>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhdCounts {
    pub phd: u32,
    pub total: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartupRecord {
    pub startup_id: String,
    pub canonical_name: String,
    pub aliases: Vec<String>,
    pub founding_year: i32,
    pub first_vc_year: Option<i32>,
    pub london: bool,
    pub academic_spinoff: bool,
    pub yearly_director_categories: BTreeMap<i32, DirectorCounts>,
    pub yearly_phd_directors: BTreeMap<i32, PhdCounts>,
    pub patent_stock: f64,
    pub publication_count: f64,
}

impl StartupRecord {
    /// Canonical name plus aliases, deduplicated, as matching patterns.
    pub fn brand_aliases(&self) -> Vec<BrandAlias> {
        let mut names: Vec<&str> = std::iter::once(self.canonical_name.as_str())
            .chain(self.aliases.iter().map(String::as_str))
            .filter(|s| !s.trim().is_empty())
            .collect();
        names.sort_unstable();
        names.dedup();
        names
            .into_iter()
            .map(|a| BrandAlias {
                startup_id: self.startup_id.clone(),
                alias: a.to_string(),
            })
            .collect()
    }

    pub fn is_funded(&self) -> bool {
        self.first_vc_year.is_some()
    }
}

/// Startup registry keyed by id.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    pub startups: BTreeMap<String, StartupRecord>,
}

impl Registry {
    pub fn new(records: Vec<StartupRecord>) -> Result<Self> {
        let mut startups = BTreeMap::new();
        let mut dups = Vec::new();
        for r in records {
            if r.startup_id.is_empty() || r.startup_id.chars().any(char::is_whitespace) {
                return Err(Error::InvalidData(format!(
                    "startup id '{}' must be non-empty without whitespace",
                    r.startup_id
                )));
            }
            if let Some(old) = startups.insert(r.startup_id.clone(), r) {
                dups.push(old.startup_id);
            }
        }
        if !dups.is_empty() {
            return Err(Error::DuplicateId(dups));
        }
        Ok(Registry { startups })
    }

    pub fn len(&self) -> usize {
        self.startups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.startups.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &StartupRecord> {
        self.startups.values()
    }

    pub fn get(&self, id: &str) -> Option<&StartupRecord> {
        self.startups.get(id)
    }

    pub fn aliases(&self) -> Vec<BrandAlias> {
        self.iter().flat_map(StartupRecord::brand_aliases).collect()
    }

    /// Checks the record-level invariants; returns every violation found.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for r in self.iter() {
            if let Some(f) = r.first_vc_year {
                if f < r.founding_year {
                    problems.push(format!(
                        "{}: first_vc_year {f} precedes founding_year {}",
                        r.startup_id, r.founding_year
                    ));
                }
            }
            for (year, p) in &r.yearly_phd_directors {
                if p.phd > p.total {
                    problems.push(format!(
                        "{}: {year} phd_count {} exceeds total_directors {}",
                        r.startup_id, p.phd, p.total
                    ));
                }
            }
            if r.patent_stock < 0.0 || r.publication_count < 0.0 {
                problems.push(format!("{}: negative patent or publication count", r.startup_id));
            }
        }
        problems
    }
}

#[derive(Deserialize)]
struct RawStartup {
    startup_id: String,
    canonical_name: String,
    #[serde(default)]
    aliases: String,
    founding_year: i32,
    #[serde(default)]
    first_vc_year: Option<i32>,
    london: u8,
    academic_spinoff: u8,
    patent_stock: f64,
    publication_count: f64,
}

#[derive(Deserialize)]
struct RawDirector {
    startup_id: String,
    year: i32,
    category: String,
    count: u32,
}

#[derive(Deserialize)]
struct RawPhd {
    startup_id: String,
    year: i32,
    phd_count: u32,
    total_directors: u32,
}

fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let ctx = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file)
        .deserialize::<T>()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| Error::parse(&ctx, i + 1, e)))
        .collect()
}

fn flag(v: u8, ctx: &str, record: usize) -> Result<bool> {
    match v {
        0 => Ok(false),
        1 => Ok(true),
        _ => Err(Error::parse(ctx, record, format!("expected 0/1 flag, got {v}"))),
    }
}

/// Loads the registry CSV and the optional director companion files.
pub fn load_registry(
    registry: &Path,
    directors: Option<&Path>,
    phd: Option<&Path>,
) -> Result<Registry> {
    let ctx = registry.display().to_string();
    let mut records = Vec::new();
    for (i, raw) in read_csv::<RawStartup>(registry)?.into_iter().enumerate() {
        if raw.patent_stock < 0.0 || raw.publication_count < 0.0 {
            return Err(Error::parse(&ctx, i + 1, "negative patent or publication count"));
        }
        records.push(StartupRecord {
            london: flag(raw.london, &ctx, i + 1)?,
            academic_spinoff: flag(raw.academic_spinoff, &ctx, i + 1)?,
            aliases: raw
                .aliases
                .split('|')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect(),
            startup_id: raw.startup_id,
            canonical_name: raw.canonical_name,
            founding_year: raw.founding_year,
            first_vc_year: raw.first_vc_year,
            yearly_director_categories: BTreeMap::new(),
            yearly_phd_directors: BTreeMap::new(),
            patent_stock: raw.patent_stock,
            publication_count: raw.publication_count,
        });
    }
    let mut reg = Registry::new(records)?;

    if let Some(path) = directors {
        let ctx = path.display().to_string();
        for (i, raw) in read_csv::<RawDirector>(path)?.into_iter().enumerate() {
            let cat: DirectorCategory =
                raw.category.parse().map_err(|e| Error::parse(&ctx, i + 1, e))?;
            let rec = reg.startups.get_mut(&raw.startup_id).ok_or_else(|| {
                Error::parse(&ctx, i + 1, format!("unknown startup '{}'", raw.startup_id))
            })?;
            *rec.yearly_director_categories
                .entry(raw.year)
                .or_default()
                .entry(cat)
                .or_insert(0) += raw.count;
        }
    }
    if let Some(path) = phd {
        let ctx = path.display().to_string();
        for (i, raw) in read_csv::<RawPhd>(path)?.into_iter().enumerate() {
            if raw.phd_count > raw.total_directors {
                return Err(Error::parse(&ctx, i + 1, "phd_count exceeds total_directors"));
            }
            let rec = reg.startups.get_mut(&raw.startup_id).ok_or_else(|| {
                Error::parse(&ctx, i + 1, format!("unknown startup '{}'", raw.startup_id))
            })?;
            rec.yearly_phd_directors.insert(
                raw.year,
                PhdCounts {
                    phd: raw.phd_count,
                    total: raw.total_directors,
                },
            );
        }
    }
    Ok(reg)
}
