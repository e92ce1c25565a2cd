//! Startup-year panel in counting-process form.
//!
//! Each startup contributes one row per year from its founding year until the
//! year of its first VC round (the only row with `event = true`) or the censoring
//! year, whichever comes first. Time is measured as age: a row for year `y`
//! covers the interval `(y - founding, y - founding + 1]`.

mod stats;

pub use stats::{
    correlation_matrix, descriptive_stats, outlier_filter, welch_t_test, CorrelationMatrix,
    DescriptiveTable, Summary, TTest, VariableSummary,
};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{DirectorCategory, DirectorCounts, Registry, StartupRecord};
use crate::error::{Error, Result};
use crate::stats::{mean, population_sd};
use crate::table::{fmt6, ScoreTable};

pub const LONDON: &str = "london";
pub const TEAM_HETEROGENEITY: &str = "team_heterogeneity";
pub const ACADEMIC_PREVALENCE: &str = "academic_prevalence";
pub const PATENTS: &str = "patents_log";
pub const PUBLICATIONS: &str = "publications";
pub const ACADEMIC_SPINOFF: &str = "academic_spinoff";
pub const FAVORABILITY: &str = "media_favorability";
pub const PREVALENCE: &str = "prevalence";
pub const DISTINCTIVENESS: &str = "distinctiveness";
pub const CONNECTIVITY: &str = "connectivity";
pub const MEMORABILITY: &str = "memorability";
pub const NEWS_COUNT: &str = "news_count";

pub fn topic_column(k: usize) -> String {
    format!("topic_{k}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeterogeneityIndex {
    /// `1 - Σ p²`: larger means a more diverse board.
    #[default]
    Blau,
    /// `Σ p²`: larger means a more concentrated board.
    Hhi,
}

/// Occupational heterogeneity of the board from director counts per category.
pub fn hhi(counts: &DirectorCounts, index: HeterogeneityIndex) -> Result<f64> {
    let total: u32 = counts.values().sum();
    if total == 0 {
        return Err(Error::InvalidData("no directors to compute heterogeneity".into()));
    }
    let t = total as f64;
    let concentration: f64 = DirectorCategory::ALL
        .iter()
        .map(|c| {
            let p = *counts.get(c).unwrap_or(&0) as f64 / t;
            p * p
        })
        .sum();
    Ok(match index {
        HeterogeneityIndex::Blau => 1.0 - concentration,
        HeterogeneityIndex::Hhi => concentration,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PanelRow {
    pub startup_id: String,
    pub year: i32,
    pub t_start: f64,
    pub t_stop: f64,
    pub event: bool,
    pub covariates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PanelTable {
    pub covariate_names: Vec<String>,
    pub rows: Vec<PanelRow>,
}

impl PanelTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.covariate_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownCovariate(name.to_string()))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.column_index(name)?;
        Ok(self.rows.iter().map(|r| r.covariates[j]).collect())
    }

    pub fn push_column(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.rows.len() {
            return Err(Error::InvalidData(format!(
                "column '{name}' has {} values for {} rows",
                values.len(),
                self.rows.len()
            )));
        }
        if self.covariate_names.iter().any(|n| n == name) {
            return Err(Error::InvalidData(format!("column '{name}' already present")));
        }
        self.covariate_names.push(name.to_string());
        for (r, v) in self.rows.iter_mut().zip(values) {
            r.covariates.push(v);
        }
        Ok(())
    }

    pub fn events(&self) -> usize {
        self.rows.iter().filter(|r| r.event).count()
    }

    pub fn startups(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = self.rows.iter().map(|r| r.startup_id.as_str()).collect();
        ids.dedup();
        ids
    }

    /// Topic columns present in the table, in order.
    pub fn topic_columns(&self) -> Vec<String> {
        self.covariate_names
            .iter()
            .filter(|n| n.starts_with("topic_"))
            .cloned()
            .collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("startup_id,year,t_start,t_stop,event");
        for n in &self.covariate_names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                r.startup_id, r.year, r.t_start, r.t_stop, r.event as u8
            );
            for v in &r.covariates {
                out.push(',');
                out.push_str(&fmt6(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let ctx = path.display().to_string();
        let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::parse(&ctx, 0, format!("{other:?}")),
        })?;
        let headers = rdr.headers().map_err(|e| Error::parse(&ctx, 0, e))?.clone();
        let fixed = ["startup_id", "year", "t_start", "t_stop", "event"];
        if headers.len() < fixed.len() || headers.iter().take(5).ne(fixed.iter().copied()) {
            return Err(Error::parse(&ctx, 0, "unexpected panel header"));
        }
        let covariate_names: Vec<String> = headers.iter().skip(5).map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(&ctx, i + 1, e))?;
            let num = |c: usize| -> Result<f64> {
                rec[c].trim().parse::<f64>().map_err(|e| Error::parse(&ctx, i + 1, e))
            };
            rows.push(PanelRow {
                startup_id: rec[0].to_string(),
                year: rec[1].trim().parse().map_err(|e| Error::parse(&ctx, i + 1, e))?,
                t_start: num(2)?,
                t_stop: num(3)?,
                event: num(4)? != 0.0,
                covariates: (5..rec.len()).map(num).collect::<Result<_>>()?,
            });
        }
        Ok(PanelTable {
            covariate_names,
            rows,
        })
    }
}

/// Value observed in the latest year at or before `year`, else the earliest one.
fn carried<T>(by_year: &BTreeMap<i32, T>, year: i32) -> Option<&T> {
    by_year
        .range(..=year)
        .next_back()
        .or_else(|| by_year.iter().next())
        .map(|(_, v)| v)
}

fn startup_rows(
    s: &StartupRecord,
    scores: &ScoreTable,
    censor_year: i32,
    index: HeterogeneityIndex,
) -> Result<Vec<PanelRow>> {
    if let Some(f) = s.first_vc_year {
        if f < s.founding_year {
            return Err(Error::InvalidData(format!(
                "startup {}: first_vc_year {f} precedes founding_year {}",
                s.startup_id, s.founding_year
            )));
        }
    }
    if censor_year < s.founding_year {
        return Err(Error::Config(format!(
            "censor year {censor_year} precedes founding year {} of {}",
            s.founding_year, s.startup_id
        )));
    }
    let last = s.first_vc_year.map_or(censor_year, |f| f.min(censor_year));
    let mut rows = Vec::new();
    for year in s.founding_year..=last {
        let directors = carried(&s.yearly_director_categories, year).ok_or_else(|| {
            Error::InvalidData(format!("startup {} has no director data", s.startup_id))
        })?;
        let team = hhi(directors, index)
            .map_err(|e| Error::InvalidData(format!("startup {} year {year}: {e}", s.startup_id)))?;
        let academic = match carried(&s.yearly_phd_directors, year) {
            Some(p) if p.total > 0 => p.phd as f64 / p.total as f64,
            Some(_) => 0.0,
            None => {
                return Err(Error::InvalidData(format!(
                    "startup {} has no PhD director data",
                    s.startup_id
                )))
            }
        };
        // Years without any scored news: neutral favorability, zero topic
        // intensity, zero standardized media scores.
        let (p, d, c, m, news, fav, topics) = match scores.get(&s.startup_id, year) {
            Some(r) => (
                r.record.prevalence_z,
                r.record.distinctiveness_z,
                r.record.connectivity_z,
                r.record.memorability,
                r.record.news_count as f64,
                r.media_favorability,
                r.topics.clone(),
            ),
            None => (0.0, 0.0, 0.0, 0.0, 0.0, 0.0, vec![0.0; scores.topic_count]),
        };
        let age = (year - s.founding_year) as f64;
        let mut cov = vec![
            s.london as u8 as f64,
            team,
            academic,
            (1.0 + s.patent_stock).ln(),
            s.publication_count,
            s.academic_spinoff as u8 as f64,
        ];
        cov.extend(topics);
        cov.extend([fav, p, d, c, m, news]);
        rows.push(PanelRow {
            startup_id: s.startup_id.clone(),
            year,
            t_start: age,
            t_stop: age + 1.0,
            event: s.first_vc_year == Some(year),
            covariates: cov,
        });
    }
    Ok(rows)
}

/// Assembles the panel. Topic intensities are standardized over all panel rows;
/// a topic with no variation is left at zero.
pub fn build_panel(
    registry: &Registry,
    scores: &ScoreTable,
    censor_year: i32,
    index: HeterogeneityIndex,
) -> Result<PanelTable> {
    let mut names: Vec<String> = [
        LONDON,
        TEAM_HETEROGENEITY,
        ACADEMIC_PREVALENCE,
        PATENTS,
        PUBLICATIONS,
        ACADEMIC_SPINOFF,
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    names.extend((1..=scores.topic_count).map(topic_column));
    names.extend(
        [FAVORABILITY, PREVALENCE, DISTINCTIVENESS, CONNECTIVITY, MEMORABILITY, NEWS_COUNT]
            .iter()
            .map(|s| s.to_string()),
    );

    let mut rows = Vec::new();
    for s in registry.iter() {
        rows.extend(startup_rows(s, scores, censor_year, index)?);
    }

    let first_topic = 6;
    for k in 0..scores.topic_count {
        let j = first_topic + k;
        let col: Vec<f64> = rows.iter().map(|r| r.covariates[j]).collect();
        if col.is_empty() {
            continue;
        }
        let (m, sd) = (mean(&col), population_sd(&col));
        for r in rows.iter_mut() {
            r.covariates[j] = if sd > 0.0 { (r.covariates[j] - m) / sd } else { 0.0 };
        }
    }

    Ok(PanelTable {
        covariate_names: names,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PhdCounts;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn startup(id: &str, founded: i32, funded: Option<i32>) -> StartupRecord {
        let mut dirs = BTreeMap::new();
        dirs.insert(
            founded,
            [(DirectorCategory::Finance, 2), (DirectorCategory::Law, 2)]
                .into_iter()
                .collect(),
        );
        let mut phd = BTreeMap::new();
        phd.insert(founded, PhdCounts { phd: 1, total: 4 });
        StartupRecord {
            startup_id: id.into(),
            canonical_name: id.into(),
            aliases: vec![],
            founding_year: founded,
            first_vc_year: funded,
            london: true,
            academic_spinoff: false,
            yearly_director_categories: dirs,
            yearly_phd_directors: phd,
            patent_stock: 3.0,
            publication_count: 2.0,
        }
    }

    #[test]
    fn hhi_examples() {
        let one: DirectorCounts = [(DirectorCategory::Law, 5)].into_iter().collect();
        assert_eq!(hhi(&one, HeterogeneityIndex::Blau).unwrap(), 0.0);
        assert_eq!(hhi(&one, HeterogeneityIndex::Hhi).unwrap(), 1.0);
        let even: DirectorCounts = DirectorCategory::ALL.iter().map(|c| (*c, 1)).collect();
        assert_abs_diff_eq!(hhi(&even, HeterogeneityIndex::Blau).unwrap(), 0.833333, epsilon = 1e-6);
        let two: DirectorCounts = [(DirectorCategory::Finance, 2), (DirectorCategory::Law, 2)]
            .into_iter()
            .collect();
        assert_abs_diff_eq!(hhi(&two, HeterogeneityIndex::Blau).unwrap(), 0.5, epsilon = 1e-15);
        assert!(hhi(&DirectorCounts::new(), HeterogeneityIndex::Blau).is_err());
    }

    proptest! {
        #[test]
        fn hhi_range_and_label_symmetry(counts in prop::collection::vec(0u32..20, 6), rot in 0usize..6) {
            prop_assume!(counts.iter().sum::<u32>() > 0);
            let a: DirectorCounts = DirectorCategory::ALL.iter().copied().zip(counts.iter().copied()).collect();
            let mut rotated = counts.clone();
            rotated.rotate_left(rot);
            let b: DirectorCounts = DirectorCategory::ALL.iter().copied().zip(rotated).collect();
            let ha = hhi(&a, HeterogeneityIndex::Blau).unwrap();
            prop_assert!((0.0..=1.0 - 1.0 / 6.0 + 1e-12).contains(&ha));
            prop_assert!((ha - hhi(&b, HeterogeneityIndex::Blau).unwrap()).abs() < 1e-12);
        }
    }

    fn registry(records: Vec<StartupRecord>) -> Registry {
        Registry::new(records).unwrap()
    }

    #[test]
    fn funded_after_three_years() {
        let reg = registry(vec![startup("s1", 2000, Some(2003))]);
        let p = build_panel(&reg, &ScoreTable::new(0), 2010, HeterogeneityIndex::Blau).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.rows.iter().map(|r| r.year).collect::<Vec<_>>(), vec![2000, 2001, 2002, 2003]);
        assert_eq!(p.rows.iter().filter(|r| r.event).map(|r| r.year).collect::<Vec<_>>(), vec![2003]);
        assert_eq!((p.rows[3].t_start, p.rows[3].t_stop), (3.0, 4.0));
        let patents = p.column(PATENTS).unwrap();
        assert_abs_diff_eq!(patents[0], 4.0f64.ln(), epsilon = 1e-15);
        assert_eq!(p.column(TEAM_HETEROGENEITY).unwrap()[2], 0.5);
        assert_eq!(p.column(ACADEMIC_PREVALENCE).unwrap()[1], 0.25);
    }

    #[test]
    fn never_funded_is_censored() {
        let reg = registry(vec![startup("s2", 2004, None)]);
        let p = build_panel(&reg, &ScoreTable::new(0), 2010, HeterogeneityIndex::Blau).unwrap();
        assert_eq!(p.len(), 7);
        assert_eq!(p.events(), 0);
    }

    #[test]
    fn funded_in_founding_year() {
        let reg = registry(vec![startup("s3", 2005, Some(2005))]);
        let p = build_panel(&reg, &ScoreTable::new(0), 2010, HeterogeneityIndex::Blau).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p.rows[0].event);
    }

    #[test]
    fn funding_after_horizon_is_censored() {
        let reg = registry(vec![startup("s4", 2008, Some(2012))]);
        let p = build_panel(&reg, &ScoreTable::new(0), 2010, HeterogeneityIndex::Blau).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.events(), 0);
    }

    #[test]
    fn funding_before_founding_rejected() {
        let reg = registry(vec![startup("s5", 2008, Some(2006))]);
        assert!(build_panel(&reg, &ScoreTable::new(0), 2010, HeterogeneityIndex::Blau).is_err());
        let reg = registry(vec![startup("s6", 2012, None)]);
        assert!(matches!(
            build_panel(&reg, &ScoreTable::new(0), 2010, HeterogeneityIndex::Blau),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let reg = registry(vec![startup("s1", 2000, Some(2002)), startup("s2", 2001, None)]);
        let p = build_panel(&reg, &ScoreTable::new(1), 2003, HeterogeneityIndex::Blau).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(f.path(), p.to_csv_string()).unwrap();
        let back = PanelTable::read_csv(f.path()).unwrap();
        assert_eq!(back.covariate_names, p.covariate_names);
        assert_eq!(back.len(), p.len());
        assert_eq!(back.to_csv_string(), p.to_csv_string());
    }

    proptest! {
        #[test]
        fn row_counts_and_events(specs in prop::collection::vec((1995i32..2006, prop::option::of(0i32..8)), 1..25)) {
            let censor = 2010;
            let recs: Vec<StartupRecord> = specs.iter().enumerate()
                .map(|(i, (f, d))| startup(&format!("s{i}"), *f, d.map(|d| f + d)))
                .collect();
            let reg = registry(recs.clone());
            let p = build_panel(&reg, &ScoreTable::new(0), censor, HeterogeneityIndex::Blau).unwrap();
            let funded = recs.iter().filter(|r| r.first_vc_year.is_some_and(|y| y <= censor)).count();
            prop_assert_eq!(p.events(), funded);
            for r in &recs {
                let n = p.rows.iter().filter(|row| row.startup_id == r.startup_id).count() as i32;
                match r.first_vc_year {
                    Some(y) if y <= censor => prop_assert_eq!(n, y - r.founding_year + 1),
                    _ => prop_assert_eq!(n, censor - r.founding_year + 1),
                }
            }
            for row in &p.rows {
                prop_assert!(row.t_start < row.t_stop);
            }
        }
    }
}
