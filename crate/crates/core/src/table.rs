//! The per-(startup, year) scores table and its CSV form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scoring::ScoreRecord;

pub const SCORE_COLUMNS: [&str; 11] = [
    "startup_id",
    "year",
    "news_count",
    "prevalence_raw",
    "distinctiveness_raw",
    "connectivity_raw",
    "prevalence_z",
    "distinctiveness_z",
    "connectivity_z",
    "memorability",
    "media_favorability",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub record: ScoreRecord,
    pub media_favorability: f64,
    /// Raw topic intensities, topic 1 first.
    pub topics: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreTable {
    pub topic_count: usize,
    pub rows: BTreeMap<(String, i32), ScoreRow>,
}

/// Fixed six-decimal rendering; negative zero prints as zero.
pub fn fmt6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

impl ScoreTable {
    pub fn new(topic_count: usize) -> Self {
        ScoreTable {
            topic_count,
            rows: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, row: ScoreRow) -> Result<()> {
        if row.topics.len() != self.topic_count {
            return Err(Error::InvalidData(format!(
                "score row has {} topic values, table expects {}",
                row.topics.len(),
                self.topic_count
            )));
        }
        let key = (row.record.startup_id.clone(), row.record.year);
        self.rows.insert(key, row);
        Ok(())
    }

    pub fn get(&self, startup_id: &str, year: i32) -> Option<&ScoreRow> {
        self.rows.get(&(startup_id.to_string(), year))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn header(&self) -> Vec<String> {
        SCORE_COLUMNS
            .iter()
            .map(|s| s.to_string())
            .chain((1..=self.topic_count).map(|k| format!("topic_{k}")))
            .collect()
    }

    /// Rows sorted by (startup_id, year), reals with six decimals.
    pub fn to_csv_string(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for row in self.rows.values() {
            let r = &row.record;
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.startup_id,
                r.year,
                r.news_count,
                r.prevalence_raw,
                fmt6(r.distinctiveness_raw),
                fmt6(r.connectivity_raw),
                fmt6(r.prevalence_z),
                fmt6(r.distinctiveness_z),
                fmt6(r.connectivity_z),
                fmt6(r.memorability),
                fmt6(row.media_favorability),
            );
            for t in &row.topics {
                out.push(',');
                out.push_str(&fmt6(*t));
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
        let names: Vec<&str> = headers.iter().collect();
        if names.len() < SCORE_COLUMNS.len() || names[..SCORE_COLUMNS.len()] != SCORE_COLUMNS {
            return Err(Error::parse(&ctx, 0, "unexpected scores header"));
        }
        let topic_count = names.len() - SCORE_COLUMNS.len();
        for (k, n) in names[SCORE_COLUMNS.len()..].iter().enumerate() {
            if *n != format!("topic_{}", k + 1) {
                return Err(Error::parse(&ctx, 0, format!("unexpected column '{n}'")));
            }
        }
        let mut table = ScoreTable::new(topic_count);
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(&ctx, i + 1, e))?;
            let f = |c: usize| -> Result<f64> {
                rec[c]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::parse(&ctx, i + 1, format!("column {}: {e}", names[c])))
            };
            let int = |c: usize| -> Result<i64> {
                rec[c]
                    .trim()
                    .parse::<i64>()
                    .map_err(|e| Error::parse(&ctx, i + 1, format!("column {}: {e}", names[c])))
            };
            let record = ScoreRecord {
                startup_id: rec[0].to_string(),
                year: int(1)? as i32,
                news_count: int(2)? as usize,
                prevalence_raw: int(3)? as u64,
                distinctiveness_raw: f(4)?,
                connectivity_raw: f(5)?,
                prevalence_z: f(6)?,
                distinctiveness_z: f(7)?,
                connectivity_z: f(8)?,
                memorability: f(9)?,
            };
            let topics = (0..topic_count)
                .map(|k| f(SCORE_COLUMNS.len() + k))
                .collect::<Result<Vec<_>>>()?;
            table.insert(ScoreRow {
                record,
                media_favorability: f(10)?,
                topics,
            })?;
        }
        Ok(table)
    }
}
