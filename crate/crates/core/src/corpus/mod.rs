//! News corpus ingestion, startup registry and text normalization.

mod preprocess;
mod registry;

pub use preprocess::{
    brand_token, default_stopwords, is_brand_token, load_stopwords, preprocess, BrandAlias, PreprocessConfig,
    Preprocessor, StemmerKind, TokenSequence,
};
pub use registry::{
    load_registry, DirectorCategory, DirectorCounts, PhdCounts, Registry, StartupRecord,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Human-coded tone of an article towards one startup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FavorabilityLabel {
    Favorable,
    Unfavorable,
    Neutral,
}

impl FromStr for FavorabilityLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "favorable" => Ok(FavorabilityLabel::Favorable),
            "unfavorable" => Ok(FavorabilityLabel::Unfavorable),
            "neutral" => Ok(FavorabilityLabel::Neutral),
            other => Err(Error::UnknownLabel(other.to_string())),
        }
    }
}

/// Label as ingested. The label string is validated when tallied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelEntry {
    pub startup_id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub date: NaiveDate,
    pub outlet: String,
    pub text: String,
    pub labels: Vec<LabelEntry>,
}

impl Document {
    /// Documents are assigned to the calendar year of publication.
    pub fn year(&self) -> i32 {
        self.date.year()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "jsonl" | "ndjson" | "json" => Some(CorpusFormat::Jsonl),
            "csv" => Some(CorpusFormat::Csv),
            _ => None,
        }
    }
}

/// An ordered collection of documents with unique ids.
#[derive(Debug, Clone, Default)]
pub struct DocumentSet {
    docs: Vec<Document>,
}

impl DocumentSet {
    pub fn new(docs: Vec<Document>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut dups = BTreeSet::new();
        for d in &docs {
            if !seen.insert(d.doc_id.as_str()) {
                dups.insert(d.doc_id.clone());
            }
        }
        if !dups.is_empty() {
            return Err(Error::DuplicateId(dups.into_iter().collect()));
        }
        Ok(DocumentSet { docs })
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.docs.iter()
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn years(&self) -> BTreeSet<i32> {
        self.docs.iter().map(Document::year).collect()
    }

    pub fn by_year(&self) -> BTreeMap<i32, Vec<&Document>> {
        let mut out: BTreeMap<i32, Vec<&Document>> = BTreeMap::new();
        for d in &self.docs {
            out.entry(d.year()).or_default().push(d);
        }
        out
    }

    /// Merges externally supplied labels (doc_id, startup_id, label) into the documents.
    pub fn attach_labels(&mut self, labels: Vec<(String, LabelEntry)>) -> Result<()> {
        let index: BTreeMap<String, usize> = self
            .docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.clone(), i))
            .collect();
        for (doc_id, entry) in labels {
            let i = *index
                .get(&doc_id)
                .ok_or_else(|| Error::InvalidData(format!("label for unknown doc_id '{doc_id}'")))?;
            self.docs[i].labels.push(entry);
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a DocumentSet {
    type Item = &'a Document;
    type IntoIter = std::slice::Iter<'a, Document>;

    fn into_iter(self) -> Self::IntoIter {
        self.docs.iter()
    }
}

#[derive(Deserialize)]
struct RawJsonDoc {
    doc_id: String,
    date: String,
    outlet: String,
    text: String,
    #[serde(default)]
    labels: Option<Vec<LabelEntry>>,
}

#[derive(Deserialize)]
struct RawCsvDoc {
    doc_id: String,
    date: String,
    outlet: String,
    text: String,
    #[serde(default)]
    labels: Option<String>,
}

pub(crate) fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    let s = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Ok(d);
    }
    DateTime::parse_from_rfc3339(s)
        .map(|dt| dt.date_naive())
        .map_err(|_| format!("unparseable date '{s}'"))
}

fn parse_csv_labels(s: &str) -> std::result::Result<Vec<LabelEntry>, String> {
    s.split(';')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|pair| {
            let (id, label) = pair
                .split_once(':')
                .ok_or_else(|| format!("label pair '{pair}' is not startup_id:label"))?;
            Ok(LabelEntry {
                startup_id: id.trim().to_string(),
                label: label.trim().to_string(),
            })
        })
        .collect()
}

fn build_doc(
    doc_id: String,
    date: &str,
    outlet: String,
    text: String,
    labels: Vec<LabelEntry>,
) -> std::result::Result<Document, String> {
    if doc_id.trim().is_empty() {
        return Err("empty doc_id".into());
    }
    if text.trim().is_empty() {
        return Err(format!("document '{doc_id}' has empty text"));
    }
    Ok(Document {
        date: parse_date(date)?,
        doc_id,
        outlet,
        text,
        labels,
    })
}

/// Reads a corpus file. Records are numbered from 1 (JSONL: line number, CSV: data row).
pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<DocumentSet> {
    let ctx = path.display().to_string();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    match format {
        CorpusFormat::Jsonl => {
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let raw: RawJsonDoc =
                    serde_json::from_str(&line).map_err(|e| Error::parse(&ctx, i + 1, e))?;
                let doc = build_doc(
                    raw.doc_id,
                    &raw.date,
                    raw.outlet,
                    raw.text,
                    raw.labels.unwrap_or_default(),
                )
                .map_err(|e| Error::parse(&ctx, i + 1, e))?;
                docs.push(doc);
            }
        }
        CorpusFormat::Csv => {
            let mut rdr = csv::Reader::from_reader(file);
            for (i, rec) in rdr.deserialize::<RawCsvDoc>().enumerate() {
                let raw = rec.map_err(|e| Error::parse(&ctx, i + 1, e))?;
                let labels = parse_csv_labels(raw.labels.as_deref().unwrap_or(""))
                    .map_err(|e| Error::parse(&ctx, i + 1, e))?;
                let doc = build_doc(raw.doc_id, &raw.date, raw.outlet, raw.text, labels)
                    .map_err(|e| Error::parse(&ctx, i + 1, e))?;
                docs.push(doc);
            }
        }
    }
    DocumentSet::new(docs)
}

/// Reads a standalone label file with columns doc_id, startup_id, label.
pub fn load_labels(path: &Path) -> Result<Vec<(String, LabelEntry)>> {
    #[derive(Deserialize)]
    struct Row {
        doc_id: String,
        startup_id: String,
        label: String,
    }
    let ctx = path.display().to_string();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(&ctx, 0, format!("{other:?}")),
    })?;
    rdr.deserialize::<Row>()
        .enumerate()
        .map(|(i, r)| {
            let r = r.map_err(|e| Error::parse(&ctx, i + 1, e))?;
            Ok((
                r.doc_id,
                LabelEntry {
                    startup_id: r.startup_id,
                    label: r.label,
                },
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str, suffix: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_three_jsonl_records() {
        let f = write_tmp(
            r#"{"doc_id":"d1","date":"2001-02-03","outlet":"Times","text":"alpha"}
{"doc_id":"d2","date":"2001-05-03","outlet":"Times","text":"beta","labels":[{"startup_id":"s1","label":"favorable"}]}
{"doc_id":"d3","date":"2002-01-01T10:00:00Z","outlet":"Mirror","text":"gamma"}
"#,
            ".jsonl",
        );
        let set = load_corpus(f.path(), CorpusFormat::Jsonl).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(set.documents()[1].labels[0].startup_id, "s1");
        assert_eq!(set.documents()[2].year(), 2002);
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let f = write_tmp(
            r#"{"doc_id":"d1","date":"2001-02-03","outlet":"Times","text":"alpha"}
{"doc_id":"d1","date":"2001-02-04","outlet":"Times","text":"beta"}
"#,
            ".jsonl",
        );
        match load_corpus(f.path(), CorpusFormat::Jsonl) {
            Err(Error::DuplicateId(ids)) => assert_eq!(ids, vec!["d1".to_string()]),
            other => panic!("expected duplicate error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_empty_set() {
        let f = write_tmp("", ".jsonl");
        assert!(load_corpus(f.path(), CorpusFormat::Jsonl).unwrap().is_empty());
    }

    #[test]
    fn malformed_record_names_line() {
        let f = write_tmp(
            "{\"doc_id\":\"d1\",\"date\":\"2001-02-03\",\"outlet\":\"T\",\"text\":\"x\"}\n{not json}\n",
            ".jsonl",
        );
        match load_corpus(f.path(), CorpusFormat::Jsonl) {
            Err(Error::Parse { record, .. }) => assert_eq!(record, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_text_and_bad_date_rejected() {
        let f = write_tmp(
            "{\"doc_id\":\"d1\",\"date\":\"2001-02-03\",\"outlet\":\"T\",\"text\":\"   \"}\n",
            ".jsonl",
        );
        assert!(load_corpus(f.path(), CorpusFormat::Jsonl).is_err());
        let f = write_tmp(
            "{\"doc_id\":\"d1\",\"date\":\"03/02/2001\",\"outlet\":\"T\",\"text\":\"x\"}\n",
            ".jsonl",
        );
        assert!(load_corpus(f.path(), CorpusFormat::Jsonl).is_err());
    }

    #[test]
    fn csv_with_label_pairs() {
        let f = write_tmp(
            "doc_id,date,outlet,text,labels\nd1,2003-01-01,Times,\"Alpha Nano, again\",s1:favorable;s2:neutral\nd2,2003-02-01,Times,plain,\n",
            ".csv",
        );
        let set = load_corpus(f.path(), CorpusFormat::Csv).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.documents()[0].labels.len(), 2);
        assert_eq!(set.documents()[0].labels[1].label, "neutral");
        assert!(set.documents()[1].labels.is_empty());
    }

    #[test]
    fn label_parsing() {
        assert_eq!(
            "unfavorable".parse::<FavorabilityLabel>().unwrap(),
            FavorabilityLabel::Unfavorable
        );
        assert!(matches!(
            "positive".parse::<FavorabilityLabel>(),
            Err(Error::UnknownLabel(_))
        ));
    }
}
