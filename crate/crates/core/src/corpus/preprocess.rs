use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

use super::Document;
use crate::error::{Error, Result};

const BRAND_PREFIX: &str = "BRAND_";

/// Canonical token standing in for every mention of a startup.
pub fn brand_token(startup_id: &str) -> String {
    format!("{BRAND_PREFIX}{startup_id}")
}

pub fn is_brand_token(token: &str) -> bool {
    token.starts_with(BRAND_PREFIX)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StemmerKind {
    #[default]
    Porter,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrandAlias {
    pub startup_id: String,
    pub alias: String,
}

#[derive(Debug, Clone)]
pub struct PreprocessConfig {
    pub stopwords: BTreeSet<String>,
    pub stemmer: StemmerKind,
    pub aliases: Vec<BrandAlias>,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            stopwords: default_stopwords(),
            stemmer: StemmerKind::Porter,
            aliases: Vec::new(),
        }
    }
}

pub fn default_stopwords() -> BTreeSet<String> {
    include_str!("stopwords_en.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

/// One stopword per line; `#` starts a comment.
pub fn load_stopwords(path: &Path) -> Result<BTreeSet<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub doc_id: String,
    pub year: i32,
    pub tokens: Vec<String>,
    pub brand_positions: BTreeMap<String, Vec<usize>>,
}

impl TokenSequence {
    /// Occurrences of the startup's brand token.
    pub fn mentions(&self, startup_id: &str) -> usize {
        self.brand_positions.get(startup_id).map_or(0, Vec::len)
    }

    /// Space-joined token text; feeding it back through the pipeline is a no-op.
    pub fn render(&self) -> String {
        self.tokens.join(" ")
    }
}

enum Piece {
    Word(String),
    Brand(String),
}

/// Compiled form of a [`PreprocessConfig`], reusable across documents.
pub struct Preprocessor {
    stopwords: BTreeSet<String>,
    stemmer: Option<Stemmer>,
    // (alias words, startup_id), sorted longest first
    aliases: Vec<(Vec<String>, String)>,
    known_ids: BTreeSet<String>,
}

impl Preprocessor {
    pub fn new(config: &PreprocessConfig) -> Self {
        let mut aliases: Vec<(Vec<String>, String)> = config
            .aliases
            .iter()
            .map(|a| (split_words(&a.alias.to_lowercase()), a.startup_id.clone()))
            .filter(|(w, _)| !w.is_empty())
            .collect();
        aliases.sort_by(|a, b| {
            b.0.len()
                .cmp(&a.0.len())
                .then_with(|| b.0.concat().len().cmp(&a.0.concat().len()))
                .then_with(|| a.cmp(b))
        });
        aliases.dedup();
        Preprocessor {
            stopwords: config.stopwords.clone(),
            stemmer: match config.stemmer {
                StemmerKind::Porter => Some(Stemmer::create(Algorithm::English)),
                StemmerKind::None => None,
            },
            known_ids: config.aliases.iter().map(|a| a.startup_id.clone()).collect(),
            aliases,
        }
    }

    fn stem(&self, word: &str) -> String {
        let Some(stemmer) = &self.stemmer else {
            return word.to_string();
        };
        let mut cur = word.to_string();
        // single-pass Porter is not idempotent (univers -> univ); iterate to a fixed point
        for _ in 0..8 {
            let next = stemmer.stem(&cur).into_owned();
            if next == cur {
                break;
            }
            cur = next;
        }
        cur
    }

    fn pieces(&self, text: &str) -> Vec<Piece> {
        let mut out = Vec::new();
        for chunk in text.split_whitespace() {
            if let Some(id) = chunk.strip_prefix(BRAND_PREFIX) {
                if self.known_ids.contains(id) {
                    out.push(Piece::Brand(id.to_string()));
                    continue;
                }
            }
            let lower = chunk.to_lowercase();
            if is_url(&lower) {
                continue;
            }
            out.extend(split_words(&lower).into_iter().map(Piece::Word));
        }
        out
    }

    pub fn run(&self, doc: &Document) -> TokenSequence {
        let pieces = self.pieces(&doc.text);

        // Alias matches over word runs: longest alias first, then leftmost, no overlaps.
        let mut claimed: Vec<Option<(String, usize)>> = vec![None; pieces.len()];
        let mut taken = vec![false; pieces.len()];
        for (words, id) in &self.aliases {
            let n = words.len();
            if n > pieces.len() {
                continue;
            }
            let mut start = 0;
            while start + n <= pieces.len() {
                let hit = (0..n).all(|k| {
                    !taken[start + k]
                        && matches!(&pieces[start + k], Piece::Word(w) if *w == words[k])
                });
                if hit {
                    for t in &mut taken[start..start + n] {
                        *t = true;
                    }
                    claimed[start] = Some((id.clone(), n));
                    start += n;
                } else {
                    start += 1;
                }
            }
        }

        let mut tokens = Vec::new();
        let mut brand_positions: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        let mut i = 0;
        while i < pieces.len() {
            if let Some((id, n)) = &claimed[i] {
                brand_positions.entry(id.clone()).or_default().push(tokens.len());
                tokens.push(brand_token(id));
                i += n;
                continue;
            }
            match &pieces[i] {
                Piece::Brand(id) => {
                    brand_positions.entry(id.clone()).or_default().push(tokens.len());
                    tokens.push(brand_token(id));
                }
                Piece::Word(w) => {
                    if !self.stopwords.contains(w) {
                        let s = self.stem(w);
                        if !s.is_empty() && !self.stopwords.contains(&s) {
                            tokens.push(s);
                        }
                    }
                }
            }
            i += 1;
        }

        TokenSequence {
            doc_id: doc.doc_id.clone(),
            year: doc.year(),
            tokens,
            brand_positions,
        }
    }
}

fn is_url(chunk: &str) -> bool {
    let c = chunk.trim_start_matches(|c: char| !c.is_alphanumeric());
    c.starts_with("http://") || c.starts_with("https://") || c.starts_with("www.")
}

fn split_words(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect()
}

/// Normalizes one document: lowercase, drop URLs, collapse startup aliases to brand
/// tokens, drop stopwords and stem the remaining words.
pub fn preprocess(doc: &Document, config: &PreprocessConfig) -> TokenSequence {
    Preprocessor::new(config).run(doc)
}
