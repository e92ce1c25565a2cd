//! Weighted, undirected word co-occurrence networks.
//!
//! Nodes are the distinct tokens of the input sequences (stems and brand tokens).
//! For every token position `p` and every `q` with `p < q <= p + window` in the
//! same document, the unordered pair of terms gains one unit of weight unless
//! both positions hold the same term.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use rayon::prelude::*;

use crate::corpus::TokenSequence;
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemanticNetwork {
    /// `None` for a network pooled over all years.
    pub year: Option<i32>,
    terms: Vec<String>,
    index: BTreeMap<String, usize>,
    adj: Vec<BTreeMap<usize, u64>>,
}

impl SemanticNetwork {
    /// Builds a network from sorted, unique terms and unordered weighted pairs.
    pub fn from_edges<I>(year: Option<i32>, terms: BTreeSet<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String, u64)>,
    {
        let terms: Vec<String> = terms.into_iter().collect();
        let index: BTreeMap<String, usize> =
            terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let mut adj = vec![BTreeMap::new(); terms.len()];
        for (a, b, w) in edges {
            let ia = *index.get(&a).ok_or_else(|| Error::UnknownTerm(a.clone()))?;
            let ib = *index.get(&b).ok_or_else(|| Error::UnknownTerm(b.clone()))?;
            if ia == ib {
                return Err(Error::InvalidData(format!("self-loop on '{a}'")));
            }
            if w == 0 {
                continue;
            }
            *adj[ia].entry(ib).or_insert(0) += w;
            *adj[ib].entry(ia).or_insert(0) += w;
        }
        Ok(SemanticNetwork {
            year,
            terms,
            index,
            adj,
        })
    }

    /// Number of nodes (`g`).
    pub fn node_count(&self) -> usize {
        self.terms.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in lexicographic order; a term's position is its node index.
    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, idx: usize) -> &str {
        &self.terms[idx]
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.index.contains_key(term)
    }

    /// Neighbours of a node with edge weights, ascending by node index.
    pub fn neighbors(&self, idx: usize) -> &BTreeMap<usize, u64> {
        &self.adj[idx]
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<u64> {
        let ia = self.index_of(a)?;
        let ib = self.index_of(b)?;
        self.adj[ia].get(&ib).copied()
    }

    /// Unweighted degree: number of distinct neighbours.
    pub fn degree(&self, term: &str) -> Result<usize> {
        self.index_of(term)
            .map(|i| self.adj[i].len())
            .ok_or_else(|| Error::UnknownTerm(term.to_string()))
    }

    pub fn degree_of(&self, idx: usize) -> usize {
        self.adj[idx].len()
    }

    pub fn weighted_degree_of(&self, idx: usize) -> u64 {
        self.adj[idx].values().sum()
    }

    pub fn total_weight(&self) -> u64 {
        self.adj.iter().flat_map(|m| m.values()).sum::<u64>() / 2
    }

    /// Each undirected edge once, as `(i, j, w)` with `i < j`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.adj.iter().enumerate().flat_map(|(i, m)| {
            m.range(i + 1..).map(move |(&j, &w)| (i, j, w))
        })
    }

    /// Canonical text form: header `year g edge_count`, then `term_a term_b weight`
    /// lines sorted lexicographically, then one line per isolated term.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        let year = self.year.map_or_else(|| "all".to_string(), |y| y.to_string());
        let _ = writeln!(out, "{year} {} {}", self.node_count(), self.edge_count());
        // terms are stored sorted, so index order is lexicographic order
        for (i, j, w) in self.edges() {
            let _ = writeln!(out, "{} {} {w}", self.terms[i], self.terms[j]);
        }
        for (i, t) in self.terms.iter().enumerate() {
            if self.adj[i].is_empty() {
                let _ = writeln!(out, "{t}");
            }
        }
        out
    }

    pub fn read_canonical<R: Read>(reader: R) -> Result<Self> {
        let ctx = "network file";
        let mut lines = BufReader::new(reader).lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(ctx, 1, "missing header"))?;
        let header = header.map_err(|e| Error::parse(ctx, 1, e))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::parse(ctx, 1, "header must be 'year g edge_count'"));
        }
        let year = match fields[0] {
            "all" => None,
            y => Some(y.parse::<i32>().map_err(|e| Error::parse(ctx, 1, e))?),
        };
        let g: usize = fields[1].parse().map_err(|e| Error::parse(ctx, 1, e))?;
        let m: usize = fields[2].parse().map_err(|e| Error::parse(ctx, 1, e))?;
        let mut terms = BTreeSet::new();
        let mut edges = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| Error::parse(ctx, i + 1, e))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            match f.as_slice() {
                [] => {}
                [t] => {
                    terms.insert(t.to_string());
                }
                [a, b, w] => {
                    let w: u64 = w.parse().map_err(|e| Error::parse(ctx, i + 1, e))?;
                    terms.insert(a.to_string());
                    terms.insert(b.to_string());
                    edges.push((a.to_string(), b.to_string(), w));
                }
                _ => return Err(Error::parse(ctx, i + 1, "expected 'term_a term_b weight'")),
            }
        }
        let net = SemanticNetwork::from_edges(year, terms, edges)?;
        if net.node_count() != g || net.edge_count() != m {
            return Err(Error::parse(
                ctx,
                1,
                format!(
                    "header declares {g} nodes/{m} edges, body has {}/{}",
                    net.node_count(),
                    net.edge_count()
                ),
            ));
        }
        Ok(net)
    }
}

fn accumulate_pairs(
    seq: &TokenSequence,
    index: &BTreeMap<&str, usize>,
    window: usize,
    acc: &mut HashMap<(usize, usize), u64>,
) {
    let ids: Vec<usize> = seq.tokens.iter().map(|t| index[t.as_str()]).collect();
    for p in 0..ids.len() {
        let end = (p + window).min(ids.len() - 1);
        for q in p + 1..=end {
            let (a, b) = (ids[p], ids[q]);
            if a != b {
                *acc.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
    }
}

fn build(year: Option<i32>, sequences: &[&TokenSequence], window: usize) -> Result<SemanticNetwork> {
    if window == 0 {
        return Err(Error::Config("co-occurrence window must be >= 1".into()));
    }
    let terms: BTreeSet<String> = sequences
        .iter()
        .flat_map(|s| s.tokens.iter().cloned())
        .collect();
    let index: BTreeMap<&str, usize> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_str(), i))
        .collect();
    let counts = sequences
        .par_iter()
        .fold(HashMap::new, |mut acc, seq| {
            accumulate_pairs(seq, &index, window, &mut acc);
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let names: Vec<&String> = terms.iter().collect();
    let edges: Vec<(String, String, u64)> = counts
        .into_iter()
        .map(|((a, b), w)| (names[a].clone(), names[b].clone(), w))
        .collect();
    SemanticNetwork::from_edges(year, terms, edges)
}

/// Builds the network of one year. All sequences must carry the same year.
pub fn build_network(sequences: &[&TokenSequence], window: usize) -> Result<SemanticNetwork> {
    let year = match sequences.first() {
        Some(first) => {
            if let Some(other) = sequences.iter().find(|s| s.year != first.year) {
                return Err(Error::MixedYears(first.year, other.year));
            }
            Some(first.year)
        }
        None => None,
    };
    build(year, sequences, window)
}

/// Builds one network pooled over every sequence regardless of year.
pub fn build_global_network(sequences: &[&TokenSequence], window: usize) -> Result<SemanticNetwork> {
    build(None, sequences, window)
}
