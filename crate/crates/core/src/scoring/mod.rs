//! Per-year brand scores: prevalence, distinctiveness, connectivity and the
//! composite memorability index.

mod betweenness;

pub use betweenness::{weighted_betweenness, weighted_betweenness_sequential};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{brand_token, TokenSequence};
use crate::error::{Error, Result};
use crate::semnet::SemanticNetwork;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub startup_id: String,
    pub year: i32,
    pub news_count: usize,
    pub prevalence_raw: u64,
    pub distinctiveness_raw: f64,
    pub connectivity_raw: f64,
    pub prevalence_z: f64,
    pub distinctiveness_z: f64,
    pub connectivity_z: f64,
    pub memorability: f64,
}

/// Total occurrences of the startup's brand token, repeated mentions included.
pub fn prevalence(sequences: &[&TokenSequence], startup_id: &str) -> u64 {
    sequences.iter().map(|s| s.mentions(startup_id) as u64).sum()
}

/// Number of documents mentioning the startup at least once.
pub fn news_count(sequences: &[&TokenSequence], startup_id: &str) -> usize {
    sequences.iter().filter(|s| s.mentions(startup_id) > 0).count()
}

fn distinctiveness_at(net: &SemanticNetwork, idx: usize) -> f64 {
    let g_minus_1 = (net.node_count() - 1) as f64;
    net.neighbors(idx)
        .keys()
        .map(|&j| (g_minus_1 / net.degree_of(j) as f64).log10())
        .sum()
}

/// Sum over the term's neighbours `j` of `log10((g - 1) / d_j)`.
pub fn distinctiveness(net: &SemanticNetwork, term: &str) -> Result<f64> {
    let idx = net
        .index_of(term)
        .ok_or_else(|| Error::UnknownTerm(term.to_string()))?;
    Ok(distinctiveness_at(net, idx))
}

/// Distinctiveness of every term, indexed like `net.terms()`.
pub fn distinctiveness_all(net: &SemanticNetwork) -> Vec<f64> {
    (0..net.node_count())
        .map(|i| distinctiveness_at(net, i))
        .collect()
}

/// Weighted betweenness of one term (edge length `1/w`).
pub fn connectivity(net: &SemanticNetwork, term: &str) -> Result<f64> {
    let idx = net
        .index_of(term)
        .ok_or_else(|| Error::UnknownTerm(term.to_string()))?;
    Ok(weighted_betweenness(net)[idx])
}

/// Mean and population standard deviation of a score over a year's term set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZStats {
    pub mean: f64,
    pub sd: f64,
}

impl ZStats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::ZeroVariance {
                year: None,
                what: format!("score over {} term(s)", values.len()),
            });
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        if !(sd > 0.0) || sd <= 1e-12 * mean.abs().max(1.0) {
            return Err(Error::ZeroVariance {
                year: None,
                what: "score".into(),
            });
        }
        Ok(ZStats { mean, sd })
    }

    pub fn z(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }
}

/// Z-scores over all terms of one year's network.
pub fn standardize(raw: &BTreeMap<String, f64>) -> Result<BTreeMap<String, f64>> {
    let values: Vec<f64> = raw.values().copied().collect();
    let stats = ZStats::from_values(&values)?;
    Ok(raw.iter().map(|(k, &v)| (k.clone(), stats.z(v))).collect())
}

/// Non-negative weights for the prevalence, distinctiveness and connectivity
/// z-scores; they must sum to 3 so that `(1, 1, 1)` is the plain sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeWeights(pub [f64; 3]);

impl Default for CompositeWeights {
    fn default() -> Self {
        CompositeWeights([1.0, 1.0, 1.0])
    }
}

impl CompositeWeights {
    pub fn new(prevalence: f64, distinctiveness: f64, connectivity: f64) -> Result<Self> {
        let w = CompositeWeights([prevalence, distinctiveness, connectivity]);
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config(format!(
                "composite weights must be non-negative, got {:?}",
                self.0
            )));
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 3.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "composite weights must sum to 3, got {sum}"
            )));
        }
        Ok(())
    }
}

pub fn memorability(p_z: f64, d_z: f64, c_z: f64, weights: &CompositeWeights) -> Result<f64> {
    weights.validate()?;
    let [wp, wd, wc] = weights.0;
    Ok(wp * p_z + wd * d_z + wc * c_z)
}

/// Year-level reference distributions used to standardize brand scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YearStats {
    pub prevalence: ZStats,
    pub distinctiveness: ZStats,
    pub connectivity: ZStats,
}

impl YearStats {
    /// Scores of a startup the year's news never mentions: raw zeros, standardized
    /// against the year's term distribution.
    pub fn unmentioned_z(&self) -> [f64; 3] {
        [
            self.prevalence.z(0.0),
            self.distinctiveness.z(0.0),
            self.connectivity.z(0.0),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct YearScores {
    pub year: i32,
    pub stats: YearStats,
    pub records: Vec<ScoreRecord>,
}

/// Scores every listed startup for one year. Term frequencies, distinctiveness and
/// betweenness of all network terms form the standardization population.
pub fn score_year(
    year: i32,
    sequences: &[&TokenSequence],
    net: &SemanticNetwork,
    startup_ids: &[&str],
    weights: &CompositeWeights,
) -> Result<YearScores> {
    weights.validate()?;
    let tag = |e: Error, what: &str| match e {
        Error::ZeroVariance { .. } => Error::ZeroVariance {
            year: Some(year),
            what: what.to_string(),
        },
        other => other,
    };

    let mut freq = vec![0.0; net.node_count()];
    for s in sequences {
        for t in &s.tokens {
            if let Some(i) = net.index_of(t) {
                freq[i] += 1.0;
            }
        }
    }
    let dist = distinctiveness_all(net);
    let betw = weighted_betweenness(net);

    let stats = YearStats {
        prevalence: ZStats::from_values(&freq).map_err(|e| tag(e, "prevalence"))?,
        distinctiveness: ZStats::from_values(&dist).map_err(|e| tag(e, "distinctiveness"))?,
        connectivity: ZStats::from_values(&betw).map_err(|e| tag(e, "connectivity"))?,
    };

    let mut records = Vec::with_capacity(startup_ids.len());
    for &id in startup_ids {
        let prev = prevalence(sequences, id);
        let (d, c) = match net.index_of(&brand_token(id)) {
            Some(i) => (dist[i], betw[i]),
            None => (0.0, 0.0),
        };
        let pz = stats.prevalence.z(prev as f64);
        let dz = stats.distinctiveness.z(d);
        let cz = stats.connectivity.z(c);
        records.push(ScoreRecord {
            startup_id: id.to_string(),
            year,
            news_count: news_count(sequences, id),
            prevalence_raw: prev,
            distinctiveness_raw: d,
            connectivity_raw: c,
            prevalence_z: pz,
            distinctiveness_z: dz,
            connectivity_z: cz,
            memorability: memorability(pz, dz, cz, weights)?,
        });
    }
    Ok(YearScores {
        year,
        stats,
        records,
    })
}

/// Min-max rescales memorability to [0, 1] within one year's records.
pub fn rescale_memorability(records: &mut [ScoreRecord]) {
    let (lo, hi) = records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.memorability), hi.max(r.memorability))
    });
    for r in records.iter_mut() {
        r.memorability = if hi > lo {
            (r.memorability - lo) / (hi - lo)
        } else {
            0.0
        };
    }
}
