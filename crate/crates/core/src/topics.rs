//! Discourse topics: Louvain partition of the pooled co-occurrence network,
//! representative keywords per cluster and per-startup topic intensities.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{is_brand_token, TokenSequence};
use crate::error::{Error, Result};
use crate::semnet::SemanticNetwork;

const GAIN_EPS: f64 = 1e-12;

/// Undirected weighted graph with explicit self-loop weights, used across
/// Louvain aggregation levels.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    loops: Vec<f64>,
}

impl WeightedGraph {
    /// `edges` lists each undirected edge once; parallel edges are summed.
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut maps: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        let mut loops = vec![0.0; n];
        for &(i, j, w) in edges {
            if i == j {
                loops[i] += w;
            } else {
                *maps[i].entry(j).or_insert(0.0) += w;
                *maps[j].entry(i).or_insert(0.0) += w;
            }
        }
        WeightedGraph {
            adj: maps.into_iter().map(|m| m.into_iter().collect()).collect(),
            loops,
        }
    }

    pub fn from_network(net: &SemanticNetwork) -> Self {
        let edges: Vec<(usize, usize, f64)> =
            net.edges().map(|(i, j, w)| (i, j, w as f64)).collect();
        WeightedGraph::new(net.node_count(), &edges)
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    fn strength(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.loops[i]
    }

    fn total_weight(&self) -> f64 {
        let off: f64 = self
            .adj
            .iter()
            .flat_map(|a| a.iter().map(|&(_, w)| w))
            .sum::<f64>()
            / 2.0;
        off + self.loops.iter().sum::<f64>()
    }

    /// Newman modularity with resolution `gamma`.
    pub fn modularity(&self, communities: &[usize], gamma: f64) -> f64 {
        let m = self.total_weight();
        if m == 0.0 {
            return 0.0;
        }
        let k = communities.iter().max().map_or(0, |c| c + 1);
        let mut inside = vec![0.0; k];
        let mut tot = vec![0.0; k];
        for i in 0..self.len() {
            let c = communities[i];
            tot[c] += self.strength(i);
            inside[c] += self.loops[i];
            for &(j, w) in &self.adj[i] {
                if j > i && communities[j] == c {
                    inside[c] += w;
                }
            }
        }
        (0..k)
            .map(|c| inside[c] / m - gamma * (tot[c] / (2.0 * m)).powi(2))
            .sum()
    }

    fn local_moves(&self, gamma: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, bool) {
        let n = self.len();
        let m = self.total_weight();
        let mut comm: Vec<usize> = (0..n).collect();
        if m == 0.0 {
            return (comm, false);
        }
        let k: Vec<f64> = (0..n).map(|i| self.strength(i)).collect();
        let mut tot = k.clone();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        let mut moved_any = false;
        let mut links: BTreeMap<usize, f64> = BTreeMap::new();
        loop {
            let mut moved = false;
            for &i in &order {
                let own = comm[i];
                links.clear();
                links.insert(own, 0.0);
                for &(j, w) in &self.adj[i] {
                    *links.entry(comm[j]).or_insert(0.0) += w;
                }
                tot[own] -= k[i];
                let gain = |c: usize, k_in: f64| k_in / m - gamma * tot[c] * k[i] / (2.0 * m * m);
                let mut best = own;
                let mut best_gain = gain(own, links[&own]);
                // ascending community id, so equal gains keep the lowest id
                for (&c, &k_in) in &links {
                    let g = gain(c, k_in);
                    if g > best_gain + GAIN_EPS {
                        best = c;
                        best_gain = g;
                    }
                }
                tot[best] += k[i];
                if best != own {
                    comm[i] = best;
                    moved = true;
                    moved_any = true;
                }
            }
            if !moved {
                break;
            }
        }
        (relabel(&comm), moved_any)
    }

    fn aggregate(&self, comm: &[usize]) -> WeightedGraph {
        let k = comm.iter().max().map_or(0, |c| c + 1);
        let mut edges = Vec::new();
        for i in 0..self.len() {
            if self.loops[i] != 0.0 {
                edges.push((comm[i], comm[i], self.loops[i]));
            }
            for &(j, w) in &self.adj[i] {
                if j > i {
                    edges.push((comm[i], comm[j], w));
                }
            }
        }
        WeightedGraph::new(k, &edges)
    }
}

/// Renumbers community labels by first appearance in node order.
fn relabel(comm: &[usize]) -> Vec<usize> {
    let mut map = BTreeMap::new();
    comm.iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect()
}

/// Multi-level Louvain. Node visiting order at each level is a seeded shuffle;
/// a node only moves for a strictly positive gain, and ties go to the lowest
/// community id. Returns a community label per node.
pub fn louvain(graph: &WeightedGraph, seed: u64, resolution: f64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut membership: Vec<usize> = (0..graph.len()).collect();
    let mut level = graph.clone();
    loop {
        let (comm, moved) = level.local_moves(resolution, &mut rng);
        if !moved {
            break;
        }
        for c in membership.iter_mut() {
            *c = comm[*c];
        }
        let next = level.aggregate(&comm);
        if next.len() == level.len() {
            break;
        }
        level = next;
    }
    relabel(&membership)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicOptions {
    pub seed: u64,
    pub resolution: f64,
    /// Clusters smaller than this are pooled into one catch-all cluster.
    pub min_cluster_size: usize,
    /// Keywords kept per topic.
    pub keywords: usize,
}

impl Default for TopicOptions {
    fn default() -> Self {
        TopicOptions {
            seed: 42,
            resolution: 1.0,
            min_cluster_size: 2,
            keywords: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicCluster {
    pub id: usize,
    pub keywords: Vec<String>,
}

/// Topics are numbered from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub clusters: BTreeMap<String, usize>,
    pub keyword_sets: BTreeMap<usize, Vec<String>>,
    pub k: usize,
    pub seed: u64,
    pub resolution: f64,
}

#[derive(Serialize, Deserialize)]
struct TopicsFile {
    k: usize,
    seed: u64,
    resolution: f64,
    clusters: Vec<TopicCluster>,
}

impl TopicModel {
    pub fn topic_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.keyword_sets.keys().copied()
    }

    pub fn cluster_terms(&self, id: usize) -> Vec<&str> {
        self.clusters
            .iter()
            .filter(|(_, &c)| c == id)
            .map(|(t, _)| t.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        let file = TopicsFile {
            k: self.k,
            seed: self.seed,
            resolution: self.resolution,
            clusters: self
                .keyword_sets
                .iter()
                .map(|(&id, kw)| TopicCluster {
                    id,
                    keywords: kw.clone(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("topics serialize");
        s.push('\n');
        s
    }

    /// Reads a topics file. The term-to-cluster map is not stored there, so
    /// only keyword sets are restored.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: TopicsFile =
            serde_json::from_str(text).map_err(|e| Error::parse("topics json", 1, e))?;
        Ok(TopicModel {
            clusters: BTreeMap::new(),
            keyword_sets: file.clusters.into_iter().map(|c| (c.id, c.keywords)).collect(),
            k: file.k,
            seed: file.seed,
            resolution: file.resolution,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Partitions the pooled network into topics.
///
/// Cluster ids are assigned by decreasing size, ties by the cluster's smallest
/// term; a catch-all cluster for undersized groups, if any, comes last.
pub fn detect_topics(net: &SemanticNetwork, options: &TopicOptions) -> Result<TopicModel> {
    if net.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    if !(options.resolution > 0.0) {
        return Err(Error::Config("topic resolution must be positive".into()));
    }
    let graph = WeightedGraph::from_network(net);
    let raw = louvain(&graph, options.seed, options.resolution);

    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (node, &c) in raw.iter().enumerate() {
        groups.entry(c).or_default().push(node);
    }
    let (mut big, small): (Vec<Vec<usize>>, Vec<Vec<usize>>) = groups
        .into_values()
        .partition(|g| g.len() >= options.min_cluster_size);
    // node indices follow lexicographic term order, so g[0] is the smallest term
    big.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let catch_all: Vec<usize> = small.into_iter().flatten().collect();
    if !catch_all.is_empty() {
        big.push(catch_all);
    }

    let mut clusters = BTreeMap::new();
    for (id0, group) in big.iter().enumerate() {
        for &node in group {
            clusters.insert(net.term(node).to_string(), id0 + 1);
        }
    }
    let mut model = TopicModel {
        clusters,
        keyword_sets: BTreeMap::new(),
        k: big.len(),
        seed: options.seed,
        resolution: options.resolution,
    };
    for id in 1..=model.k {
        let kw = representative_keywords(&model, net, id, options.keywords)?;
        model.keyword_sets.insert(id, kw);
    }
    Ok(model)
}

/// Cluster members ranked by weight to fellow members minus weight to outsiders;
/// ties in lexicographic order. Brand tokens are never keywords.
pub fn representative_keywords(
    model: &TopicModel,
    net: &SemanticNetwork,
    cluster_id: usize,
    top_n: usize,
) -> Result<Vec<String>> {
    let members = model.cluster_terms(cluster_id);
    if members.is_empty() {
        return Err(Error::UnknownTopic(cluster_id));
    }
    let mut scored: Vec<(i64, &str)> = members
        .into_iter()
        .filter(|t| !is_brand_token(t))
        .map(|t| {
            let i = net
                .index_of(t)
                .ok_or_else(|| Error::UnknownTerm(t.to_string()))?;
            let mut inside = 0i64;
            let mut outside = 0i64;
            for (&j, &w) in net.neighbors(i) {
                if model.clusters.get(net.term(j)) == Some(&cluster_id) {
                    inside += w as i64;
                } else {
                    outside += w as i64;
                }
            }
            Ok((inside - outside, t))
        })
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    Ok(scored
        .into_iter()
        .take(top_n)
        .map(|(_, t)| t.to_string())
        .collect())
}

/// Keyword-token occurrences in the startup's articles of `year`, divided by the
/// number of those articles; 0 when no article mentions the startup.
pub fn topic_intensity(
    startup_id: &str,
    year: i32,
    topic: usize,
    sequences: &[&TokenSequence],
    model: &TopicModel,
) -> Result<f64> {
    let keywords: BTreeSet<&str> = model
        .keyword_sets
        .get(&topic)
        .ok_or(Error::UnknownTopic(topic))?
        .iter()
        .map(String::as_str)
        .collect();
    let mut articles = 0usize;
    let mut hits = 0usize;
    for s in sequences
        .iter()
        .filter(|s| s.year == year && s.mentions(startup_id) > 0)
    {
        articles += 1;
        hits += s
            .tokens
            .iter()
            .filter(|t| keywords.contains(t.as_str()))
            .count();
    }
    Ok(if articles == 0 {
        0.0
    } else {
        hits as f64 / articles as f64
    })
}

/// Intensities for every topic, in topic-id order.
pub fn topic_intensities(
    startup_id: &str,
    year: i32,
    sequences: &[&TokenSequence],
    model: &TopicModel,
) -> Result<Vec<f64>> {
    model
        .topic_ids()
        .map(|k| topic_intensity(startup_id, year, k, sequences, model))
        .collect()
}
