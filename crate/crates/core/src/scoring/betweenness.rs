//! Weighted betweenness by Brandes accumulation over Dijkstra shortest-path DAGs.
//!
//! Edge length is `1 / w`, so frequently co-occurring terms sit closer together.
//! Path lengths are compared with a small relative tolerance so that equal sums
//! of reciprocals (`1/2 + 1/2` vs `1/1`, `3 * 1/3` vs `1`) count as ties.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::semnet::SemanticNetwork;

const REL_TOL: f64 = 1e-10;
const SOURCE_CHUNK: usize = 32;

fn same_length(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node index
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Workspace {
    dist: Vec<f64>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
    preds: Vec<Vec<usize>>,
    settled: Vec<bool>,
    order: Vec<usize>,
    heap: BinaryHeap<Entry>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Workspace {
            dist: vec![f64::INFINITY; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
            preds: vec![Vec::new(); n],
            settled: vec![false; n],
            order: Vec::with_capacity(n),
            heap: BinaryHeap::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.order {
            self.dist[v] = f64::INFINITY;
            self.sigma[v] = 0.0;
            self.delta[v] = 0.0;
            self.preds[v].clear();
            self.settled[v] = false;
        }
        self.order.clear();
        self.heap.clear();
    }

    /// Adds the dependencies of `source` on every other node into `acc`.
    fn single_source(&mut self, net: &SemanticNetwork, source: usize, acc: &mut [f64]) {
        self.dist[source] = 0.0;
        self.sigma[source] = 1.0;
        self.heap.push(Entry {
            dist: 0.0,
            node: source,
        });
        while let Some(Entry { dist, node: v }) = self.heap.pop() {
            if self.settled[v] || dist > self.dist[v] {
                continue;
            }
            self.settled[v] = true;
            self.order.push(v);
            for (&u, &w) in net.neighbors(v) {
                if self.settled[u] {
                    continue;
                }
                let cand = self.dist[v] + 1.0 / w as f64;
                let cur = self.dist[u];
                if cur.is_infinite() {
                    self.dist[u] = cand;
                    self.sigma[u] = self.sigma[v];
                    self.preds[u].push(v);
                    self.heap.push(Entry { dist: cand, node: u });
                } else if same_length(cand, cur) {
                    self.sigma[u] += self.sigma[v];
                    self.preds[u].push(v);
                } else if cand < cur {
                    self.dist[u] = cand;
                    self.sigma[u] = self.sigma[v];
                    self.preds[u].clear();
                    self.preds[u].push(v);
                    self.heap.push(Entry { dist: cand, node: u });
                }
            }
        }
        for i in (0..self.order.len()).rev() {
            let w = self.order[i];
            let coeff = (1.0 + self.delta[w]) / self.sigma[w];
            for k in 0..self.preds[w].len() {
                let v = self.preds[w][k];
                self.delta[v] += self.sigma[v] * coeff;
            }
            if w != source {
                acc[w] += self.delta[w];
            }
        }
        self.reset();
    }
}

fn chunk_contribution(net: &SemanticNetwork, sources: std::ops::Range<usize>) -> Vec<f64> {
    let n = net.node_count();
    let mut acc = vec![0.0; n];
    let mut ws = Workspace::new(n);
    for s in sources {
        ws.single_source(net, s, &mut acc);
    }
    acc
}

fn chunks(n: usize) -> Vec<std::ops::Range<usize>> {
    (0..n)
        .step_by(SOURCE_CHUNK)
        .map(|s| s..(s + SOURCE_CHUNK).min(n))
        .collect()
}

fn finish(n: usize, partials: Vec<Vec<f64>>) -> Vec<f64> {
    let mut bc = vec![0.0; n];
    for p in partials {
        for (b, x) in bc.iter_mut().zip(p) {
            *b += x;
        }
    }
    // each unordered pair was counted from both ends
    for b in &mut bc {
        *b /= 2.0;
    }
    bc
}

/// Betweenness of every node, indexed like `net.terms()`. Sources are processed in
/// fixed-size chunks whose partial sums are reduced in order, so the result is
/// bit-identical regardless of thread count.
pub fn weighted_betweenness(net: &SemanticNetwork) -> Vec<f64> {
    let n = net.node_count();
    let partials: Vec<Vec<f64>> = chunks(n)
        .into_par_iter()
        .map(|r| chunk_contribution(net, r))
        .collect();
    finish(n, partials)
}

/// Single-threaded variant of [`weighted_betweenness`].
pub fn weighted_betweenness_sequential(net: &SemanticNetwork) -> Vec<f64> {
    let n = net.node_count();
    let partials: Vec<Vec<f64>> = chunks(n)
        .into_iter()
        .map(|r| chunk_contribution(net, r))
        .collect();
    finish(n, partials)
}
