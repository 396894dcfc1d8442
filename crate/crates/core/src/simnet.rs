//! Compound similarity networks.
//!
//! Nodes are compounds; an undirected edge joins two compounds whose
//! fingerprint Tanimoto similarity reaches the cutoff (inclusive). Each graph
//! exports an adjacency matrix, an edge-list dump, and six per-node network
//! features.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::feat::{tanimoto, FeatError, Fingerprint};
use crate::math;

/// Cutoff grid 0.4, 0.5, ..., 0.9.
pub const CUTOFF_GRID: [f64; 6] = [0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SimnetError {
    #[error(transparent)]
    Feature(#[from] FeatError),
    #[error("cutoff {0} outside [0, 1]")]
    Cutoff(f64),
    #[error("no compounds")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub similarity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityGraph {
    cutoff: f64,
    node_ids: Vec<String>,
    /// `a < b`, sorted by `(a, b)`.
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

/// Pairwise similarity matrix (row-major, diagonal 1).
pub fn similarity_matrix(fps: &[Fingerprint]) -> Result<Vec<f64>, FeatError> {
    let n = fps.len();
    let mut sim = vec![1.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let t = tanimoto(&fps[i], &fps[j])?;
            sim[i * n + j] = t;
            sim[j * n + i] = t;
        }
    }
    Ok(sim)
}

/// Builds the cutoff graph over `(id, fingerprint)` pairs in the given order.
pub fn build_graph(compounds: &[(String, Fingerprint)], cutoff: f64) -> Result<SimilarityGraph, SimnetError> {
    let fps: Vec<Fingerprint> = compounds.iter().map(|(_, f)| f.clone()).collect();
    let sim = similarity_matrix(&fps)?;
    let ids = compounds.iter().map(|(id, _)| id.clone()).collect();
    SimilarityGraph::from_similarities(ids, &sim, cutoff)
}

impl SimilarityGraph {
    /// Thresholds a precomputed row-major similarity matrix.
    pub fn from_similarities(node_ids: Vec<String>, sim: &[f64], cutoff: f64) -> Result<Self, SimnetError> {
        if !(0.0..=1.0).contains(&cutoff) {
            return Err(SimnetError::Cutoff(cutoff));
        }
        let n = node_ids.len();
        if n == 0 {
            return Err(SimnetError::Empty);
        }
        assert_eq!(sim.len(), n * n, "similarity matrix must be n x n");
        let mut edges = Vec::new();
        let mut adjacency = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + 1..n {
                let s = sim[i * n + j];
                if s >= cutoff {
                    edges.push(Edge {
                        a: i,
                        b: j,
                        similarity: s,
                    });
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                }
            }
        }
        Ok(Self {
            cutoff,
            node_ids,
            edges,
            adjacency,
        })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Binary n x n matrix aligned with `node_ids`.
    pub fn adjacency(&self) -> AdjacencyMatrix {
        let n = self.node_count();
        let mut cells = vec![0u8; n * n];
        for e in &self.edges {
            cells[e.a * n + e.b] = 1;
            cells[e.b * n + e.a] = 1;
        }
        AdjacencyMatrix { n, cells }
    }

    /// One `id_a<TAB>id_b<TAB>similarity` line per edge, ids ordered
    /// lexicographically within a line, lines sorted.
    pub fn edge_list(&self) -> String {
        let mut lines: Vec<String> = self
            .edges
            .iter()
            .map(|e| {
                let (x, y) = (&self.node_ids[e.a], &self.node_ids[e.b]);
                let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
                format!("{lo}\t{hi}\t{:.6}\n", e.similarity)
            })
            .collect();
        lines.sort();
        lines.concat()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyMatrix {
    n: usize,
    cells: Vec<u8>,
}

impl AdjacencyMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.cells[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.cells.chunks(self.n.max(1))
    }

    pub fn transpose(&self) -> AdjacencyMatrix {
        let n = self.n;
        let mut cells = vec![0u8; n * n];
        for i in 0..n {
            for j in 0..n {
                cells[j * n + i] = self.cells[i * n + j];
            }
        }
        AdjacencyMatrix { n, cells }
    }
}

/// Per-node network features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeFeatures {
    pub degree: usize,
    pub degree_centrality: f64,
    pub clustering_coefficient: f64,
    pub betweenness: f64,
    pub component_size: usize,
    pub pagerank: f64,
}

impl NodeFeatures {
    pub const NAMES: [&'static str; 6] = [
        "degree",
        "degree_centrality",
        "clustering",
        "betweenness",
        "component_size",
        "pagerank",
    ];

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.degree as f64,
            self.degree_centrality,
            self.clustering_coefficient,
            self.betweenness,
            self.component_size as f64,
            self.pagerank,
        ]
    }
}

const DAMPING: f64 = 0.85;
const PAGERANK_MAX_ITER: usize = 100;
const PAGERANK_TOL: f64 = 1e-10;

/// Features aligned with `g.node_ids()`. Betweenness and PageRank are
/// quantized to 1e-12 so results do not depend on node input order.
pub fn network_features(g: &SimilarityGraph) -> Vec<NodeFeatures> {
    let n = g.node_count();
    let between = betweenness(g);
    let ranks = pagerank(g);
    let comp = component_sizes(g);
    (0..n)
        .map(|i| {
            let deg = g.neighbors(i).len();
            NodeFeatures {
                degree: deg,
                degree_centrality: if n > 1 { deg as f64 / (n - 1) as f64 } else { 0.0 },
                clustering_coefficient: clustering(g, i),
                betweenness: math::quantize(between[i]),
                component_size: comp[i],
                pagerank: math::quantize(ranks[i]),
            }
        })
        .collect()
}

fn clustering(g: &SimilarityGraph, i: usize) -> f64 {
    let nb = g.neighbors(i);
    let k = nb.len();
    if k < 2 {
        return 0.0;
    }
    let mut links = 0usize;
    for (x, &u) in nb.iter().enumerate() {
        for &v in &nb[x + 1..] {
            if g.neighbors(u).contains(&v) {
                links += 1;
            }
        }
    }
    2.0 * links as f64 / (k * (k - 1)) as f64
}

fn component_sizes(g: &SimilarityGraph) -> Vec<usize> {
    let n = g.node_count();
    let mut label = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut count = 0;
        let mut stack = vec![s];
        label[s] = id;
        while let Some(v) = stack.pop() {
            count += 1;
            for &w in g.neighbors(v) {
                if label[w] == usize::MAX {
                    label[w] = id;
                    stack.push(w);
                }
            }
        }
        sizes.push(count);
    }
    label.iter().map(|&l| sizes[l]).collect()
}

/// Brandes' algorithm on the unweighted graph, normalized by
/// (n-1)(n-2)/2 so values lie in [0, 1].
fn betweenness(g: &SimilarityGraph) -> Vec<f64> {
    let n = g.node_count();
    let mut cb = vec![0.0; n];
    for s in 0..n {
        let mut stack = Vec::with_capacity(n);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![usize::MAX; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            stack.push(v);
            for &w in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0; n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    // each pair counted from both endpoints
    let scale = if n > 2 { 1.0 / ((n - 1) * (n - 2)) as f64 } else { 0.0 };
    cb.iter().map(|v| v * scale).collect()
}

fn pagerank(g: &SimilarityGraph) -> Vec<f64> {
    let n = g.node_count();
    let nf = n as f64;
    let mut pr = vec![1.0 / nf; n];
    for _ in 0..PAGERANK_MAX_ITER {
        let dangling: f64 = (0..n).filter(|&i| g.neighbors(i).is_empty()).map(|i| pr[i]).sum();
        let base = (1.0 - DAMPING) / nf + DAMPING * dangling / nf;
        let mut next = vec![base; n];
        for (i, p) in pr.iter().enumerate() {
            let nb = g.neighbors(i);
            if nb.is_empty() {
                continue;
            }
            let share = DAMPING * p / nb.len() as f64;
            for &w in nb {
                next[w] += share;
            }
        }
        let total: f64 = next.iter().sum();
        for v in next.iter_mut() {
            *v /= total;
        }
        let change: f64 = next.iter().zip(&pr).map(|(a, b)| math::abs(a - b)).sum();
        pr = next;
        if change < PAGERANK_TOL {
            break;
        }
    }
    pr
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn named(bits: &[&[usize]]) -> Vec<(String, Fingerprint)> {
        bits.iter()
            .enumerate()
            .map(|(i, b)| {
                let id = ((b'A' + i as u8) as char).to_string();
                (id, Fingerprint::from_bits(64, 2, b.iter().copied()).unwrap())
            })
            .collect()
    }

    fn graph_from_edges(n: usize, edges: &[(usize, usize)]) -> SimilarityGraph {
        let mut sim = vec![0.0; n * n];
        for &(a, b) in edges {
            sim[a * n + b] = 1.0;
            sim[b * n + a] = 1.0;
        }
        let ids = (0..n).map(|i| format!("n{i}")).collect();
        SimilarityGraph::from_similarities(ids, &sim, 0.5).unwrap()
    }

    #[test]
    fn cutoff_is_inclusive() {
        let c = named(&[&[1, 2, 3, 4], &[1, 2, 3, 5], &[9, 10]]);
        let g = build_graph(&c, 0.6).unwrap();
        assert_eq!(g.edges().len(), 1);
        assert_eq!((g.edges()[0].a, g.edges()[0].b), (0, 1));
        assert_eq!(g.edges()[0].similarity, 0.6);
    }

    #[test]
    fn single_compound() {
        let g = build_graph(&named(&[&[1]]), 0.4).unwrap();
        assert!(g.edges().is_empty());
        let adj = g.adjacency();
        assert_eq!(adj.size(), 1);
        assert_eq!(adj.get(0, 0), 0);
        let f = &network_features(&g)[0];
        assert_eq!(f.degree, 0);
        assert_eq!(f.component_size, 1);
        assert_eq!(f.betweenness, 0.0);
        assert_eq!(f.clustering_coefficient, 0.0);
        assert_eq!(f.pagerank, 1.0);
    }

    #[test]
    fn rejects_bad_cutoff_and_empty() {
        assert_eq!(build_graph(&named(&[&[1]]), 1.5).unwrap_err(), SimnetError::Cutoff(1.5));
        assert_eq!(build_graph(&[], 0.5).unwrap_err(), SimnetError::Empty);
    }

    #[test]
    fn path_graph_features() {
        let g = graph_from_edges(3, &[(0, 1), (1, 2)]);
        let f = network_features(&g);
        assert_eq!([f[0].degree, f[1].degree, f[2].degree], [1, 2, 1]);
        assert_eq!(f[1].betweenness, 1.0);
        assert_eq!(f[0].betweenness, 0.0);
        assert_eq!(f[2].betweenness, 0.0);
        assert!(f.iter().all(|x| x.clustering_coefficient == 0.0));
        assert!(f.iter().all(|x| x.component_size == 3));
    }

    #[test]
    fn triangle_features() {
        let g = graph_from_edges(3, &[(0, 1), (1, 2), (0, 2)]);
        let adj = g.adjacency();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(adj.get(i, j), u8::from(i != j));
            }
        }
        let f = network_features(&g);
        assert!(f.iter().all(|x| x.clustering_coefficient == 1.0));
        assert!(f.iter().all(|x| x.degree_centrality == 1.0));
    }

    #[test]
    fn pagerank_sums_to_one() {
        let g = graph_from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4)]);
        let total: f64 = network_features(&g).iter().map(|f| f.pagerank).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn edge_list_orders_ids() {
        let c = vec![
            ("zeta".to_string(), Fingerprint::from_bits(64, 2, [1, 2]).unwrap()),
            ("alpha".to_string(), Fingerprint::from_bits(64, 2, [1, 2]).unwrap()),
        ];
        let g = build_graph(&c, 0.4).unwrap();
        assert_eq!(g.edge_list(), "alpha\tzeta\t1.000000\n");
    }
}
