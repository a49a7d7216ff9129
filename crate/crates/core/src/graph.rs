//! Undirected simple graphs, random generators and an exact Max-Cut oracle.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest vertex count accepted by [`Graph::max_cut`] by default.
pub const DEFAULT_MAX_CUT_LIMIT: usize = 26;

const REGULAR_ATTEMPTS: usize = 1000;

/// An undirected simple graph on vertices `0..n`.
///
/// Edges are stored canonically as `(u, v)` with `u < v`, sorted
/// lexicographically, so iteration order is deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

/// On-disk form: `{"n": int, "edges": [[u, v], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        Graph::new(file.n, file.edges.iter().map(|&[u, v]| (u, v)))
    }
}

impl From<Graph> for GraphFile {
    fn from(g: Graph) -> Self {
        GraphFile {
            n: g.n,
            edges: g.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

impl Graph {
    /// Builds a graph, canonicalizing each pair to `u < v`.
    ///
    /// Self-loops, duplicate edges and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return invalid("graph must have at least one vertex");
        }
        let mut canon = Vec::new();
        for (u, v) in edges {
            if u == v {
                return invalid(format!("self-loop at vertex {u}"));
            }
            if u >= n || v >= n {
                return invalid(format!("edge ({u}, {v}) out of range for n = {n}"));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return invalid(format!("duplicate edge ({}, {})", w[0].0, w[0].1));
        }
        Ok(Self::from_canonical(n, canon))
    }

    fn from_canonical(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Self { n, edges, adj }
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, std::iter::empty())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of edges.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    /// `Some(k)` when every vertex has degree `k`.
    pub fn regular_degree(&self) -> Option<usize> {
        let k = self.degree(0);
        self.adj.iter().all(|a| a.len() == k).then_some(k)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj[u].binary_search(&v).is_ok()
    }

    /// Neighborhood bitmasks; requires `n <= 64`.
    pub fn adjacency_masks(&self) -> Vec<u64> {
        assert!(self.n <= 64, "adjacency masks need n <= 64");
        self.adj
            .iter()
            .map(|list| list.iter().fold(0u64, |m, &w| m | (1 << w)))
            .collect()
    }

    /// Applies a vertex permutation: vertex `v` becomes `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n];
        if perm.len() != self.n || perm.iter().any(|&p| p >= self.n || std::mem::replace(&mut seen[p], true)) {
            return invalid("relabeling is not a permutation of the vertex set");
        }
        Self::new(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
    }

    /// All non-adjacent pairs `(u, v)`, `u < v`.
    pub fn complement_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Non-adjacent pairs with at least one common neighbor.
    pub fn distance_two_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) && self.common_neighbor_count(u, v) > 0 {
                    out.push((u, v));
                }
            }
        }
        out
    }

    fn common_neighbor_count(&self, u: usize, v: usize) -> usize {
        let (a, b) = (&self.adj[u], &self.adj[v]);
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    /// Breadth-first distances from `src`; `None` for unreachable vertices.
    pub fn distances_from(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.adj[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Pairs `(u, v)`, `u < v`, at shortest-path distance exactly `k`.
    pub fn pairs_at_distance(&self, k: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            let dist = self.distances_from(u);
            for (v, d) in dist.iter().enumerate().skip(u + 1) {
                if *d == Some(k) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.distances_from(0).iter().all(Option::is_some)
    }

    /// Number of triangles through each vertex.
    pub fn triangles_per_vertex(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n];
        for &(u, v) in &self.edges {
            for &w in &self.adj[u] {
                if w > v && self.has_edge(v, w) {
                    counts[u] += 1;
                    counts[v] += 1;
                    counts[w] += 1;
                }
            }
        }
        counts
    }

    /// Exact maximum cut by exhaustive enumeration (limit [`DEFAULT_MAX_CUT_LIMIT`]).
    pub fn max_cut(&self) -> Result<usize> {
        self.max_cut_with_limit(DEFAULT_MAX_CUT_LIMIT)
    }

    /// Enumerates the `2^(n-1)` assignments with vertex 0 pinned, in Gray-code
    /// order so each step flips one vertex and updates the cut incrementally.
    pub fn max_cut_with_limit(&self, limit: usize) -> Result<usize> {
        if self.n > limit || self.n > 63 {
            return Err(Error::Capacity {
                what: "max-cut vertex count",
                requested: self.n,
                limit: limit.min(63),
            });
        }
        let masks = self.adjacency_masks();
        let mut side = 0u64;
        let mut cut: i64 = 0;
        let mut best: i64 = 0;
        for step in 1u64..(1u64 << (self.n - 1)) {
            let v = step.trailing_zeros() as usize + 1;
            let same = if side >> v & 1 == 1 { side } else { !side };
            let same_count = (masks[v] & same).count_ones() as i64;
            cut += 2 * same_count - masks[v].count_ones() as i64;
            side ^= 1 << v;
            best = best.max(cut);
        }
        Ok(best as usize)
    }

    /// A relabeling-invariant signature: sorted degrees, sorted per-vertex
    /// triangle counts and the adjacency spectrum rounded to 1e-8.
    ///
    /// Equal fingerprints mean "possibly isomorphic".
    pub fn fingerprint(&self) -> Fingerprint {
        let mut degrees = self.degrees();
        degrees.sort_unstable();
        let mut triangles = self.triangles_per_vertex();
        triangles.sort_unstable();
        let adjacency: DMatrix<f64> = DMatrix::from_fn(self.n, self.n, |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 });
        let mut spectrum: Vec<i64> = adjacency
            .symmetric_eigenvalues()
            .iter()
            .map(|&x: &f64| (x * 1e8).round() as i64)
            .collect();
        spectrum.sort_unstable();
        Fingerprint {
            degrees,
            triangles,
            spectrum,
        }
    }
}

/// See [`Graph::fingerprint`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fingerprint {
    degrees: Vec<usize>,
    triangles: Vec<usize>,
    spectrum: Vec<i64>,
}

/// The cycle `0-1-...-(n-1)-0`.
pub fn cycle_graph(n: usize) -> Result<Graph> {
    if n < 3 {
        return invalid(format!("cycle needs n >= 3, got {n}"));
    }
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)))
}

pub fn complete_graph(n: usize) -> Result<Graph> {
    Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
}

/// A random simple `k`-regular graph on `n` vertices, deterministic in `seed`.
///
/// Stubs are shuffled and paired; pairs that would form a loop or a multi-edge
/// go back into the pool and are re-paired, and the attempt restarts when the
/// leftover stubs cannot be completed. For `k > n/2` the complement of an
/// `(n-1-k)`-regular graph is returned.
pub fn random_regular_graph(n: usize, k: usize, seed: u64) -> Result<Graph> {
    if k >= n {
        return invalid(format!("degree {k} must be below vertex count {n}"));
    }
    if (n * k) % 2 == 1 {
        return invalid(format!("no {k}-regular graph on {n} vertices: n*k is odd"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if 2 * k > n {
        let sparse = regular_by_pairing(n, n - 1 - k, &mut rng)?;
        return Graph::new(n, sparse.complement_edges());
    }
    regular_by_pairing(n, k, &mut rng)
}

fn regular_by_pairing(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<Graph> {
    for _ in 0..REGULAR_ATTEMPTS {
        if let Some(edges) = try_pairing(n, k, rng) {
            return Graph::new(n, edges);
        }
    }
    invalid(format!("failed to sample a {k}-regular graph on {n} vertices"))
}

fn try_pairing(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(usize, usize)>> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(k)).collect();
    let mut adj = vec![vec![false; n]; n];
    let mut edges = Vec::with_capacity(n * k / 2);
    while !stubs.is_empty() {
        stubs.shuffle(rng);
        let mut leftover = Vec::new();
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u != v && !adj[u][v] {
                adj[u][v] = true;
                adj[v][u] = true;
                edges.push((u, v));
            } else {
                leftover.extend_from_slice(pair);
            }
        }
        let completable = leftover
            .iter()
            .enumerate()
            .any(|(i, &u)| leftover[i + 1..].iter().any(|&v| u != v && !adj[u][v]));
        if !leftover.is_empty() && !completable {
            return None;
        }
        stubs = leftover;
    }
    Some(edges)
}

/// Includes each of the `n(n-1)/2` pairs independently with probability `prob`.
pub fn erdos_renyi_graph(n: usize, prob: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&prob) {
        return invalid(format!("edge probability {prob} outside [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < prob {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn petersen() -> Graph {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        Graph::new(10, outer.chain(spokes).chain(inner)).unwrap()
    }

    #[test]
    fn cycle_edges() {
        let c4 = cycle_graph(4).unwrap();
        assert_eq!(c4.edges(), &[(0, 1), (0, 3), (1, 2), (2, 3)]);
        let c8 = cycle_graph(8).unwrap();
        assert_eq!(c8.m(), 8);
        assert_eq!(c8.regular_degree(), Some(2));
        assert!(cycle_graph(2).is_err());
    }

    #[test]
    fn rejects_malformed_edges() {
        assert!(Graph::new(3, [(0, 0)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
        assert!(Graph::new(0, []).is_err());
    }

    #[test]
    fn regular_generator() {
        let k4 = random_regular_graph(4, 3, 99).unwrap();
        assert_eq!(k4, complete_graph(4).unwrap());
        let g = random_regular_graph(16, 4, 7).unwrap();
        assert_eq!(g.m(), 32);
        assert_eq!(g.regular_degree(), Some(4));
        assert!(random_regular_graph(5, 3, 0).is_err());
        assert!(random_regular_graph(4, 4, 0).is_err());
        let dense = random_regular_graph(16, 12, 3).unwrap();
        assert_eq!(dense.regular_degree(), Some(12));
        assert_eq!(dense.m(), 96);
    }

    #[test]
    fn regular_generator_is_reproducible() {
        for k in [2, 3, 5, 9] {
            let a = random_regular_graph(14, k, 42).unwrap();
            let b = random_regular_graph(14, k, 42).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.degrees().iter().sum::<usize>(), 2 * a.m());
        }
        assert_ne!(random_regular_graph(14, 3, 1).unwrap(), random_regular_graph(14, 3, 2).unwrap());
    }

    #[test]
    fn erdos_renyi_extremes() {
        assert_eq!(erdos_renyi_graph(7, 0.0, 1).unwrap().m(), 0);
        assert_eq!(erdos_renyi_graph(7, 1.0, 1).unwrap().m(), 21);
        assert_eq!(erdos_renyi_graph(10, 0.5, 5).unwrap(), erdos_renyi_graph(10, 0.5, 5).unwrap());
        assert!(erdos_renyi_graph(5, 1.5, 0).is_err());
        assert!(erdos_renyi_graph(5, -0.1, 0).is_err());
    }

    #[test]
    fn complement_and_distance_two() {
        let c4 = cycle_graph(4).unwrap();
        assert_eq!(c4.complement_edges(), vec![(0, 2), (1, 3)]);
        assert!(complete_graph(4).unwrap().complement_edges().is_empty());
        assert_eq!(Graph::empty(3).unwrap().complement_edges(), vec![(0, 1), (0, 2), (1, 2)]);

        let c8 = cycle_graph(8).unwrap();
        let mut expected: Vec<_> = (0..8).map(|i| (i.min((i + 2) % 8), i.max((i + 2) % 8))).collect();
        expected.sort_unstable();
        assert_eq!(c8.distance_two_pairs(), expected);
        assert!(complete_graph(4).unwrap().distance_two_pairs().is_empty());
        let path = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(path.distance_two_pairs(), vec![(0, 2)]);
        assert_eq!(c8.pairs_at_distance(2), c8.distance_two_pairs());
    }

    #[test]
    fn max_cut_small_graphs() {
        assert_eq!(cycle_graph(8).unwrap().max_cut().unwrap(), 8);
        assert_eq!(cycle_graph(5).unwrap().max_cut().unwrap(), 4);
        assert_eq!(complete_graph(4).unwrap().max_cut().unwrap(), 4);
        assert_eq!(Graph::empty(1).unwrap().max_cut().unwrap(), 0);
        assert!(Graph::empty(30).unwrap().max_cut().is_err());
    }

    #[test]
    fn max_cut_petersen_matches_brute_force() {
        let g = petersen();
        // Independent oracle: every subset, cut counted edge by edge.
        let brute = (0u32..1 << g.n())
            .map(|s| g.edges().iter().filter(|&&(u, v)| (s >> u & 1) != (s >> v & 1)).count())
            .max()
            .unwrap();
        assert_eq!(brute, 12);
        assert_eq!(g.max_cut().unwrap(), 12);
    }

    #[test]
    fn fingerprints() {
        let c6 = cycle_graph(6).unwrap();
        let relabeled = c6.relabeled(&[3, 5, 0, 2, 4, 1]).unwrap();
        assert_ne!(c6, relabeled);
        assert_eq!(c6.fingerprint(), relabeled.fingerprint());

        let triangles = Graph::new(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert_ne!(c6.fingerprint(), triangles.fingerprint());
        assert_ne!(complete_graph(4).unwrap().fingerprint(), cycle_graph(4).unwrap().fingerprint());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let g = cycle_graph(4).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"{"n":4,"edges":[[0,1],[0,3],[1,2],[2,3]]}"#);
        let back: Graph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Graph>(r#"{"n":2,"edges":[[0,0]]}"#).is_err());
    }
}
