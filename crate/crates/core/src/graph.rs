//! Directed graphs in forward-star layout, weighted-cascade edge probabilities, and sampled
//! alive-edge realizations of the independent cascade model.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{param, Error, Result};
use crate::exec::Exec;
use crate::rng;

/// A directed graph over dense vertex ids `0..n`.
///
/// Out-edges of `u` occupy `offsets[u]..offsets[u + 1]` in `targets` and `probs`, sorted by
/// target. That position is the edge id used by [`RealizationSet`]. A reverse index over the
/// same edge ids supports backward traversal.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    probs: Vec<f64>,
    rev_offsets: Vec<usize>,
    rev_sources: Vec<u32>,
    rev_edge: Vec<u32>,
    original_ids: Vec<u64>,
}

impl Graph {
    /// Builds a graph from dense-id edges. Duplicates collapse; self-loops are dropped.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Graph> {
        Graph::with_ids(n, edges, (0..n as u64).collect())
    }

    fn with_ids(n: usize, edges: &[(u32, u32)], original_ids: Vec<u64>) -> Result<Graph> {
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u as usize >= n || v as usize >= n) {
            return param(format!("edge ({u}, {v}) out of range for n = {n}"));
        }
        if n > u32::MAX as usize {
            return param("vertex count exceeds u32 range");
        }
        let mut list: Vec<(u32, u32)> = edges.iter().copied().filter(|(u, v)| u != v).collect();
        list.sort_unstable();
        list.dedup();

        let mut offsets = vec![0usize; n + 1];
        for &(u, _) in &list {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets: Vec<u32> = list.iter().map(|&(_, v)| v).collect();

        let mut rev_offsets = vec![0usize; n + 1];
        for &(_, v) in &list {
            rev_offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            rev_offsets[i + 1] += rev_offsets[i];
        }
        let mut fill = rev_offsets.clone();
        let mut rev_sources = vec![0u32; list.len()];
        let mut rev_edge = vec![0u32; list.len()];
        for (e, &(u, v)) in list.iter().enumerate() {
            let slot = fill[v as usize];
            rev_sources[slot] = u;
            rev_edge[slot] = e as u32;
            fill[v as usize] += 1;
        }

        Ok(Graph {
            offsets,
            probs: vec![0.0; targets.len()],
            targets,
            rev_offsets,
            rev_sources,
            rev_edge,
            original_ids,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len()
    }

    /// Out-edges of `u` as `(edge id, target)`.
    pub fn out_edges(&self, u: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let range = self.offsets[u]..self.offsets[u + 1];
        range.map(move |e| (e, self.targets[e] as usize))
    }

    /// In-edges of `v` as `(edge id, source)`.
    pub fn in_edges(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let range = self.rev_offsets[v]..self.rev_offsets[v + 1];
        range.map(move |s| (self.rev_edge[s] as usize, self.rev_sources[s] as usize))
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.rev_offsets[v + 1] - self.rev_offsets[v]
    }

    /// All edges as `(source, target)` in edge-id order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_vertices()).flat_map(move |u| self.out_edges(u).map(move |(_, v)| (u, v)))
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, edge: usize) -> f64 {
        self.probs[edge]
    }

    /// Sets every edge probability. Values must lie in `[0, 1]`.
    pub fn set_probs(&mut self, probs: Vec<f64>) -> Result<()> {
        if probs.len() != self.num_edges() {
            return param(format!("expected {} probabilities, got {}", self.num_edges(), probs.len()));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return param(format!("edge probability {p} outside [0, 1]"));
        }
        self.probs = probs;
        Ok(())
    }

    /// Same probability on every edge.
    pub fn with_uniform_prob(mut self, p: f64) -> Result<Graph> {
        let n = self.num_edges();
        self.set_probs(vec![p; n])?;
        Ok(self)
    }

    pub fn original_id(&self, v: usize) -> u64 {
        self.original_ids[v]
    }

    pub fn original_ids(&self) -> &[u64] {
        &self.original_ids
    }

    /// Edge list text using original ids, one `u v` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{} {}", self.original_ids[u], self.original_ids[v]);
        }
        out
    }
}

/// Parses a SNAP-style edge list: whitespace-separated integer pairs, `#` comment lines.
///
/// Vertices are remapped to `0..n` in order of first appearance. With `undirected`, every pair
/// is inserted in both directions.
pub fn load_edge_list(text: &str, undirected: bool) -> Result<Graph> {
    let mut remap: HashMap<u64, u32> = HashMap::new();
    let mut original_ids = Vec::new();
    let mut edges = Vec::new();
    let mut intern = |raw: u64| -> u32 {
        *remap.entry(raw).or_insert_with(|| {
            original_ids.push(raw);
            (original_ids.len() - 1) as u32
        })
    };

    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut next = |what: &str| -> Result<u64> {
            let tok =
                tokens.next().ok_or_else(|| Error::Parse { line: idx + 1, msg: format!("missing {what} vertex") })?;
            tok.parse::<u64>().map_err(|_| Error::Parse { line: idx + 1, msg: format!("non-integer token {tok:?}") })
        };
        let u = next("source")?;
        let v = next("target")?;
        if let Some(extra) = tokens.next() {
            return Err(Error::Parse { line: idx + 1, msg: format!("unexpected token {extra:?}") });
        }
        let (u, v) = (intern(u), intern(v));
        edges.push((u, v));
        if undirected {
            edges.push((v, u));
        }
    }
    let n = original_ids.len();
    Graph::with_ids(n, &edges, original_ids)
}

/// Weighted cascade: edge `u → v` gets probability `q / indeg(v)`.
pub fn weighted_cascade_probs(mut graph: Graph, q: f64) -> Result<Graph> {
    if !(q > 0.0 && q <= 1.0) {
        return param(format!("q = {q} outside (0, 1]"));
    }
    let probs: Vec<f64> = (0..graph.num_vertices())
        .flat_map(|u| graph.out_edges(u).map(|(_, v)| v).collect::<Vec<_>>())
        .map(|v| q / graph.in_degree(v) as f64)
        .collect();
    graph.set_probs(probs)?;
    Ok(graph)
}

const LIVENESS_STREAM: u64 = 0x11FE;

/// `num_instances` sampled subgraphs, one liveness bit per edge per instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealizationSet {
    num_instances: usize,
    num_edges: usize,
    words_per_instance: usize,
    bits: Vec<u64>,
    seed: u64,
}

impl RealizationSet {
    pub fn num_instances(&self) -> usize {
        self.num_instances
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn is_alive(&self, instance: usize, edge: usize) -> bool {
        let word = self.bits[instance * self.words_per_instance + edge / 64];
        word >> (edge % 64) & 1 == 1
    }

    /// Liveness bitmask of one instance, 64 edges per word.
    pub fn instance_words(&self, instance: usize) -> &[u64] {
        let start = instance * self.words_per_instance;
        &self.bits[start..start + self.words_per_instance]
    }

    pub fn alive_count(&self, instance: usize) -> usize {
        self.instance_words(instance).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Hand-specified realizations: edge `u → v` is alive in instance `i` iff `alive(i, u, v)`.
    /// The seed is recorded as 0.
    pub fn from_fn<F>(graph: &Graph, num_instances: usize, alive: F) -> Result<RealizationSet>
    where
        F: Fn(usize, usize, usize) -> bool,
    {
        if num_instances == 0 {
            return param("number of realizations must be at least 1");
        }
        let m = graph.num_edges();
        let words = m.div_ceil(64);
        let mut bits = vec![0u64; words * num_instances];
        for i in 0..num_instances {
            for u in 0..graph.num_vertices() {
                for (e, v) in graph.out_edges(u) {
                    if alive(i, u, v) {
                        bits[i * words + e / 64] |= 1 << (e % 64);
                    }
                }
            }
        }
        Ok(RealizationSet { num_instances, num_edges: m, words_per_instance: words, bits, seed: 0 })
    }
}

/// Liveness of `edge` in `instance`: a pure function of `(seed, instance, edge, p)`.
#[inline]
pub fn edge_alive(seed: u64, instance: usize, edge: usize, p: f64) -> bool {
    rng::unit(rng::keyed(seed, LIVENESS_STREAM, instance as u64, edge as u64)) < p
}

pub fn sample_realizations(graph: &Graph, num_instances: usize, seed: u64) -> Result<RealizationSet> {
    sample_realizations_with(graph, num_instances, seed, Exec::default())
}

pub fn sample_realizations_with(graph: &Graph, num_instances: usize, seed: u64, exec: Exec) -> Result<RealizationSet> {
    if num_instances == 0 {
        return param("number of realizations must be at least 1");
    }
    let m = graph.num_edges();
    let words = m.div_ceil(64);
    let per_instance = exec.map_range(num_instances, |i| {
        let mut mask = vec![0u64; words];
        for (e, &p) in graph.probs().iter().enumerate() {
            if edge_alive(seed, i, e, p) {
                mask[e / 64] |= 1 << (e % 64);
            }
        }
        mask
    });
    Ok(RealizationSet { num_instances, num_edges: m, words_per_instance: words, bits: per_instance.concat(), seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_simple_path() {
        let g = load_edge_list("0 1\n1 2", false).unwrap();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert!(g.probs().iter().all(|&p| p == 0.0));
    }

    #[test]
    fn remaps_in_first_appearance_order() {
        let g = load_edge_list("# c\n5 7", false).unwrap();
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(g.original_ids(), &[5, 7]);
    }

    #[test]
    fn deduplicates_edges() {
        let g = load_edge_list("0 1\n0 1\n", false).unwrap();
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn empty_input_is_empty_graph() {
        let g = load_edge_list("", false).unwrap();
        assert_eq!(g.num_vertices(), 0);
        assert_eq!(g.num_edges(), 0);
        let g = load_edge_list("# only comments\n\n", false).unwrap();
        assert_eq!(g.num_vertices(), 0);
    }

    #[test]
    fn parse_error_reports_line() {
        match load_edge_list("0 1\n# x\n2 b\n", false) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(load_edge_list("4\n", false), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(load_edge_list("1 2 3\n", false), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn undirected_flag_doubles_edges() {
        let g = load_edge_list("0 1\n1 2\n", true).unwrap();
        assert_eq!(g.num_edges(), 4);
        assert_eq!(g.in_degree(1), 2);
        assert_eq!(g.out_degree(1), 2);
    }

    #[test]
    fn degrees_match_edge_list() {
        let g = load_edge_list("0 1\n0 2\n1 2\n2 0\n3 2\n", false).unwrap();
        for v in 0..g.num_vertices() {
            let indeg = g.edges().filter(|&(_, t)| t == v).count();
            let outdeg = g.edges().filter(|&(s, _)| s == v).count();
            assert_eq!(g.in_degree(v), indeg);
            assert_eq!(g.out_degree(v), outdeg);
            for (e, u) in g.in_edges(v) {
                assert_eq!(g.edges().nth(e), Some((u, v)));
            }
        }
    }

    #[test]
    fn weighted_cascade_divides_by_in_degree() {
        let g = load_edge_list("0 2\n1 2\n2 3\n", false).unwrap();
        let g = weighted_cascade_probs(g, 0.5).unwrap();
        // Ids remap to 0, 2, 1, 3 in order of appearance; edge order follows the new source ids.
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 3), (2, 1)]);
        assert_eq!(g.probs(), &[0.25, 0.5, 0.25]);
        let g = weighted_cascade_probs(load_edge_list("0 1", false).unwrap(), 1.0).unwrap();
        assert_eq!(g.probs(), &[1.0]);
    }

    #[test]
    fn weighted_cascade_rejects_bad_q() {
        for q in [0.0, -0.1, 1.5, f64::NAN] {
            let g = load_edge_list("0 1", false).unwrap();
            assert!(matches!(weighted_cascade_probs(g, q), Err(Error::Param(_))));
        }
    }

    #[test]
    fn forced_probabilities() {
        let g = load_edge_list("0 1\n1 2\n2 0\n", false).unwrap();
        let all = sample_realizations(&g.clone().with_uniform_prob(1.0).unwrap(), 20, 9).unwrap();
        let none = sample_realizations(&g.with_uniform_prob(0.0).unwrap(), 20, 9).unwrap();
        for i in 0..20 {
            assert_eq!(all.alive_count(i), 3);
            assert_eq!(none.alive_count(i), 0);
        }
    }

    #[test]
    fn alive_fraction_matches_probability() {
        // 99.9% binomial interval half-width for 10^4 draws at p = 0.3 is 3.29·sqrt(.21/10^4) ≈ 0.015.
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap().with_uniform_prob(0.3).unwrap();
        let r = sample_realizations(&g, 10_000, 12345).unwrap();
        let alive = (0..10_000).filter(|&i| r.is_alive(i, 0)).count();
        assert!((alive as f64 / 10_000.0 - 0.3).abs() < 0.02);
    }

    #[test]
    fn zero_instances_rejected() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert!(sample_realizations(&g, 0, 1).is_err());
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let edges: Vec<(u32, u32)> = (0..40).map(|i| (i, (i * 7 + 3) % 41)).collect();
        let g = Graph::from_edges(41, &edges).unwrap().with_uniform_prob(0.4).unwrap();
        let a = sample_realizations_with(&g, 33, 5, Exec::Sequential).unwrap();
        let b = sample_realizations_with(&g, 33, 5, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
