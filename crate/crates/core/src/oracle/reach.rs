//! Exact average reachability over a set of sampled realizations.

use std::collections::VecDeque;

use crate::exec::Exec;
use crate::graph::{Graph, RealizationSet};

use super::Oracle;

const CHUNK: usize = 32;

/// `f(X)`: mean number of vertices reachable from `X` over the alive-edge instances. Vertices of
/// `X` count as reached.
#[derive(Clone, Copy, Debug)]
pub struct AverageReachability<'a> {
    graph: &'a Graph,
    realizations: &'a RealizationSet,
    exec: Exec,
}

impl<'a> AverageReachability<'a> {
    pub fn new(graph: &'a Graph, realizations: &'a RealizationSet) -> Self {
        assert_eq!(graph.num_edges(), realizations.num_edges(), "realizations belong to another graph");
        AverageReachability { graph, realizations, exec: Exec::default() }
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    pub fn realizations(&self) -> &RealizationSet {
        self.realizations
    }

    /// Total number of reached `(vertex, instance)` pairs.
    pub fn reached_pairs(&self, set: &[usize]) -> u64 {
        let n = self.graph.num_vertices();
        let num = self.realizations.num_instances();
        self.exec.sum_range(num.div_ceil(CHUNK), |chunk| {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::new();
            let mut total = 0;
            for i in chunk * CHUNK..((chunk + 1) * CHUNK).min(num) {
                seen.iter_mut().for_each(|s| *s = false);
                total += self.forward(i, set, &mut seen, &mut queue, None) as u64;
            }
            total
        })
    }

    /// BFS over alive edges of `instance` from `sources`, marking `seen`. Vertices already marked
    /// in `blocked` are neither counted nor expanded. Returns the number of newly marked vertices.
    fn forward(
        &self,
        instance: usize,
        sources: &[usize],
        seen: &mut [bool],
        queue: &mut VecDeque<usize>,
        blocked: Option<&[u64]>,
    ) -> usize {
        let is_blocked = |v: usize| blocked.is_some_and(|b| b[v / 64] >> (v % 64) & 1 == 1);
        let mut count = 0;
        for &s in sources {
            if !seen[s] && !is_blocked(s) {
                seen[s] = true;
                count += 1;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for (e, v) in self.graph.out_edges(u) {
                if !seen[v] && !is_blocked(v) && self.realizations.is_alive(instance, e) {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count
    }

    fn pairs_to_value(&self, pairs: u64) -> f64 {
        pairs as f64 / self.realizations.num_instances() as f64
    }
}

pub fn exact_average_reachability(graph: &Graph, realizations: &RealizationSet, set: &[usize]) -> f64 {
    AverageReachability::new(graph, realizations).query(set)
}

impl Oracle for AverageReachability<'_> {
    fn ground_set_size(&self) -> usize {
        self.graph.num_vertices()
    }

    fn query(&self, set: &[usize]) -> f64 {
        self.pairs_to_value(self.reached_pairs(set))
    }

    fn declares_submodular(&self) -> bool {
        true
    }

    fn extend_values(&self, base: &[usize], candidates: &[usize], exec: Exec) -> Vec<f64> {
        let n = self.graph.num_vertices();
        let num = self.realizations.num_instances();
        let words = n.div_ceil(64);

        // Vertices reached from `base`, one bitmask per instance.
        let per_instance = self.exec.map_range(num, |i| {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::new();
            let count = self.forward(i, base, &mut seen, &mut queue, None);
            let mut mask = vec![0u64; words];
            for v in (0..n).filter(|&v| seen[v]) {
                mask[v / 64] |= 1 << (v % 64);
            }
            (count as u64, mask)
        });
        let base_pairs: u64 = per_instance.iter().map(|(c, _)| c).sum();

        exec.map_slice(candidates, |&x| {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::new();
            let mut extra = 0u64;
            for (i, (_, mask)) in per_instance.iter().enumerate() {
                if mask[x / 64] >> (x % 64) & 1 == 1 {
                    continue;
                }
                seen.iter_mut().for_each(|s| *s = false);
                extra += self.forward(i, &[x], &mut seen, &mut queue, Some(mask)) as u64;
            }
            self.pairs_to_value(base_pairs + extra)
        })
    }
}
