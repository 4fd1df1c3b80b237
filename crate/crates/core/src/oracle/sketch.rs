//! Combined bottom-k reachability sketches and the approximate average reachability estimator.
//!
//! Every `(vertex, instance)` pair carries a uniform rank. The sketch of `u` keeps the `k`
//! smallest ranks among pairs `(v, i)` with `v` reachable from `u` in instance `i`. For a seed set
//! `X` the union of the member sketches is either small (`|U| < k`, then `|U| / N` is exact) or
//! yields the estimate `(k − 1) / (N·t)` with `t` the k-th smallest rank in the union.
//!
//! Rank values are distinct per pair, so deduplicating a union by value is the same as
//! deduplicating by pair.

use std::collections::{BinaryHeap, VecDeque};
use std::io::{Read, Write};

use crate::error::{param, Error, Result};
use crate::exec::Exec;
use crate::graph::{Graph, RealizationSet};
use crate::rng;

use super::Oracle;

pub const SKETCH_MAGIC: &[u8; 8] = b"SCSCSK01";

const RANK_STREAM: u64 = 0x7A4C;

/// Source of pair ranks. Values must lie in `(0, 1)` and be distinct across pairs.
pub trait RankSource: Sync {
    fn num_vertices(&self) -> usize;
    fn num_instances(&self) -> usize;
    fn rank(&self, vertex: usize, instance: usize) -> f64;
    fn seed(&self) -> u64;
}

/// Ranks computed on demand from `(seed, vertex, instance)`; never materialized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankAssignment {
    n: usize,
    num_instances: usize,
    seed: u64,
}

pub fn assign_ranks(n: usize, num_instances: usize, seed: u64) -> RankAssignment {
    assert!((n as u128) * (num_instances as u128) < 1u128 << 52, "n·N exceeds the distinct-rank domain");
    RankAssignment { n, num_instances, seed }
}

impl RankSource for RankAssignment {
    fn num_vertices(&self) -> usize {
        self.n
    }
    fn num_instances(&self) -> usize {
        self.num_instances
    }
    #[inline]
    fn rank(&self, vertex: usize, instance: usize) -> f64 {
        let pair = vertex as u64 * self.num_instances as u64 + instance as u64;
        rng::open_unit_distinct(rng::keyed(self.seed, RANK_STREAM, 0, 0), pair)
    }
    fn seed(&self) -> u64 {
        self.seed
    }
}

/// A fixed rank table, `table[v][i]`. Used for hand-built fixtures.
#[derive(Clone, Debug)]
pub struct ExplicitRanks {
    table: Vec<Vec<f64>>,
    num_instances: usize,
}

impl ExplicitRanks {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let num_instances = table.first().map_or(0, Vec::len);
        if table.iter().any(|row| row.len() != num_instances) {
            return param("rank table rows must have equal length");
        }
        let mut all: Vec<f64> = table.iter().flatten().copied().collect();
        if all.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return param("ranks must lie in (0, 1)");
        }
        all.sort_by(f64::total_cmp);
        if all.windows(2).any(|w| w[0] == w[1]) {
            return param("ranks must be distinct");
        }
        Ok(ExplicitRanks { table, num_instances })
    }
}

impl RankSource for ExplicitRanks {
    fn num_vertices(&self) -> usize {
        self.table.len()
    }
    fn num_instances(&self) -> usize {
        self.num_instances
    }
    fn rank(&self, vertex: usize, instance: usize) -> f64 {
        self.table[vertex][instance]
    }
    fn seed(&self) -> u64 {
        0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReachSketch {
    k: usize,
    num_instances: usize,
    seed: u64,
    lists: Vec<Vec<f64>>,
}

impl ReachSketch {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_instances(&self) -> usize {
        self.num_instances
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn num_vertices(&self) -> usize {
        self.lists.len()
    }

    /// Ascending ranks of vertex `u`'s sketch.
    pub fn ranks(&self, u: usize) -> &[f64] {
        &self.lists[u]
    }

    /// The `min(k, |U|)` smallest values of the union of the sketches of `set`.
    fn union_prefix(&self, set: &[usize]) -> Vec<f64> {
        let mut all: Vec<f64> = set.iter().flat_map(|&u| self.lists[u].iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        all.dedup();
        all.truncate(self.k);
        all
    }

    fn estimate_from_prefix(&self, prefix: &[f64]) -> f64 {
        let n = self.num_instances as f64;
        if prefix.len() < self.k {
            prefix.len() as f64 / n
        } else {
            let t = prefix[self.k - 1];
            (self.k - 1) as f64 / (n * t)
        }
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let n = u32::try_from(self.lists.len()).map_err(|_| Error::Format("n exceeds u32".into()))?;
        let k = u32::try_from(self.k).map_err(|_| Error::Format("k exceeds u32".into()))?;
        let num = u32::try_from(self.num_instances).map_err(|_| Error::Format("N exceeds u32".into()))?;
        out.write_all(SKETCH_MAGIC)?;
        out.write_all(&n.to_le_bytes())?;
        out.write_all(&k.to_le_bytes())?;
        out.write_all(&num.to_le_bytes())?;
        out.write_all(&self.seed.to_le_bytes())?;
        for list in &self.lists {
            out.write_all(&(list.len() as u32).to_le_bytes())?;
            for r in list {
                out.write_all(&r.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<ReachSketch> {
        let mut magic = [0u8; 8];
        read_exact(&mut input, &mut magic)?;
        if &magic != SKETCH_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let n = read_u32(&mut input)? as usize;
        let k = read_u32(&mut input)? as usize;
        let num_instances = read_u32(&mut input)? as usize;
        let mut seed = [0u8; 8];
        read_exact(&mut input, &mut seed)?;
        if k == 0 || num_instances == 0 {
            return Err(Error::Format("k and N must be positive".into()));
        }
        let mut lists = Vec::with_capacity(n.min(1 << 20));
        for u in 0..n {
            let len = read_u32(&mut input)? as usize;
            if len > k {
                return Err(Error::Format(format!("vertex {u}: {len} ranks exceed k = {k}")));
            }
            let mut list = Vec::with_capacity(len);
            for _ in 0..len {
                let mut b = [0u8; 8];
                read_exact(&mut input, &mut b)?;
                list.push(f64::from_le_bytes(b));
            }
            if list.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
                return Err(Error::Format(format!("vertex {u}: rank outside (0, 1)")));
            }
            if list.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::Format(format!("vertex {u}: ranks not strictly ascending")));
            }
            lists.push(list);
        }
        let mut rest = [0u8; 1];
        if input.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes".into()));
        }
        Ok(ReachSketch { k, num_instances, seed: u64::from_le_bytes(seed), lists })
    }
}

fn read_exact<R: Read>(input: &mut R, buf: &mut [u8]) -> Result<()> {
    input.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated".into()),
        _ => Error::Io(e),
    })
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(input, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Estimated average reachability of `set`.
pub fn sketch_estimate(sketch: &ReachSketch, set: &[usize]) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    sketch.estimate_from_prefix(&sketch.union_prefix(set))
}

impl Oracle for ReachSketch {
    fn ground_set_size(&self) -> usize {
        self.lists.len()
    }

    fn query(&self, set: &[usize]) -> f64 {
        sketch_estimate(self, set)
    }

    fn extend_values(&self, base: &[usize], candidates: &[usize], exec: Exec) -> Vec<f64> {
        // Only the k smallest values of the base union can influence any extended union.
        let prefix = self.union_prefix(base);
        exec.map_slice(candidates, |&x| {
            let mut merged = Vec::with_capacity(prefix.len() + self.lists[x].len());
            let (mut a, mut b) = (prefix.iter().peekable(), self.lists[x].iter().peekable());
            while merged.len() < self.k {
                let next = match (a.peek(), b.peek()) {
                    (Some(&&p), Some(&&q)) if p < q => a.next(),
                    (Some(&&p), Some(&&q)) if q < p => b.next(),
                    (Some(_), Some(_)) => {
                        b.next();
                        a.next()
                    }
                    (Some(_), None) => a.next(),
                    (None, Some(_)) => b.next(),
                    (None, None) => None,
                };
                match next {
                    Some(&r) => merged.push(r),
                    None => break,
                }
            }
            self.estimate_from_prefix(&merged)
        })
    }
}

/// Sketch size `ceil(c · eps_rel⁻² · ln n)` for relative error `eps_rel`.
///
/// With `c > 2`, all queries of a greedy run stay within relative error `eps_rel` with probability
/// at least `1 − n^(2−c)`.
pub fn sketch_size_for(eps_rel: f64, n: usize, c: f64) -> Result<usize> {
    if !(c > 2.0) {
        return param(format!("oversampling constant c = {c} must exceed 2"));
    }
    if !(eps_rel > 0.0 && eps_rel < 1.0) {
        return param(format!("eps_rel = {eps_rel} outside (0, 1)"));
    }
    if n < 2 {
        return param("n must be at least 2");
    }
    Ok((c * (n as f64).ln() / (eps_rel * eps_rel)).ceil() as usize)
}

pub fn build_sketches<R: RankSource>(
    graph: &Graph,
    realizations: &RealizationSet,
    ranks: &R,
    k: usize,
) -> Result<ReachSketch> {
    build_sketches_pruned(graph, realizations, ranks, k, Exec::default())
}

fn check_inputs<R: RankSource>(graph: &Graph, realizations: &RealizationSet, ranks: &R, k: usize) -> Result<()> {
    if k == 0 {
        return param("k must be at least 1");
    }
    if ranks.num_vertices() != graph.num_vertices() || ranks.num_instances() != realizations.num_instances() {
        return param("rank source does not match graph and realizations");
    }
    if realizations.num_edges() != graph.num_edges() {
        return param("realizations belong to another graph");
    }
    Ok(())
}

/// One forward BFS per `(u, instance)` with a bounded max-heap per vertex.
pub fn build_sketches_naive<R: RankSource>(
    graph: &Graph,
    realizations: &RealizationSet,
    ranks: &R,
    k: usize,
    exec: Exec,
) -> Result<ReachSketch> {
    check_inputs(graph, realizations, ranks, k)?;
    let n = graph.num_vertices();
    let lists = exec.map_range(n, |u| {
        // Positive finite doubles order like their bit patterns.
        let mut heap: BinaryHeap<u64> = BinaryHeap::with_capacity(k + 1);
        let mut seen = vec![false; n];
        let mut queue = VecDeque::new();
        for i in 0..realizations.num_instances() {
            seen.iter_mut().for_each(|s| *s = false);
            seen[u] = true;
            queue.push_back(u);
            while let Some(w) = queue.pop_front() {
                let r = ranks.rank(w, i).to_bits();
                if heap.len() < k {
                    heap.push(r);
                } else if r < *heap.peek().unwrap() {
                    heap.pop();
                    heap.push(r);
                }
                for (e, v) in graph.out_edges(w) {
                    if !seen[v] && realizations.is_alive(i, e) {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        let mut list: Vec<f64> = heap.into_iter().map(f64::from_bits).collect();
        list.sort_by(f64::total_cmp);
        list
    });
    Ok(ReachSketch { k, num_instances: realizations.num_instances(), seed: ranks.seed(), lists })
}

/// Rank-ascending reverse searches.
///
/// Pairs `(v, i)` are taken in increasing rank. A reverse BFS from `v` over the alive edges of
/// instance `i` offers the rank to every vertex it reaches; vertices with fewer than `k` entries
/// take it. The search is pruned at a node `(u, i)` that `k` earlier searches in instance `i` have
/// already reached: those `k` smaller ranks are reachable from every ancestor of `u` in instance
/// `i`, so every such ancestor's sketch is already full. Pruning on a full combined sketch alone
/// would be wrong, because a full sketch at `u` may hold ranks from other instances that `u`'s
/// ancestors cannot reach.
///
/// Pairs are generated in rank bands `[lo, hi)` with doubling `hi`, so only one band of pairs is
/// held in memory at a time. Processing stops once every sketch is full.
pub fn build_sketches_pruned<R: RankSource>(
    graph: &Graph,
    realizations: &RealizationSet,
    ranks: &R,
    k: usize,
    exec: Exec,
) -> Result<ReachSketch> {
    check_inputs(graph, realizations, ranks, k)?;
    let n = graph.num_vertices();
    let num = realizations.num_instances();
    // Counters saturate at u16::MAX; larger k disables pruning instead of pruning early.
    let cap = if k <= u16::MAX as usize { k as u16 } else { u16::MAX };
    let prune = k <= u16::MAX as usize;

    let mut lists: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut full = 0usize;
    // Per-instance visit counters, allocated on first use.
    let mut visits: Vec<Option<Vec<u16>>> = vec![None; num];
    let mut queue = VecDeque::new();
    let mut mark = vec![u32::MAX; n];
    let mut search_id = 0u32;

    let mut lo = 0.0f64;
    let mut hi = (2.0 * k as f64 / num as f64).min(1.0);
    while full < n && lo < 1.0 {
        let band = rank_band(ranks, n, num, lo, hi, exec);
        for (r, v, i) in band {
            if full == n {
                break;
            }
            let counts = visits[i].get_or_insert_with(|| vec![0u16; n]);
            if search_id == u32::MAX {
                mark.iter_mut().for_each(|m| *m = u32::MAX);
                search_id = 0;
            }
            search_id += 1;
            mark[v] = search_id;
            queue.push_back(v);
            while let Some(u) = queue.pop_front() {
                if prune && counts[u] >= cap {
                    continue;
                }
                counts[u] = counts[u].saturating_add(1);
                let list = &mut lists[u];
                if list.len() < k {
                    list.push(r);
                    if list.len() == k {
                        full += 1;
                    }
                }
                for (e, w) in graph.in_edges(u) {
                    if mark[w] != search_id && realizations.is_alive(i, e) {
                        mark[w] = search_id;
                        queue.push_back(w);
                    }
                }
            }
        }
        lo = hi;
        hi = (hi * 2.0).min(1.0);
        if lo == hi {
            break;
        }
    }
    Ok(ReachSketch { k, num_instances: num, seed: ranks.seed(), lists })
}

/// All pairs with rank in `[lo, hi)` (or `[lo, 1]` when `hi == 1`), sorted ascending.
fn rank_band<R: RankSource>(ranks: &R, n: usize, num: usize, lo: f64, hi: f64, exec: Exec) -> Vec<(f64, usize, usize)> {
    let last = hi >= 1.0;
    let per_vertex = exec.map_range(n, |v| {
        (0..num)
            .filter_map(|i| {
                let r = ranks.rank(v, i);
                (r >= lo && (r < hi || last)).then_some((r, v, i))
            })
            .collect::<Vec<_>>()
    });
    let mut band: Vec<(f64, usize, usize)> = per_vertex.into_iter().flatten().collect();
    band.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    band
}

impl ReachSketch {
    /// Assembles a sketch from explicit per-vertex lists. Lists must be strictly ascending,
    /// inside `(0, 1)`, and no longer than `k`.
    pub fn from_lists(k: usize, num_instances: usize, seed: u64, lists: Vec<Vec<f64>>) -> Result<Self> {
        let sketch = ReachSketch { k, num_instances, seed, lists };
        // Reuse the loader's validation.
        ReachSketch::read_from(sketch.to_bytes().as_slice())
    }
}
