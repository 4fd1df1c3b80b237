//! Value oracles over the ground set `0..n`.
//!
//! Sets are passed as slices of distinct element ids in any order. An oracle is pure: the same
//! set always yields the same value.

mod functions;
mod noisy;
mod reach;
mod sketch;

use std::collections::HashMap;
use std::sync::Mutex;

pub use functions::{FnOracle, ModularBenefit, WeightedCoverage};
pub use noisy::{noisy_oracle, NoiseMode, NoisyOracle};
pub use reach::{exact_average_reachability, AverageReachability};
pub use sketch::{
    assign_ranks, build_sketches, build_sketches_naive, build_sketches_pruned, sketch_estimate, sketch_size_for,
    ExplicitRanks, RankAssignment, RankSource, ReachSketch, SKETCH_MAGIC,
};

use crate::error::{param, Result};
use crate::exec::Exec;

pub trait Oracle: Sync {
    fn ground_set_size(&self) -> usize;

    fn query(&self, set: &[usize]) -> f64;

    /// Declared absolute error bound against the function it approximates. Zero when exact.
    fn eps_abs(&self) -> f64 {
        0.0
    }

    /// True only for oracles known to be submodular; enables lazy greedy evaluation.
    fn declares_submodular(&self) -> bool {
        false
    }

    /// Values of `base ∪ {x}` for every candidate `x ∉ base`, in candidate order.
    ///
    /// Implementations may share work across candidates but must return exactly what
    /// [`Oracle::query`] would.
    fn extend_values(&self, base: &[usize], candidates: &[usize], exec: Exec) -> Vec<f64> {
        exec.map_slice(candidates, |&x| {
            let mut set = Vec::with_capacity(base.len() + 1);
            set.extend_from_slice(base);
            set.push(x);
            self.query(&set)
        })
    }
}

impl<O: Oracle + ?Sized> Oracle for &O {
    fn ground_set_size(&self) -> usize {
        (**self).ground_set_size()
    }
    fn query(&self, set: &[usize]) -> f64 {
        (**self).query(set)
    }
    fn eps_abs(&self) -> f64 {
        (**self).eps_abs()
    }
    fn declares_submodular(&self) -> bool {
        (**self).declares_submodular()
    }
    fn extend_values(&self, base: &[usize], candidates: &[usize], exec: Exec) -> Vec<f64> {
        (**self).extend_values(base, candidates, exec)
    }
}

impl<O: Oracle + ?Sized> Oracle for Box<O> {
    fn ground_set_size(&self) -> usize {
        (**self).ground_set_size()
    }
    fn query(&self, set: &[usize]) -> f64 {
        (**self).query(set)
    }
    fn eps_abs(&self) -> f64 {
        (**self).eps_abs()
    }
    fn declares_submodular(&self) -> bool {
        (**self).declares_submodular()
    }
    fn extend_values(&self, base: &[usize], candidates: &[usize], exec: Exec) -> Vec<f64> {
        (**self).extend_values(base, candidates, exec)
    }
}

/// `min(inner, tau)`. Truncation never increases the gap to the approximated function, so the
/// declared error is carried over.
#[derive(Clone, Debug)]
pub struct Truncated<O> {
    inner: O,
    tau: f64,
}

pub fn truncate<O: Oracle>(inner: O, tau: f64) -> Truncated<O> {
    Truncated { inner, tau }
}

impl<O> Truncated<O> {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: Oracle> Oracle for Truncated<O> {
    fn ground_set_size(&self) -> usize {
        self.inner.ground_set_size()
    }
    fn query(&self, set: &[usize]) -> f64 {
        self.inner.query(set).min(self.tau)
    }
    fn eps_abs(&self) -> f64 {
        self.inner.eps_abs()
    }
    fn declares_submodular(&self) -> bool {
        self.inner.declares_submodular()
    }
    fn extend_values(&self, base: &[usize], candidates: &[usize], exec: Exec) -> Vec<f64> {
        let mut v = self.inner.extend_values(base, candidates, exec);
        v.iter_mut().for_each(|x| *x = x.min(self.tau));
        v
    }
}

/// Memoizes query results keyed by the sorted set.
pub struct Cached<O> {
    inner: O,
    memo: Mutex<HashMap<Vec<usize>, f64>>,
}

impl<O: Oracle> Cached<O> {
    pub fn new(inner: O) -> Self {
        Cached { inner, memo: Mutex::new(HashMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.memo.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl<O: Oracle> Oracle for Cached<O> {
    fn ground_set_size(&self) -> usize {
        self.inner.ground_set_size()
    }
    fn query(&self, set: &[usize]) -> f64 {
        let mut key = set.to_vec();
        key.sort_unstable();
        if let Some(&v) = self.memo.lock().unwrap().get(&key) {
            return v;
        }
        let v = self.inner.query(&key);
        self.memo.lock().unwrap().insert(key, v);
        v
    }
    fn eps_abs(&self) -> f64 {
        self.inner.eps_abs()
    }
    fn declares_submodular(&self) -> bool {
        self.inner.declares_submodular()
    }
}

/// Relative error `eps_rel` becomes absolute error `eps_rel · tau` for oracles truncated at `tau`.
pub fn rel_to_abs_eps(eps_rel: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return param(format!("tau = {tau} must be positive"));
    }
    if !(eps_rel >= 0.0) {
        return param(format!("eps_rel = {eps_rel} must be non-negative"));
    }
    Ok(eps_rel * tau)
}
