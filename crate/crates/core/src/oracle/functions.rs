use crate::error::{param, Result};
use crate::exec::Exec;

use super::Oracle;

/// `f(X) = Σ_{x∈X} values[x]`.
#[derive(Clone, Debug)]
pub struct ModularBenefit {
    values: Vec<f64>,
}

impl ModularBenefit {
    pub fn new(values: Vec<f64>) -> Self {
        ModularBenefit { values }
    }
}

impl Oracle for ModularBenefit {
    fn ground_set_size(&self) -> usize {
        self.values.len()
    }
    fn query(&self, set: &[usize]) -> f64 {
        // Summing in index order makes the value independent of how the set is listed.
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        sorted.iter().map(|&x| self.values[x]).sum()
    }
    fn declares_submodular(&self) -> bool {
        true
    }
}

/// Weighted coverage: element `x` covers `sets[x]` ⊆ universe; `f(X)` is the total weight of
/// the covered universe items.
#[derive(Clone, Debug)]
pub struct WeightedCoverage {
    sets: Vec<Vec<usize>>,
    weights: Vec<f64>,
}

impl WeightedCoverage {
    pub fn new(sets: Vec<Vec<usize>>, weights: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = sets.iter().flatten().find(|&&u| u >= weights.len()) {
            return param(format!("universe item {bad} has no weight"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return param("coverage weights must be non-negative");
        }
        Ok(WeightedCoverage { sets, weights })
    }

    /// Unit-weight coverage over a universe of `universe` items.
    pub fn unweighted(sets: Vec<Vec<usize>>, universe: usize) -> Result<Self> {
        WeightedCoverage::new(sets, vec![1.0; universe])
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn covered(&self, set: &[usize]) -> Vec<bool> {
        let mut covered = vec![false; self.weights.len()];
        for &x in set {
            for &u in &self.sets[x] {
                covered[u] = true;
            }
        }
        covered
    }

    // Summation in universe order so every route to the same covered set agrees bit for bit.
    fn total(&self, covered: &[bool]) -> f64 {
        covered.iter().zip(&self.weights).filter(|(c, _)| **c).map(|(_, w)| w).sum()
    }
}

impl Oracle for WeightedCoverage {
    fn ground_set_size(&self) -> usize {
        self.sets.len()
    }
    fn query(&self, set: &[usize]) -> f64 {
        self.total(&self.covered(set))
    }
    fn declares_submodular(&self) -> bool {
        true
    }
    fn extend_values(&self, base: &[usize], candidates: &[usize], exec: Exec) -> Vec<f64> {
        let covered = self.covered(base);
        exec.map_slice(candidates, |&x| {
            let mut c = covered.clone();
            for &u in &self.sets[x] {
                c[u] = true;
            }
            self.total(&c)
        })
    }
}

/// Wraps a closure as an oracle.
pub struct FnOracle<F> {
    n: usize,
    f: F,
    submodular: bool,
}

impl<F: Fn(&[usize]) -> f64 + Sync> FnOracle<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnOracle { n, f, submodular: false }
    }

    /// Marks the closure as submodular. The caller vouches for it.
    pub fn submodular(mut self) -> Self {
        self.submodular = true;
        self
    }
}

impl<F: Fn(&[usize]) -> f64 + Sync> Oracle for FnOracle<F> {
    fn ground_set_size(&self) -> usize {
        self.n
    }
    fn query(&self, set: &[usize]) -> f64 {
        (self.f)(set)
    }
    fn declares_submodular(&self) -> bool {
        self.submodular
    }
}
