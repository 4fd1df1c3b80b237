//! Monotone submodular cost functions and their curvature.
//!
//! Greedy selection reads only singleton costs. Full-set evaluation is needed by certificates
//! and exhaustive search.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{param, Error, Result};
use crate::exec::Exec;

pub trait CostModel: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `c({x})`, strictly positive.
    fn singleton(&self, x: usize) -> f64;

    /// `c(X)`; zero exactly for the empty set.
    fn eval(&self, set: &[usize]) -> f64;

    /// Known curvature, if any.
    fn declared_curvature(&self) -> Option<f64> {
        None
    }

    fn c_min(&self) -> f64 {
        (0..self.len()).map(|x| self.singleton(x)).fold(f64::INFINITY, f64::min)
    }

    fn c_max(&self) -> f64 {
        (0..self.len()).map(|x| self.singleton(x)).fold(f64::NEG_INFINITY, f64::max)
    }
}

impl<C: CostModel + ?Sized> CostModel for &C {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn singleton(&self, x: usize) -> f64 {
        (**self).singleton(x)
    }
    fn eval(&self, set: &[usize]) -> f64 {
        (**self).eval(set)
    }
    fn declared_curvature(&self) -> Option<f64> {
        (**self).declared_curvature()
    }
}

impl<C: CostModel + ?Sized> CostModel for Box<C> {
    fn len(&self) -> usize {
        (**self).len()
    }
    fn singleton(&self, x: usize) -> f64 {
        (**self).singleton(x)
    }
    fn eval(&self, set: &[usize]) -> f64 {
        (**self).eval(set)
    }
    fn declared_curvature(&self) -> Option<f64> {
        (**self).declared_curvature()
    }
}

fn check_positive(costs: &[f64]) -> Result<()> {
    match costs.iter().position(|c| !(*c > 0.0 && c.is_finite())) {
        Some(i) => param(format!("cost of element {i} must be positive and finite, got {}", costs[i])),
        None => Ok(()),
    }
}

/// `c(X) = Σ c_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Modular {
    costs: Vec<f64>,
}

pub fn modular_cost(costs: Vec<f64>) -> Result<Modular> {
    check_positive(&costs)?;
    Ok(Modular { costs })
}

impl Modular {
    pub fn costs(&self) -> &[f64] {
        &self.costs
    }
}

impl CostModel for Modular {
    fn len(&self) -> usize {
        self.costs.len()
    }
    fn singleton(&self, x: usize) -> f64 {
        self.costs[x]
    }
    fn eval(&self, set: &[usize]) -> f64 {
        set.iter().map(|&x| self.costs[x]).sum()
    }
    fn declared_curvature(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `c(X) = (Σ_{x∈X} w_x)^p` for base weights `w` and `p ∈ (0, 1]`. Singleton cost is `w_x^p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConcaveCardinality {
    weights: Vec<f64>,
    exponent: f64,
}

pub fn concave_cardinality_cost(weights: Vec<f64>, exponent: f64) -> Result<ConcaveCardinality> {
    check_positive(&weights)?;
    if !(exponent > 0.0 && exponent <= 1.0) {
        return param(format!("exponent {exponent} outside (0, 1]"));
    }
    Ok(ConcaveCardinality { weights, exponent })
}

impl CostModel for ConcaveCardinality {
    fn len(&self) -> usize {
        self.weights.len()
    }
    fn singleton(&self, x: usize) -> f64 {
        self.weights[x].powf(self.exponent)
    }
    fn eval(&self, set: &[usize]) -> f64 {
        if set.is_empty() {
            return 0.0;
        }
        set.iter().map(|&x| self.weights[x]).sum::<f64>().powf(self.exponent)
    }
    fn declared_curvature(&self) -> Option<f64> {
        (self.exponent == 1.0).then_some(1.0)
    }
}

/// `n` draws from `Normal(mean, sd)`, redrawing any non-positive value.
pub fn sample_normal_costs(n: usize, mean: f64, sd: f64, seed: u64) -> Result<Vec<f64>> {
    if !(mean > 0.0) {
        return param(format!("mean {mean} must be positive"));
    }
    let normal = Normal::new(mean, sd).map_err(|e| Error::Param(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| loop {
            let c = normal.sample(&mut rng);
            if c > 0.0 {
                break c;
            }
        })
        .collect())
}

/// One cost per non-empty line; `#` lines are comments.
pub fn parse_costs(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let c: f64 = t.parse().map_err(|_| Error::Parse { line: idx + 1, msg: format!("not a number: {t:?}") })?;
        out.push(c);
    }
    check_positive(&out)?;
    Ok(out)
}

pub const CURVATURE_LIMIT: usize = 20;

/// `ρ = max over non-empty X ⊆ S of Σ_{x∈X} c({x}) / c(X)`, by enumeration.
pub fn curvature_bruteforce<C: CostModel>(cost: &C) -> Result<f64> {
    curvature_bruteforce_with(cost, Exec::default())
}

pub fn curvature_bruteforce_with<C: CostModel>(cost: &C, exec: Exec) -> Result<f64> {
    let n = cost.len();
    if n > CURVATURE_LIMIT {
        return Err(Error::TooLarge { size: n, limit: CURVATURE_LIMIT });
    }
    if n == 0 {
        return Ok(1.0);
    }
    let singles: Vec<f64> = (0..n).map(|x| cost.singleton(x)).collect();
    let prefix_bits = n.min(6);
    let chunks = 1usize << prefix_bits;
    let rest = n - prefix_bits;
    let best = exec.map_range(chunks, |hi| {
        let mut best = 0.0f64;
        let mut set = Vec::with_capacity(n);
        for lo in 0..1usize << rest {
            let mask = hi << rest | lo;
            if mask == 0 {
                continue;
            }
            set.clear();
            set.extend((0..n).filter(|i| mask >> i & 1 == 1));
            let sum: f64 = set.iter().map(|&x| singles[x]).sum();
            best = best.max(sum / cost.eval(&set));
        }
        best
    });
    Ok(best.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modular_sums() {
        let c = modular_cost(vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(c.eval(&[0, 2]), 2.0);
        assert_eq!(c.eval(&[1]), c.singleton(1));
        assert_eq!(c.eval(&[]), 0.0);
        assert_eq!(curvature_bruteforce(&modular_cost(vec![0.5, 2.0, 1.25, 3.0]).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn rejects_non_positive_costs() {
        assert!(modular_cost(vec![1.0, 0.0]).is_err());
        assert!(modular_cost(vec![-1.0]).is_err());
        assert!(concave_cardinality_cost(vec![1.0], 0.0).is_err());
        assert!(concave_cardinality_cost(vec![1.0], 1.5).is_err());
    }

    #[test]
    fn concave_unit_exponent_is_modular() {
        let w = vec![0.5, 1.5, 2.0];
        let c = concave_cardinality_cost(w.clone(), 1.0).unwrap();
        let m = modular_cost(w).unwrap();
        for set in [vec![], vec![0], vec![0, 2], vec![0, 1, 2]] {
            assert_eq!(c.eval(&set), m.eval(&set));
        }
    }

    #[test]
    fn concave_square_root_curvature() {
        let c = concave_cardinality_cost(vec![1.0; 4], 0.5).unwrap();
        // Brute force: |X| / sqrt(|X|) peaks at |X| = 4.
        assert_eq!(curvature_bruteforce(&c).unwrap(), 2.0);
        assert_eq!(c.declared_curvature(), None);
    }

    #[test]
    fn concave_is_monotone() {
        let c = concave_cardinality_cost(vec![0.3, 1.1, 2.5, 0.7], 0.4).unwrap();
        for mask in 0u32..16 {
            let set: Vec<usize> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
            for x in (0..4).filter(|x| !set.contains(x)) {
                let mut bigger = set.clone();
                bigger.push(x);
                assert!(c.eval(&bigger) >= c.eval(&set));
            }
        }
    }

    #[test]
    fn curvature_refuses_large_sets() {
        let c = modular_cost(vec![1.0; 21]).unwrap();
        assert!(matches!(curvature_bruteforce(&c), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn normal_costs() {
        assert!(sample_normal_costs(50, 1.0, 0.0, 3).unwrap().iter().all(|&c| c == 1.0));
        let costs = sample_normal_costs(100_000, 1.0, 0.1, 4).unwrap();
        assert!(costs.iter().all(|&c| c > 0.0));
        // Standard error of the mean is 0.1 / sqrt(1e5) ≈ 3.2e-4; 0.01 is ~30 standard errors.
        let mean = costs.iter().sum::<f64>() / costs.len() as f64;
        assert!((mean - 1.0).abs() < 0.01);
        // Heavy left tail still yields only positive values.
        assert!(sample_normal_costs(1000, 0.1, 1.0, 5).unwrap().iter().all(|&c| c > 0.0));
        assert!(sample_normal_costs(3, 0.0, 1.0, 5).is_err());
    }

    #[test]
    fn parses_cost_file() {
        assert_eq!(parse_costs("1.5\n# x\n\n2\n").unwrap(), vec![1.5, 2.0]);
        assert!(matches!(parse_costs("1\nabc\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_costs("1\n0\n").is_err());
    }
}
