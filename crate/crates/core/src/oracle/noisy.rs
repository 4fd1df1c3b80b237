use crate::exec::Exec;
use crate::rng;

use super::Oracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseMode {
    /// `η(X)` uniform on `[−ε, ε)`, keyed by the set.
    Uniform,
    /// `η(X) = +ε` for odd `|X|`, `−ε` for even `|X|`. Every marginal gain is shifted by `±2ε`.
    AdversarialAlternating,
}

/// `F(X) = max(0, f(X) + η(X))` with `|η(X)| ≤ ε`, deterministic per `(seed, X)`.
#[derive(Clone, Debug)]
pub struct NoisyOracle<O> {
    inner: O,
    eps: f64,
    seed: u64,
    mode: NoiseMode,
}

pub fn noisy_oracle<O: Oracle>(inner: O, eps: f64, seed: u64, mode: NoiseMode) -> NoisyOracle<O> {
    assert!(eps >= 0.0, "noise bound must be non-negative");
    NoisyOracle { inner, eps, seed, mode }
}

impl<O: Oracle> NoisyOracle<O> {
    pub fn inner(&self) -> &O {
        &self.inner
    }

    fn noise(&self, set: &[usize]) -> f64 {
        match self.mode {
            NoiseMode::Uniform => {
                // 21-bit grid keeps f + η exact when f and ε are short dyadic fractions.
                let u = (rng::set_hash(self.seed, set) >> 43) as f64 / (1u64 << 21) as f64;
                self.eps * (2.0 * u - 1.0)
            }
            NoiseMode::AdversarialAlternating => {
                if set.len() % 2 == 1 {
                    self.eps
                } else {
                    -self.eps
                }
            }
        }
    }

    fn perturb(&self, exact: f64, set: &[usize]) -> f64 {
        if self.eps == 0.0 {
            return exact;
        }
        let mut v = (exact + self.noise(set)).max(0.0);
        // Rounding in the sum must not push the gap past ε.
        while (v - exact).abs() > self.eps {
            v = if v > exact { v.next_down() } else { v.next_up() };
        }
        v
    }
}

impl<O: Oracle> Oracle for NoisyOracle<O> {
    fn ground_set_size(&self) -> usize {
        self.inner.ground_set_size()
    }

    fn query(&self, set: &[usize]) -> f64 {
        self.perturb(self.inner.query(set), set)
    }

    fn eps_abs(&self) -> f64 {
        self.inner.eps_abs() + self.eps
    }

    fn extend_values(&self, base: &[usize], candidates: &[usize], exec: Exec) -> Vec<f64> {
        let exact = self.inner.extend_values(base, candidates, exec);
        let mut set = base.to_vec();
        set.push(0);
        candidates
            .iter()
            .zip(exact)
            .map(|(&x, f)| {
                *set.last_mut().unwrap() = x;
                self.perturb(f, &set)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ModularBenefit;

    fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
        (0u32..1 << n).map(move |m| (0..n).filter(|i| m >> i & 1 == 1).collect())
    }

    #[test]
    fn zero_noise_is_identity() {
        let f = ModularBenefit::new(vec![0.3, 1.7, 2.2]);
        let g = noisy_oracle(&f, 0.0, 5, NoiseMode::Uniform);
        for s in subsets(3) {
            assert_eq!(g.query(&s), f.query(&s));
        }
    }

    #[test]
    fn noise_stays_within_bound_and_is_repeatable() {
        let f = ModularBenefit::new(vec![0.3, 1.7, 2.2, 0.01, 5.0, 0.9]);
        for mode in [NoiseMode::Uniform, NoiseMode::AdversarialAlternating] {
            let g = noisy_oracle(&f, 0.37, 17, mode);
            for s in subsets(6) {
                let v = g.query(&s);
                assert!((v - f.query(&s)).abs() <= 0.37);
                assert!(v >= 0.0);
                let mut rev = s.clone();
                rev.reverse();
                assert_eq!(v, g.query(&rev));
            }
        }
    }

    #[test]
    fn alternating_mode_shifts_gains_by_two_eps() {
        let f = ModularBenefit::new(vec![3.0, 3.0, 3.0]);
        let g = noisy_oracle(&f, 0.5, 0, NoiseMode::AdversarialAlternating);
        assert_eq!(g.query(&[0]) - g.query(&[]), 3.5);
        assert_eq!(g.query(&[0, 1]) - g.query(&[0]), 2.0);
        assert_eq!(g.query(&[0, 1, 2]) - g.query(&[0, 1]), 4.0);
    }

    #[test]
    fn extend_values_match_query() {
        let f = ModularBenefit::new(vec![0.3, 1.7, 2.2, 0.01, 5.0]);
        let g = noisy_oracle(&f, 0.2, 3, NoiseMode::Uniform);
        let vals = g.extend_values(&[1, 3], &[0, 2, 4], Exec::Sequential);
        assert_eq!(vals, vec![g.query(&[1, 3, 0]), g.query(&[1, 3, 2]), g.query(&[1, 3, 4])]);
    }
}
