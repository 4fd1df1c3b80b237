//! Exhaustive ground truth for small ground sets.

use crate::cost::CostModel;
use crate::error::{param, Error, Result};
use crate::exec::Exec;
use crate::oracle::Oracle;

pub const COVER_LIMIT: usize = 24;
pub const SUBMODULARITY_LIMIT: usize = 12;
pub const EPS_CHECK_LIMIT: usize = 16;

/// Slack allowed before a diminishing-returns failure counts as a violation.
pub const SUBMODULARITY_TOLERANCE: f64 = 1e-12;

fn members(mask: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

fn guard(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        Err(Error::TooLarge { size: n, limit })
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cover {
    Optimal {
        set: Vec<usize>,
        cost: f64,
    },
    /// `f(S) < τ`.
    Infeasible,
}

impl Cover {
    pub fn cost(&self) -> Option<f64> {
        match self {
            Cover::Optimal { cost, .. } => Some(*cost),
            Cover::Infeasible => None,
        }
    }

    pub fn set(&self) -> Option<&[usize]> {
        match self {
            Cover::Optimal { set, .. } => Some(set),
            Cover::Infeasible => None,
        }
    }
}

/// Minimum-cost `X` with `f(X) ≥ τ`; lexicographically smallest set among equal costs.
pub fn optimal_cover<O: Oracle, C: CostModel>(f: &O, cost: &C, tau: f64) -> Result<Cover> {
    optimal_cover_with(f, cost, tau, Exec::default())
}

pub fn optimal_cover_with<O: Oracle, C: CostModel>(f: &O, cost: &C, tau: f64, exec: Exec) -> Result<Cover> {
    let n = f.ground_set_size();
    guard(n, COVER_LIMIT)?;
    if cost.len() != n {
        return param("cost model and oracle disagree on the ground set");
    }
    let prefix_bits = n.min(8);
    let rest = n - prefix_bits;
    let partial = exec.map_range(1 << prefix_bits, |hi| {
        let mut best: Option<(f64, Vec<usize>)> = None;
        for lo in 0..1usize << rest {
            let set = members(hi << rest | lo, n);
            let c = cost.eval(&set);
            if best.as_ref().is_some_and(|(b, s)| c > *b || (c == *b && set >= *s)) {
                continue;
            }
            if f.query(&set) >= tau {
                best = Some((c, set));
            }
        }
        best
    });
    let best = partial.into_iter().flatten().min_by(|(c1, s1), (c2, s2)| c1.total_cmp(c2).then_with(|| s1.cmp(s2)));
    Ok(match best {
        Some((cost, set)) => Cover::Optimal { set, cost },
        None => Cover::Infeasible,
    })
}

/// A diminishing-returns failure: `ΔF(A, x) < ΔF(B, x)` with `A ⊆ B`, `x ∉ B`.
#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub x: usize,
    pub gain_a: f64,
    pub gain_b: f64,
}

pub fn check_submodular<O: Oracle>(oracle: &O) -> Result<Vec<Violation>> {
    check_submodular_with(oracle, Exec::default())
}

pub fn check_submodular_with<O: Oracle>(oracle: &O, exec: Exec) -> Result<Vec<Violation>> {
    let n = oracle.ground_set_size();
    guard(n, SUBMODULARITY_LIMIT)?;
    let full = 1usize << n;
    let values = exec.map_range(full, |m| oracle.query(&members(m, n)));
    let per_b = exec.map_range(full, |b| {
        let mut found = Vec::new();
        for x in (0..n).filter(|x| b >> x & 1 == 0) {
            let gain_b = values[b | 1 << x] - values[b];
            // All submasks of b, including b itself and the empty set.
            let mut a = b;
            loop {
                let gain_a = values[a | 1 << x] - values[a];
                if gain_a < gain_b - SUBMODULARITY_TOLERANCE {
                    found.push(Violation { a: members(a, n), b: members(b, n), x, gain_a, gain_b });
                }
                if a == 0 {
                    break;
                }
                a = (a - 1) & b;
            }
        }
        found
    });
    Ok(per_b.into_iter().flatten().collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsCheck {
    pub max_gap: f64,
    pub pass: bool,
}

/// `max_X |F(X) − f(X)|` over all subsets; passes when the gap is at most `eps`.
pub fn check_eps_approx<A: Oracle, B: Oracle>(big_f: &A, f: &B, eps: f64) -> Result<EpsCheck> {
    let n = f.ground_set_size();
    guard(n, EPS_CHECK_LIMIT)?;
    if big_f.ground_set_size() != n {
        return param("oracles disagree on the ground set");
    }
    let gaps = Exec::default().map_range(1 << n, |m| {
        let set = members(m, n);
        (big_f.query(&set) - f.query(&set)).abs()
    });
    let max_gap = gaps.into_iter().fold(0.0, f64::max);
    Ok(EpsCheck { max_gap, pass: max_gap <= eps })
}
