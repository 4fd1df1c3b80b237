//! Cost-effectiveness greedy on the truncated oracle `F_τ = min(F, τ)`.
//!
//! Each iteration adds the element maximizing `ΔF_τ(A, x) / c({x})`, smallest id on ties, until
//! `F(A) ≥ τ`. The oracle may be non-monotone and non-submodular. When the best ratio is not
//! positive the element is still added, and running out of elements ends the run with
//! [`Status::ExhaustedGroundSet`].

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use crate::cost::CostModel;
use crate::error::{param, Result};
use crate::exec::Exec;
use crate::oracle::Oracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// `F(A) ≥ τ`.
    Covered,
    /// The next gain fell to or below the exit threshold; its element was discarded.
    EarlyExit,
    /// Every element was taken and `F(S) < τ`.
    ExhaustedGroundSet,
    /// Stopped by [`GreedyOptions::max_iterations`].
    IterationLimit,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Covered => "covered",
            Status::EarlyExit => "early_exit",
            Status::ExhaustedGroundSet => "exhausted_ground_set",
            Status::IterationLimit => "iteration_limit",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Iteration {
    pub element: usize,
    /// `F_τ(A_{i−1})`.
    pub value_before: f64,
    /// `F_τ(A_i)`.
    pub value_after: f64,
    pub gain: f64,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GreedyTrace {
    pub tau: f64,
    pub iterations: Vec<Iteration>,
    pub status: Status,
    /// Untruncated `F(A)` of the returned set.
    pub final_value: f64,
}

impl GreedyTrace {
    pub fn selected(&self) -> Vec<usize> {
        self.iterations.iter().map(|it| it.element).collect()
    }

    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    /// `A_i`, the first `i` selected elements.
    pub fn prefix(&self, i: usize) -> Vec<usize> {
        self.iterations[..i].iter().map(|it| it.element).collect()
    }

    /// CSV with header `iter,element_original_id,gain,cost,F_before,F_after`. Iterations are
    /// numbered from 1. `original_ids` maps dense ids back to input ids when given.
    pub fn to_csv(&self, original_ids: Option<&[u64]>) -> String {
        let mut out = String::from("iter,element_original_id,gain,cost,F_before,F_after\n");
        for (i, it) in self.iterations.iter().enumerate() {
            let id = original_ids.map_or(it.element as u64, |ids| ids[it.element]);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                i + 1,
                id,
                it.gain + 0.0,
                it.cost,
                it.value_before + 0.0,
                it.value_after + 0.0
            );
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct GreedyOptions {
    /// Stop at the first gain `≤ μ*` and drop that element.
    pub early_exit: Option<f64>,
    pub max_iterations: Option<usize>,
    /// Lazy evaluation with stale upper bounds. Only valid for submodular oracles.
    pub lazy: bool,
    pub exec: Exec,
}

pub fn greedy<O: Oracle, C: CostModel>(oracle: &O, cost: &C, tau: f64) -> Result<(Vec<usize>, GreedyTrace)> {
    greedy_with(oracle, cost, tau, &GreedyOptions::default())
}

/// Greedy that returns `A_{k−1}` at the first iteration `k` with `F_τ(A_k) − F_τ(A_{k−1}) ≤ μ*`.
///
/// For `F` within `ε` of a monotone submodular `f`, the result satisfies
/// `f(A) ≥ τ − n·((c_max / c_min)·μ* + 2ε)`.
pub fn greedy_early_exit<O: Oracle, C: CostModel>(
    oracle: &O,
    cost: &C,
    tau: f64,
    mu_star: f64,
) -> Result<(Vec<usize>, GreedyTrace)> {
    if !(mu_star > 0.0) {
        return param(format!("exit threshold {mu_star} must be positive"));
    }
    greedy_with(oracle, cost, tau, &GreedyOptions { early_exit: Some(mu_star), ..Default::default() })
}

/// Greedy at threshold `τ − ε`. For submodular `F` within `ε` of `f`, the returned set costs at
/// most the exact-oracle submodular cover ratio times the optimum of the `f` instance, and
/// `f(A) ≥ τ − 2ε`.
pub fn run_translated<O: Oracle, C: CostModel>(
    oracle: &O,
    cost: &C,
    tau: f64,
    eps: f64,
) -> Result<(Vec<usize>, GreedyTrace)> {
    if !(eps >= 0.0) {
        return param(format!("eps = {eps} must be non-negative"));
    }
    if !(tau > eps) {
        return param(format!("tau = {tau} must exceed eps = {eps}"));
    }
    greedy(oracle, cost, tau - eps)
}

pub fn greedy_with<O: Oracle, C: CostModel>(
    oracle: &O,
    cost: &C,
    tau: f64,
    opts: &GreedyOptions,
) -> Result<(Vec<usize>, GreedyTrace)> {
    let n = oracle.ground_set_size();
    if !(tau >= 0.0) || tau.is_infinite() {
        return param(format!("tau = {tau} must be finite and non-negative"));
    }
    if cost.len() != n {
        return param(format!("cost model covers {} elements, ground set has {n}", cost.len()));
    }
    if let Some(x) = (0..n).find(|&x| !(cost.singleton(x) > 0.0)) {
        return param(format!("singleton cost of {x} must be positive"));
    }
    if opts.lazy && !oracle.declares_submodular() {
        return param("lazy evaluation requires an oracle that declares submodularity");
    }

    let mut state = State { selected: Vec::new(), in_set: vec![false; n], current: oracle.query(&[]) };
    let mut iterations = Vec::new();
    let mut lazy_heap = opts.lazy.then(BinaryHeap::new);

    let status = loop {
        if state.current >= tau {
            break Status::Covered;
        }
        if state.selected.len() == n {
            break Status::ExhaustedGroundSet;
        }
        if opts.max_iterations.is_some_and(|m| iterations.len() >= m) {
            break Status::IterationLimit;
        }
        let before = state.current.min(tau);
        let (element, value) = match lazy_heap.as_mut() {
            None => best_by_scan(oracle, cost, tau, &state, before, opts.exec),
            Some(heap) => best_lazy(oracle, cost, tau, &state, before, iterations.len(), heap),
        };
        let after = value.min(tau);
        let gain = after - before;
        if opts.early_exit.is_some_and(|mu| gain <= mu) {
            break Status::EarlyExit;
        }
        iterations.push(Iteration {
            element,
            value_before: before,
            value_after: after,
            gain,
            cost: cost.singleton(element),
        });
        state.selected.push(element);
        state.in_set[element] = true;
        state.current = value;
    };

    let trace = GreedyTrace { tau, iterations, status, final_value: state.current };
    Ok((state.selected, trace))
}

struct State {
    selected: Vec<usize>,
    in_set: Vec<bool>,
    current: f64,
}

fn best_by_scan<O: Oracle, C: CostModel>(
    oracle: &O,
    cost: &C,
    tau: f64,
    state: &State,
    before: f64,
    exec: Exec,
) -> (usize, f64) {
    let candidates: Vec<usize> = (0..state.in_set.len()).filter(|&x| !state.in_set[x]).collect();
    let values = oracle.extend_values(&state.selected, &candidates, exec);
    let mut best: Option<(usize, f64, f64)> = None;
    for (&x, &v) in candidates.iter().zip(&values) {
        let ratio = (v.min(tau) - before) / cost.singleton(x);
        if best.is_none_or(|(_, r, _)| ratio > r) {
            best = Some((x, ratio, v));
        }
    }
    let (x, _, v) = best.expect("at least one candidate remains");
    (x, v)
}

struct Bound {
    ratio: f64,
    element: usize,
    value: f64,
    round: usize,
}

impl PartialEq for Bound {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Bound {}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    // Max-heap on ratio; smaller id first among equal ratios.
    fn cmp(&self, other: &Self) -> Ordering {
        self.ratio.total_cmp(&other.ratio).then(other.element.cmp(&self.element))
    }
}

fn best_lazy<O: Oracle, C: CostModel>(
    oracle: &O,
    cost: &C,
    tau: f64,
    state: &State,
    before: f64,
    round: usize,
    heap: &mut BinaryHeap<Bound>,
) -> (usize, f64) {
    let fresh = |x: usize| {
        let mut set = state.selected.clone();
        set.push(x);
        let value = oracle.query(&set);
        Bound { ratio: (value.min(tau) - before) / cost.singleton(x), element: x, value, round }
    };
    if round == 0 && heap.is_empty() {
        heap.extend((0..state.in_set.len()).map(fresh));
    }
    loop {
        let top = heap.pop().expect("at least one candidate remains");
        if top.round == round {
            return (top.element, top.value);
        }
        heap.push(fresh(top.element));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::modular_cost;
    use crate::oracle::{ModularBenefit, WeightedCoverage};

    fn set_cover() -> WeightedCoverage {
        // Universe {1..6} stored as 0..5.
        WeightedCoverage::unweighted(vec![vec![0, 1, 2], vec![3, 4], vec![4, 5], vec![0, 3]], 6).unwrap()
    }

    #[test]
    fn single_dominant_element() {
        let f = ModularBenefit::new(vec![2.0, 1.0]);
        let c = modular_cost(vec![1.0, 1.0]).unwrap();
        let (a, trace) = greedy(&f, &c, 2.0).unwrap();
        assert_eq!(a, vec![0]);
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.status, Status::Covered);
    }

    #[test]
    fn zero_threshold_selects_nothing() {
        let f = ModularBenefit::new(vec![2.0, 1.0]);
        let c = modular_cost(vec![1.0, 1.0]).unwrap();
        let (a, trace) = greedy(&f, &c, 0.0).unwrap();
        assert!(a.is_empty());
        assert_eq!(trace.status, Status::Covered);
    }

    #[test]
    fn set_cover_tie_breaks_by_id() {
        let f = set_cover();
        let c = modular_cost(vec![1.0; 4]).unwrap();
        let (a, trace) = greedy(&f, &c, 6.0).unwrap();
        assert_eq!(a, vec![0, 1, 2]);
        assert_eq!(c.eval(&a), 3.0);
        let gains: Vec<f64> = trace.iterations.iter().map(|it| it.gain).collect();
        assert_eq!(gains, vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn exhausted_ground_set_is_flagged() {
        let f = ModularBenefit::new(vec![1.0, 1.0]);
        let c = modular_cost(vec![1.0, 1.0]).unwrap();
        let (a, trace) = greedy(&f, &c, 5.0).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(trace.status, Status::ExhaustedGroundSet);
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = ModularBenefit::new(vec![1.0, 1.0]);
        let c = modular_cost(vec![1.0, 1.0]).unwrap();
        assert!(greedy(&f, &c, -1.0).is_err());
        assert!(greedy(&f, &modular_cost(vec![1.0]).unwrap(), 1.0).is_err());
        assert!(greedy_early_exit(&f, &c, 1.0, 0.0).is_err());
        assert!(run_translated(&f, &c, 1.0, 1.0).is_err());
    }

    #[test]
    fn early_exit_variants() {
        let f = set_cover();
        let c = modular_cost(vec![1.0; 4]).unwrap();
        let (plain, _) = greedy(&f, &c, 6.0).unwrap();
        let (a, t) = greedy_early_exit(&f, &c, 6.0, 0.5).unwrap();
        assert_eq!(a, plain);
        assert_eq!(t.status, Status::Covered);
        let (a, t) = greedy_early_exit(&f, &c, 6.0, 3.0).unwrap();
        assert!(a.is_empty());
        assert_eq!(t.status, Status::EarlyExit);
        let (a, t) = greedy_early_exit(&f, &c, 6.0, 1.5).unwrap();
        assert_eq!(a, vec![0, 1]);
        assert_eq!(t.status, Status::EarlyExit);
    }

    #[test]
    fn translated_threshold() {
        let f = ModularBenefit::new(vec![2.0, 1.5, 1.0, 0.5]);
        let c = modular_cost(vec![1.0; 4]).unwrap();
        assert_eq!(run_translated(&f, &c, 3.0, 0.0).unwrap(), greedy(&f, &c, 3.0).unwrap());
        let (a, t) = run_translated(&f, &c, 5.0, 0.5).unwrap();
        assert!(f.query(&a) >= 4.5);
        assert_eq!(t.tau, 4.5);
    }

    #[test]
    fn lazy_matches_scan_on_submodular_oracle() {
        let f = WeightedCoverage::new(
            vec![vec![0, 1, 2], vec![2, 3], vec![3, 4, 5, 6], vec![0, 6], vec![7], vec![1, 7, 8]],
            vec![1.0, 2.0, 0.5, 1.5, 3.0, 0.25, 1.0, 2.5, 0.75],
        )
        .unwrap();
        let c = modular_cost(vec![1.0, 0.7, 1.9, 1.2, 0.4, 1.1]).unwrap();
        let lazy = GreedyOptions { lazy: true, ..Default::default() };
        for tau in [1.0, 4.0, 8.0, 12.5] {
            assert_eq!(greedy_with(&f, &c, tau, &lazy).unwrap(), greedy(&f, &c, tau).unwrap());
        }
        let not_declared = crate::oracle::FnOracle::new(2, |s: &[usize]| s.len() as f64);
        let c2 = modular_cost(vec![1.0, 1.0]).unwrap();
        assert!(greedy_with(&not_declared, &c2, 1.0, &lazy).is_err());
    }

    #[test]
    fn trace_csv_uses_original_ids() {
        let f = ModularBenefit::new(vec![2.0, 1.0]);
        let c = modular_cost(vec![1.0, 0.5]).unwrap();
        let (_, trace) = greedy(&f, &c, 3.0).unwrap();
        let csv = trace.to_csv(Some(&[10, 20]));
        assert_eq!(csv, "iter,element_original_id,gain,cost,F_before,F_after\n1,10,2,1,0,2\n2,20,1,0.5,2,3\n");
    }
}
