use proptest::prelude::*;
use proptest::strategy::ValueTree;
use scsc_core::bruteforce::optimal_cover;
use scsc_core::cost::{modular_cost, CostModel};
use scsc_core::greedy::{greedy, greedy_early_exit, greedy_with, run_translated, GreedyOptions, Status};
use scsc_core::oracle::{noisy_oracle, FnOracle, ModularBenefit, NoiseMode, Oracle, WeightedCoverage};
use scsc_core::Exec;

/// Coverage instance with weights that are multiples of 1/8, so every value is exact in `f64`.
fn coverage() -> impl Strategy<Value = WeightedCoverage> {
    (4usize..=16, 1usize..=10).prop_flat_map(|(universe, n)| {
        (
            prop::collection::vec(prop::collection::vec(0..universe, 0..=4), n),
            prop::collection::vec(1u32..=16, universe),
        )
            .prop_map(|(sets, w)| WeightedCoverage::new(sets, w.into_iter().map(|x| x as f64 / 8.0).collect()).unwrap())
    })
}

fn costs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(1u32..=8, n).prop_map(|v| v.into_iter().map(|x| x as f64 / 4.0).collect())
}

fn instance() -> impl Strategy<Value = (WeightedCoverage, Vec<f64>, u32)> {
    coverage().prop_flat_map(|f| {
        let n = f.ground_set_size();
        (Just(f), costs(n), 1u32..=8)
    })
}

fn all(n: usize) -> Vec<usize> {
    (0..n).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trace_is_consistent_and_deterministic((f, c, frac) in instance()) {
        let c = modular_cost(c).unwrap();
        let tau = f.query(&all(f.ground_set_size())) * frac as f64 / 8.0;
        let (a, trace) = greedy(&f, &c, tau).unwrap();
        prop_assert_eq!(&a, &trace.selected());
        let mut seen = a.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), a.len());
        for (i, it) in trace.iterations.iter().enumerate() {
            prop_assert_eq!(it.value_after, f.query(&trace.prefix(i + 1)).min(tau));
            prop_assert_eq!(it.value_before, f.query(&trace.prefix(i)).min(tau));
        }
        prop_assert_eq!(trace.status == Status::Covered, f.query(&a) >= tau);
        prop_assert_eq!(trace.status, Status::Covered);

        let again = greedy(&f, &c, tau).unwrap();
        prop_assert_eq!(&again.1, &trace);
        let seq = greedy_with(&f, &c, tau, &GreedyOptions { exec: Exec::Sequential, ..Default::default() }).unwrap();
        prop_assert_eq!(&seq.1, &trace);
        let lazy = greedy_with(&f, &c, tau, &GreedyOptions { lazy: true, ..Default::default() }).unwrap();
        prop_assert_eq!(&lazy.0, &a);
    }

    #[test]
    fn cost_scaling_keeps_selection((f, c, frac) in instance(), shift in -4i32..=10) {
        // Power-of-two factors keep every gain/cost ratio exact, so ties stay ties.
        let scale = 2f64.powi(shift);
        let tau = f.query(&all(f.ground_set_size())) * frac as f64 / 8.0;
        let base = greedy(&f, &modular_cost(c.clone()).unwrap(), tau).unwrap().0;
        let scaled = greedy(&f, &modular_cost(c.iter().map(|x| x * scale).collect()).unwrap(), tau).unwrap().0;
        prop_assert_eq!(base, scaled);
    }

    #[test]
    fn greedy_never_beats_brute_force((f, c, frac) in instance()) {
        let c = modular_cost(c).unwrap();
        let tau = f.query(&all(f.ground_set_size())) * frac as f64 / 8.0;
        let (a, _) = greedy(&f, &c, tau).unwrap();
        let best = optimal_cover(&f, &c, tau).unwrap().cost().unwrap();
        prop_assert!(c.eval(&a) >= best);
        let higher = optimal_cover(&f, &c, tau + 0.125).unwrap().cost();
        prop_assert!(higher.is_none_or(|h| h >= best));
    }

    #[test]
    fn covered_noisy_runs_are_feasible(
        (f, c, frac) in instance(),
        eps_sixteenths in 0u32..8,
        seed in any::<u64>(),
        adversarial in any::<bool>(),
    ) {
        let eps = eps_sixteenths as f64 / 16.0;
        let mode = if adversarial { NoiseMode::AdversarialAlternating } else { NoiseMode::Uniform };
        let big_f = noisy_oracle(&f, eps, seed, mode);
        let c = modular_cost(c).unwrap();
        let tau = f.query(&all(f.ground_set_size())) * frac as f64 / 8.0;
        let (a, trace) = greedy(&big_f, &c, tau).unwrap();
        if trace.status == Status::Covered {
            prop_assert!(f.query(&a) >= tau - eps, "f(A) = {} < {}", f.query(&a), tau - eps);
        }
    }

    #[test]
    fn translated_run_on_shifted_oracle((f, c, frac) in instance(), eps_sixteenths in 0u32..8) {
        let eps = eps_sixteenths as f64 / 16.0;
        let tau = f.query(&all(f.ground_set_size())) * frac as f64 / 8.0;
        prop_assume!(tau > eps);
        let shifted = FnOracle::new(f.ground_set_size(), |s: &[usize]| f.query(s) + eps).submodular();
        let c = modular_cost(c).unwrap();
        let (a, trace) = run_translated(&shifted, &c, tau, eps).unwrap();
        prop_assert_eq!(trace.tau, tau - eps);
        prop_assert!(f.query(&a) >= tau - 2.0 * eps);
        if eps == 0.0 {
            prop_assert_eq!(a, greedy(&f, &c, tau).unwrap().0);
        }
    }
}

#[test]
fn early_exit_slack_over_random_trials() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let strategy = (
        prop::collection::vec(1u32..=32, 8),
        prop::collection::vec(0.5f64..2.0, 8),
        1u32..=8,
        1u32..=8,
        any::<u64>(),
        any::<bool>(),
    );
    let mut early = 0;
    for _ in 0..500 {
        let (vals, costs, frac, eps16, seed, adversarial) = strategy.new_tree(&mut runner).unwrap().current();
        let f = ModularBenefit::new(vals.iter().map(|&v| v as f64 / 8.0).collect());
        let c = modular_cost(costs).unwrap();
        let eps = eps16 as f64 / 16.0;
        let ratio = c.c_max() / c.c_min();
        let mu_star = 4.0 * eps * ratio + 0.01;
        let tau = f.query(&all(8)) * frac as f64 / 8.0;
        let mode = if adversarial { NoiseMode::AdversarialAlternating } else { NoiseMode::Uniform };
        let big_f = noisy_oracle(&f, eps, seed, mode);
        let (a, trace) = greedy_early_exit(&big_f, &c, tau, mu_star).unwrap();
        early += usize::from(trace.status == Status::EarlyExit);
        let slack = 8.0 * (ratio * mu_star + 2.0 * eps);
        assert!(f.query(&a) >= tau - slack, "f(A) = {}, tau = {tau}, slack = {slack}", f.query(&a));
    }
    assert!(early > 0, "the exit rule never fired");
}

#[test]
fn early_exit_edge_cases() {
    let f = ModularBenefit::new(vec![2.0, 1.0, 0.5]);
    let c = modular_cost(vec![1.0; 3]).unwrap();
    let full = greedy(&f, &c, 3.5).unwrap();
    let never = greedy_early_exit(&f, &c, 3.5, 0.25).unwrap();
    assert_eq!(never.0, full.0);
    let immediate = greedy_early_exit(&f, &c, 3.5, 2.0).unwrap();
    assert!(immediate.0.is_empty());
    assert_eq!(immediate.1.status, Status::EarlyExit);
    assert!(greedy_early_exit(&f, &c, 3.5, 0.0).is_err());
}

#[test]
fn translated_exact_modular() {
    let f = ModularBenefit::new(vec![1.0, 1.5, 2.0, 0.5, 1.0]);
    let c = modular_cost(vec![1.0; 5]).unwrap();
    let (a, trace) = run_translated(&f, &c, 5.0, 0.5).unwrap();
    assert!(trace.final_value >= 4.5);
    assert!(f.query(&a) >= 4.0);
    assert!(run_translated(&f, &c, 0.5, 0.5).is_err());
}

#[test]
fn negative_gains_still_progress() {
    // Non-monotone surrogate: every addition after the first lowers the value until all are taken.
    let f = FnOracle::new(4, |s: &[usize]| match s.len() {
        0 => 0.0,
        4 => 10.0,
        k => 4.0 - k as f64,
    });
    let c = modular_cost(vec![1.0; 4]).unwrap();
    let (a, trace) = greedy(&f, &c, 5.0).unwrap();
    assert_eq!(a, vec![0, 1, 2, 3]);
    assert_eq!(trace.status, Status::Covered);
    assert!(trace.iterations[1].gain < 0.0);
}
