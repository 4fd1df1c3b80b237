//! Randomized soundness suite on instances small enough for exhaustive optima.
//!
//! Benefit functions are weighted coverage with weights in multiples of 1/8 and error bounds in
//! multiples of 1/1024, so feasibility is checked in exact arithmetic.

use std::fmt;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scsc_core::bruteforce::{optimal_cover, Cover};
use scsc_core::cost::{concave_cardinality_cost, curvature_bruteforce, modular_cost, sample_normal_costs, CostModel};
use scsc_core::greedy::{greedy, greedy_early_exit, GreedyTrace, Status};
use scsc_core::guarantees::{
    best_gamma, default_gamma_grid, ratio_thm1, ratio_thm2, trace_stats_bounds, trace_stats_exact, RatioCertificate,
};
use scsc_core::oracle::{noisy_oracle, NoiseMode, Oracle, WeightedCoverage};

#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub instances: usize,
    pub max_n: usize,
    pub seed: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { instances: 200, max_n: 12, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Tally {
    pub checked: usize,
    pub violations: usize,
}

impl Tally {
    fn check(&mut self, ok: bool) {
        self.checked += 1;
        self.violations += usize::from(!ok);
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteReport {
    pub instances: usize,
    /// Greedy runs, exact and noisy.
    pub runs: usize,
    pub concave_instances: usize,
    pub noisy_runs: usize,
    /// Valid first-form certificates from exact statistics.
    pub thm1: Tally,
    /// Valid second-form certificates from exact statistics.
    pub thm2_exact: Tally,
    /// Valid second-form certificates from `F`-only bounds.
    pub thm2_bounds: Tally,
    /// Valid first-form certificates on runs with `ε > 0`.
    pub thm1_noisy: Tally,
    /// `f(A) ≥ τ − ε` on covered runs.
    pub feasibility: Tally,
    /// `f(A) ≥ τ − n((c_max/c_min)μ* + 2ε)` on early-exit runs.
    pub early_exit: Tally,
    /// Largest observed `c(A) / (value · c(A*))` over valid certificates.
    pub worst_slack: f64,
}

impl SuiteReport {
    pub fn violations(&self) -> usize {
        [self.thm1, self.thm2_exact, self.thm2_bounds, self.feasibility, self.early_exit]
            .iter()
            .map(|t| t.violations)
            .sum()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "instances: {} ({} concave cost), greedy runs: {} ({} noisy)",
            self.instances, self.concave_instances, self.runs, self.noisy_runs
        )?;
        let line = |f: &mut fmt::Formatter<'_>, name: &str, t: Tally| {
            writeln!(f, "{name}: {} checked, {} violations", t.checked, t.violations)
        };
        line(f, "ratio1 (exact stats)", self.thm1)?;
        line(f, "ratio1 with eps > 0", self.thm1_noisy)?;
        line(f, "ratio2 (exact stats)", self.thm2_exact)?;
        line(f, "ratio2 (F-only bounds)", self.thm2_bounds)?;
        line(f, "feasibility f(A) >= tau - eps", self.feasibility)?;
        line(f, "early-exit feasibility", self.early_exit)?;
        write!(f, "worst c(A) / (ratio * c*): {}", self.worst_slack)
    }
}

struct Instance {
    f: WeightedCoverage,
    cost: Box<dyn CostModel>,
    rho: f64,
    tau: f64,
    c_star: f64,
}

fn random_instance(rng: &mut ChaCha8Rng, max_n: usize, concave: bool) -> Result<Option<Instance>> {
    let n = rng.random_range(3..=max_n.max(3));
    let universe = rng.random_range(n..=2 * n + 4);
    let sets: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            let size = rng.random_range(1..=4.min(universe));
            (0..size).map(|_| rng.random_range(0..universe)).collect()
        })
        .collect();
    let weights: Vec<f64> = (0..universe).map(|_| rng.random_range(1..=16) as f64 / 8.0).collect();
    let f = WeightedCoverage::new(sets, weights)?;
    let base = sample_normal_costs(n, 1.0, 0.1, rng.random())?;
    let cost: Box<dyn CostModel> =
        if concave { Box::new(concave_cardinality_cost(base, 0.5)?) } else { Box::new(modular_cost(base)?) };
    let rho = curvature_bruteforce(&cost)?;
    let all: Vec<usize> = (0..n).collect();
    let tau = f.query(&all) * rng.random_range(2..=8) as f64 / 8.0;
    let c_star = match optimal_cover(&f, &cost, tau)? {
        Cover::Optimal { cost, .. } if cost > 0.0 => cost,
        _ => return Ok(None),
    };
    Ok(Some(Instance { f, cost, rho, tau, c_star }))
}

fn dyadic_floor(x: f64) -> f64 {
    (x * 1024.0).floor() / 1024.0
}

impl SuiteReport {
    fn certify(&mut self, tally: Tally, cert: &RatioCertificate, cost_a: f64, c_star: f64) -> Tally {
        let mut tally = tally;
        if let Some(v) = cert.value() {
            tally.check(cost_a <= v * c_star);
            self.worst_slack = self.worst_slack.max(cost_a / (v * c_star));
        }
        tally
    }

    fn record(&mut self, inst: &Instance, big_f: &dyn Oracle, eps: f64, a: &[usize], trace: &GreedyTrace) {
        self.runs += 1;
        self.noisy_runs += usize::from(eps > 0.0);
        if trace.status != Status::Covered {
            return;
        }
        let f = &inst.f;
        self.feasibility.check(f.query(a) >= inst.tau - eps);
        if trace.is_empty() {
            return;
        }
        let (c_min, c_max) = (inst.cost.c_min(), inst.cost.c_max());
        let n = f.ground_set_size();
        let cost_a = inst.cost.eval(a);
        if let Ok(s) = trace_stats_exact(f, trace) {
            let c1 = ratio_thm1(eps, inst.rho, c_min, c_max, s.mu, s.alpha, s.beta.unwrap());
            self.thm1 = self.certify(self.thm1, &c1, cost_a, inst.c_star);
            if eps > 0.0 {
                self.thm1_noisy = self.certify(self.thm1_noisy, &c1, cost_a, inst.c_star);
            }
            for gamma in [0.05, 0.25, 0.5] {
                let c2 = ratio_thm2(eps, inst.rho, c_min, c_max, s.mu, s.alpha, n, gamma);
                self.thm2_exact = self.certify(self.thm2_exact, &c2, cost_a, inst.c_star);
            }
        }
        if let Ok(b) = trace_stats_bounds(&big_f, trace, eps) {
            let c2 = best_gamma(eps, inst.rho, c_min, c_max, b.mu, b.alpha, n, &default_gamma_grid());
            self.thm2_bounds = self.certify(self.thm2_bounds, &c2, cost_a, inst.c_star);
        }
    }
}

/// Runs the suite. Each instance alternates modular and concave (`p = 0.5`) costs and is solved with
/// the exact oracle and with noisy oracles at error levels that keep the certificate condition
/// satisfiable.
pub fn run_suite(opts: SuiteOptions) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = SuiteReport::default();
    while report.instances < opts.instances {
        let concave = report.instances % 2 == 1;
        let Some(inst) = random_instance(&mut rng, opts.max_n, concave)? else { continue };
        report.instances += 1;
        report.concave_instances += usize::from(concave);

        let (a, trace) = greedy(&inst.f, &inst.cost, inst.tau)?;
        report.record(&inst, &inst.f, 0.0, &a, &trace);
        let mu0 = trace.iterations.iter().map(|it| it.gain).fold(f64::INFINITY, f64::min);
        if !mu0.is_finite() {
            continue;
        }
        let (c_min, c_max) = (inst.cost.c_min(), inst.cost.c_max());
        let eps_limit = mu0 * c_min / (4.0 * c_max * inst.rho);
        for frac in [0.1, 0.4, 0.8] {
            let eps = dyadic_floor(frac * eps_limit);
            if eps == 0.0 {
                continue;
            }
            for mode in [NoiseMode::Uniform, NoiseMode::AdversarialAlternating] {
                let big_f = noisy_oracle(&inst.f, eps, rng.random(), mode);
                let (a, trace) = greedy(&big_f, &inst.cost, inst.tau)?;
                report.record(&inst, &big_f, eps, &a, &trace);

                let mu_star = 4.0 * eps * c_max / c_min + 0.01;
                let (a, _) = greedy_early_exit(&big_f, &inst.cost, inst.tau, mu_star)?;
                let n = inst.f.ground_set_size() as f64;
                let slack = n * ((c_max / c_min) * mu_star + 2.0 * eps);
                report.early_exit.check(inst.f.query(&a) >= inst.tau - slack);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_is_clean_and_repeatable() {
        let opts = SuiteOptions { instances: 20, max_n: 8, seed: 5 };
        let a = run_suite(opts).unwrap();
        assert_eq!(a.violations(), 0, "{a}");
        assert!(a.thm1.checked > 0 && a.feasibility.checked > 0);
        assert_eq!(a, run_suite(opts).unwrap());
    }
}
