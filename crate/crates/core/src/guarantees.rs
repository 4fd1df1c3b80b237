//! Instance-specific approximation-ratio certificates for greedy runs under an `ε`-approximate
//! oracle.
//!
//! Both certificates need `μ > 4ε·c_max·ρ / c_min`, where `μ` is the smallest per-iteration gain
//! of `f_τ` along the trace. The first uses `ρ / (1 − 4εc_maxρ/(c_min μ)) · (ln(α/β) + 2)`. The
//! second trades `β` for a free parameter `γ`:
//! `ρ / (1 − 4εc_maxρ/(c_min μ) − γ) · (ln(nαρ/(γμ)) + 2)`. The second can be bounded from the
//! surrogate oracle alone, since it needs only an upper bound on `α` and a lower bound on `μ`.

use crate::error::{param, Error, Result};
use crate::greedy::GreedyTrace;
use crate::oracle::Oracle;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatsMode {
    /// Computed by querying the true function `f`.
    Exact,
    /// Bounded from the surrogate `F` and its error `ε`.
    Bounds,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceStats {
    pub mode: StatsMode,
    /// `α` (exact) or an upper bound on it.
    pub alpha: f64,
    /// `μ` (exact) or a lower bound on it.
    pub mu: f64,
    /// `β`; only available in exact mode.
    pub beta: Option<f64>,
    pub n: usize,
}

impl TraceStats {
    /// Bounds whose `μ` lower bound is not positive cannot support any certificate.
    pub fn usable(&self) -> bool {
        self.mu > 0.0
    }
}

/// `α = max_x f({x})`, `μ = min_i f_τ(A_i) − f_τ(A_{i−1})`, and `β` the smallest strictly positive
/// `Δf_τ(A_i, x)` over `i ∈ 0..=k`, `x ∈ S`.
pub fn trace_stats_exact<O: Oracle>(f: &O, trace: &GreedyTrace) -> Result<TraceStats> {
    if trace.is_empty() {
        return param("trace has no iterations");
    }
    let n = f.ground_set_size();
    let tau = trace.tau;
    let ft = |set: &[usize]| f.query(set).min(tau);
    let all: Vec<usize> = (0..n).collect();

    let alpha = f.extend_values(&[], &all, Default::default()).into_iter().fold(f64::NEG_INFINITY, f64::max);

    let mut prev = ft(&[]);
    let mut mu = f64::INFINITY;
    for i in 1..=trace.len() {
        let cur = ft(&trace.prefix(i));
        mu = mu.min(cur - prev);
        prev = cur;
    }

    let mut beta = f64::INFINITY;
    for i in 0..=trace.len() {
        let base = trace.prefix(i);
        let base_value = ft(&base);
        let candidates: Vec<usize> = all.iter().copied().filter(|x| !base.contains(x)).collect();
        for v in f.extend_values(&base, &candidates, Default::default()) {
            let gain = v.min(tau) - base_value;
            if gain > 0.0 {
                beta = beta.min(gain);
            }
        }
    }
    if beta.is_infinite() {
        return Err(Error::Degenerate("no strictly positive marginal gain; β undefined".into()));
    }
    Ok(TraceStats { mode: StatsMode::Exact, alpha, mu, beta: Some(beta), n })
}

/// `α ≤ max_x F({x}) + ε` and `μ ≥ min_i [F_τ(A_i) − F_τ(A_{i−1})] − 2ε`, from the trace and the
/// surrogate alone. No bound on `β` is attempted.
pub fn trace_stats_bounds<O: Oracle>(big_f: &O, trace: &GreedyTrace, eps: f64) -> Result<TraceStats> {
    if trace.is_empty() {
        return param("trace has no iterations");
    }
    if !(eps >= 0.0) {
        return param(format!("eps = {eps} must be non-negative"));
    }
    let n = big_f.ground_set_size();
    let all: Vec<usize> = (0..n).collect();
    let alpha_ub =
        big_f.extend_values(&[], &all, Default::default()).into_iter().fold(f64::NEG_INFINITY, f64::max) + eps;
    let min_gain = trace.iterations.iter().map(|it| it.gain).fold(f64::INFINITY, f64::min);
    Ok(TraceStats { mode: StatsMode::Bounds, alpha: alpha_ub, mu: min_gain - 2.0 * eps, beta: None, n })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theorem {
    /// Ratio in `α / β`.
    BetaRatio,
    /// Ratio with free parameter `γ`.
    GammaRatio,
}

impl Theorem {
    pub fn number(self) -> u8 {
        match self {
            Theorem::BetaRatio => 1,
            Theorem::GammaRatio => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificateInputs {
    pub eps: f64,
    pub rho: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub mu: f64,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub n: Option<usize>,
}

/// A ratio bound together with everything it was computed from. Invalid certificates carry no
/// value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioCertificate {
    pub theorem: Theorem,
    pub inputs: CertificateInputs,
    value: Option<f64>,
}

impl RatioCertificate {
    pub fn valid(&self) -> bool {
        self.value.is_some()
    }

    pub fn value(&self) -> Option<f64> {
        self.value
    }

    pub fn gamma_star(&self) -> Option<f64> {
        match self.theorem {
            Theorem::GammaRatio if self.valid() => self.inputs.gamma,
            _ => None,
        }
    }
}

/// `4ε·c_max·ρ / c_min`; `μ` must exceed it.
pub fn mu_threshold(eps: f64, rho: f64, c_min: f64, c_max: f64) -> f64 {
    4.0 * eps * c_max * rho / c_min
}

fn error_fraction(inputs: &CertificateInputs) -> f64 {
    4.0 * inputs.eps * inputs.c_max * inputs.rho / (inputs.c_min * inputs.mu)
}

pub fn ratio_thm1(eps: f64, rho: f64, c_min: f64, c_max: f64, mu: f64, alpha: f64, beta: f64) -> RatioCertificate {
    let inputs = CertificateInputs { eps, rho, c_min, c_max, mu, alpha, beta: Some(beta), gamma: None, n: None };
    let well_formed = eps >= 0.0 && rho >= 1.0 && c_min > 0.0 && c_max >= c_min && alpha > 0.0 && beta > 0.0;
    let valid = well_formed && mu > mu_threshold(eps, rho, c_min, c_max);
    let value = valid.then(|| rho / (1.0 - error_fraction(&inputs)) * ((alpha / beta).ln() + 2.0));
    RatioCertificate { theorem: Theorem::BetaRatio, inputs, value }
}

#[allow(clippy::too_many_arguments)]
pub fn ratio_thm2(
    eps: f64,
    rho: f64,
    c_min: f64,
    c_max: f64,
    mu: f64,
    alpha: f64,
    n: usize,
    gamma: f64,
) -> RatioCertificate {
    let inputs = CertificateInputs { eps, rho, c_min, c_max, mu, alpha, beta: None, gamma: Some(gamma), n: Some(n) };
    let well_formed = eps >= 0.0 && rho >= 1.0 && c_min > 0.0 && c_max >= c_min && alpha > 0.0 && n >= 1;
    let valid = well_formed
        && mu > mu_threshold(eps, rho, c_min, c_max)
        && gamma > 0.0
        && gamma < 1.0 - error_fraction(&inputs);
    let value = valid.then(|| {
        let scale = rho / (1.0 - error_fraction(&inputs) - gamma);
        scale * ((n as f64 * alpha * rho / (gamma * mu)).ln() + 2.0)
    });
    RatioCertificate { theorem: Theorem::GammaRatio, inputs, value }
}

/// `{0.01, 0.02, …, 0.99}`.
pub fn default_gamma_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

/// Evenly spaced grid `step, 2·step, …` strictly inside `(0, 1)`.
pub fn gamma_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step < 1.0) {
        return param(format!("gamma step {step} outside (0, 1)"));
    }
    let count = (1.0 / step).ceil() as usize;
    Ok((1..count).map(|i| i as f64 * step).filter(|g| *g < 1.0).collect())
}

/// The grid point with the smallest valid second-form ratio; smaller `γ` on ties. Returns an
/// invalid certificate when no grid point is valid.
#[allow(clippy::too_many_arguments)]
pub fn best_gamma(
    eps: f64,
    rho: f64,
    c_min: f64,
    c_max: f64,
    mu: f64,
    alpha: f64,
    n: usize,
    grid: &[f64],
) -> RatioCertificate {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best: Option<RatioCertificate> = None;
    for &g in &sorted {
        let cert = ratio_thm2(eps, rho, c_min, c_max, mu, alpha, n, g);
        if let Some(v) = cert.value() {
            if best.is_none_or(|b| v < b.value().unwrap()) {
                best = Some(cert);
            }
        }
    }
    best.unwrap_or_else(|| {
        let mut invalid = ratio_thm2(eps, rho, c_min, c_max, mu, alpha, n, f64::NAN);
        invalid.inputs.gamma = None;
        invalid
    })
}

/// Expected-influence oracle of the clique instance, in closed form.
///
/// Vertices `0..n−2` form a clique with certain edges, vertex `n−2` hangs off the clique by an
/// edge that is alive with probability `σ`, and vertex `n−1` is isolated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IncomparabilityOracle {
    n: usize,
    sigma: f64,
}

impl IncomparabilityOracle {
    pub fn attached(&self) -> usize {
        self.n - 2
    }

    pub fn isolated(&self) -> usize {
        self.n - 1
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Oracle for IncomparabilityOracle {
    fn ground_set_size(&self) -> usize {
        self.n
    }

    fn query(&self, set: &[usize]) -> f64 {
        let clique = (self.n - 2) as f64;
        let has_clique = set.iter().any(|&x| x < self.n - 2);
        let has_attached = set.contains(&self.attached());
        let has_isolated = set.contains(&self.isolated());
        let mut value = match (has_clique, has_attached) {
            (true, true) => clique + 1.0,
            (true, false) => clique + self.sigma,
            (false, true) => 1.0 + self.sigma * clique,
            (false, false) => 0.0,
        };
        if has_isolated {
            value += 1.0;
        }
        value
    }

    fn declares_submodular(&self) -> bool {
        true
    }
}

pub struct IncomparabilityInstance {
    pub oracle: IncomparabilityOracle,
    pub cost: crate::cost::Modular,
    pub tau: f64,
}

/// Clique instance with cardinality cost and `τ = n − 1 + σ`.
pub fn make_incomparability_instance(n: usize, sigma: f64) -> Result<IncomparabilityInstance> {
    if n < 3 {
        return param(format!("n = {n} must be at least 3"));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return param(format!("sigma = {sigma} outside (0, 1)"));
    }
    Ok(IncomparabilityInstance {
        oracle: IncomparabilityOracle { n, sigma },
        cost: crate::cost::modular_cost(vec![1.0; n])?,
        tau: n as f64 - 1.0 + sigma,
    })
}

/// The two ratios of the clique instance: `ln((n−2+σ)/(1−σ)) + 2` and
/// `ln(n(n−2+σ)/γ) / (1−γ) + 2`.
pub fn incomparability_ratios(n: usize, sigma: f64, gamma: f64) -> (f64, f64) {
    let n_f = n as f64;
    let r1 = ((n_f - 2.0 + sigma) / (1.0 - sigma)).ln() + 2.0;
    let r2 = (n_f * (n_f - 2.0 + sigma) / gamma).ln() / (1.0 - gamma) + 2.0;
    (r1, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::modular_cost;
    use crate::greedy::greedy;
    use crate::oracle::{ModularBenefit, WeightedCoverage};

    #[test]
    fn thm1_unit_reduction() {
        let c = ratio_thm1(0.0, 1.0, 1.0, 1.0, 1.0, std::f64::consts::E, 1.0);
        assert_eq!(c.value(), Some(3.0));
    }

    #[test]
    fn thm1_incomparability_value() {
        let c = ratio_thm1(0.0, 1.0, 1.0, 1.0, 1.0, 8.5, 0.5);
        assert!((c.value().unwrap() - 4.833_213_344_056_216).abs() < 1e-12);
    }

    #[test]
    fn thm1_threshold_is_strict() {
        // 4 · 0.25 · 2 · 1 / 1 = 2.
        assert!(!ratio_thm1(0.25, 1.0, 1.0, 2.0, 2.0, 5.0, 1.0).valid());
        assert!(ratio_thm1(0.25, 1.0, 1.0, 2.0, 2.0 + 1e-9, 5.0, 1.0).valid());
        assert_eq!(ratio_thm1(0.25, 1.0, 1.0, 2.0, 2.0, 5.0, 1.0).value(), None);
    }

    #[test]
    fn thm2_reference_value() {
        let c = ratio_thm2(0.0, 1.0, 1.0, 1.0, 1.0, 8.5, 10, 0.5);
        assert!((c.value().unwrap() - 14.271_596_874_100_524).abs() < 1e-12);
    }

    #[test]
    fn thm2_blows_up_at_both_ends() {
        let at = |g| ratio_thm2(0.0, 1.0, 1.0, 1.0, 1.0, 8.5, 10, g).value().unwrap();
        assert!(at(1e-9) > at(1e-6) && at(1e-6) > at(1e-3));
        assert!(at(1.0 - 1e-9) > at(1.0 - 1e-6) && at(1.0 - 1e-6) > at(1.0 - 1e-3));
        // Upper end with error term: interval is (0, 1 − 4·0.1·1·1/(1·2)) = (0, 0.8).
        let near = |g| ratio_thm2(0.1, 1.0, 1.0, 1.0, 2.0, 8.5, 10, g);
        assert!(near(0.8 - 1e-9).value().unwrap() > near(0.79).value().unwrap());
        assert!(!near(0.8).valid());
        assert!(!near(0.0).valid());
        assert!(!near(1.2).valid());
    }

    #[test]
    fn best_gamma_degenerate_grids() {
        // Threshold 4·0.24·1·1/1 = 0.96 < μ = 1, so the interval is (0, 0.04).
        let c = best_gamma(0.24, 1.0, 1.0, 1.0, 1.0, 5.0, 10, &default_gamma_grid());
        assert_eq!(c.gamma_star(), Some(0.01));
        let single = best_gamma(0.24, 1.0, 1.0, 1.0, 1.0, 5.0, 10, &[0.03, 0.5, 0.9]);
        assert_eq!(single.gamma_star(), Some(0.03));
        let empty = best_gamma(0.2499, 1.0, 1.0, 1.0, 1.0, 5.0, 10, &default_gamma_grid());
        assert!(!empty.valid());
        assert_eq!(empty.gamma_star(), None);
    }

    #[test]
    fn gamma_grid_spacing() {
        let g = gamma_grid(0.25).unwrap();
        assert_eq!(g, vec![0.25, 0.5, 0.75]);
        assert_eq!(default_gamma_grid().len(), 99);
        assert!(gamma_grid(0.0).is_err());
    }

    #[test]
    fn incomparability_identities() {
        let inst = make_incomparability_instance(10, 0.5).unwrap();
        let (a, trace) = greedy(&inst.oracle, &inst.cost, inst.tau).unwrap();
        assert_eq!(a, vec![0, 9]);
        let stats = trace_stats_exact(&inst.oracle, &trace).unwrap();
        assert_eq!((stats.alpha, stats.mu, stats.beta), (8.5, 1.0, Some(0.5)));
        let (r1, _) = incomparability_ratios(10, 0.5, 0.5);
        let c = ratio_thm1(0.0, 1.0, 1.0, 1.0, stats.mu, stats.alpha, stats.beta.unwrap());
        assert_eq!(c.value().unwrap(), r1);
        assert!(make_incomparability_instance(2, 0.5).is_err());
        assert!(make_incomparability_instance(5, 1.0).is_err());
    }

    #[test]
    fn bounds_collapse_to_exact_without_noise() {
        let f = WeightedCoverage::unweighted(vec![vec![0, 1, 2], vec![3, 4], vec![4, 5], vec![0, 3]], 6).unwrap();
        let c = modular_cost(vec![1.0; 4]).unwrap();
        let (_, trace) = greedy(&f, &c, 6.0).unwrap();
        let exact = trace_stats_exact(&f, &trace).unwrap();
        let bounds = trace_stats_bounds(&f, &trace, 0.0).unwrap();
        assert_eq!(bounds.alpha, exact.alpha);
        assert_eq!(bounds.mu, exact.mu);
        assert_eq!(bounds.beta, None);
        assert!(!trace_stats_bounds(&f, &trace, 0.5).unwrap().usable());
    }

    #[test]
    fn beta_matches_independent_double_loop() {
        let f = WeightedCoverage::unweighted(vec![vec![0, 1, 2], vec![3, 4], vec![4, 5], vec![0, 3]], 6).unwrap();
        let c = modular_cost(vec![1.0; 4]).unwrap();
        let (_, trace) = greedy(&f, &c, 6.0).unwrap();
        let stats = trace_stats_exact(&f, &trace).unwrap();
        let mut beta = f64::INFINITY;
        for i in 0..=trace.len() {
            let a = trace.prefix(i);
            for x in 0..4 {
                let mut ax = a.clone();
                if !ax.contains(&x) {
                    ax.push(x);
                }
                let gain = f.query(&ax).min(6.0) - f.query(&a).min(6.0);
                if gain > 0.0 && gain < beta {
                    beta = gain;
                }
            }
        }
        assert_eq!(stats.beta, Some(beta));
        assert_eq!(beta, 1.0);
    }

    #[test]
    fn stats_errors() {
        let f = ModularBenefit::new(vec![1.0, 2.0]);
        let c = modular_cost(vec![1.0, 1.0]).unwrap();
        let (_, empty) = greedy(&f, &c, 0.0).unwrap();
        assert!(trace_stats_exact(&f, &empty).is_err());
        let zero = ModularBenefit::new(vec![0.0, 0.0]);
        let (_, t) = greedy(&zero, &c, 1.0).unwrap();
        assert!(matches!(trace_stats_exact(&zero, &t), Err(Error::Degenerate(_))));
    }
}
