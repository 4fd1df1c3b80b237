//! The experiment grid: one greedy run per `(ε, τ)` with certificates for every `ρ`.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use scsc_core::cost::{
    concave_cardinality_cost, curvature_bruteforce, modular_cost, parse_costs, sample_normal_costs, CostModel,
    CURVATURE_LIMIT,
};
use scsc_core::graph::{load_edge_list, sample_realizations, weighted_cascade_probs, Graph, RealizationSet};
use scsc_core::greedy::{greedy_with, GreedyOptions, GreedyTrace, Status};
use scsc_core::guarantees::{
    best_gamma, gamma_grid, make_incomparability_instance, ratio_thm1, trace_stats_bounds, trace_stats_exact,
    IncomparabilityOracle, RatioCertificate, TraceStats,
};
use scsc_core::oracle::{
    noisy_oracle, rel_to_abs_eps, sketch_size_for, AverageReachability, NoiseMode, Oracle, ReachSketch,
};
use scsc_core::{rng, Exec};

use crate::config::{CostSpec, Dataset, ExperimentConfig, TauSpec};
use crate::sketch_cache::{cached_sketch, rank_seed};

pub const HEADER: [&str; 18] = [
    "dataset",
    "n",
    "eps_rel",
    "eps_abs",
    "rho",
    "tau",
    "iters",
    "cost_of_A",
    "f_of_A",
    "feasible",
    "ratio1_valid",
    "ratio1",
    "ratio2_valid",
    "ratio2_ub",
    "gamma_star",
    "mu_or_lb",
    "alpha_or_ub",
    "beta",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub dataset: String,
    pub n: usize,
    /// 0 for the exact-oracle baseline.
    pub eps_rel: f64,
    pub eps_abs: f64,
    pub rho: f64,
    pub tau: f64,
    pub iters: usize,
    pub cost_of_a: f64,
    pub f_of_a: f64,
    /// `f(A) ≥ τ − ε`.
    pub feasible: bool,
    pub ratio1: Option<RatioCertificate>,
    pub ratio2: Option<RatioCertificate>,
    /// Exact statistics behind the first ratio.
    pub stats1: Option<TraceStats>,
    /// Statistics behind the second ratio: exact for the baseline, `F`-only bounds otherwise.
    pub stats2: Option<TraceStats>,
    pub beta: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

impl Row {
    pub fn record(&self) -> Vec<String> {
        let valid = |c: &Option<RatioCertificate>| c.is_some_and(|c| c.valid()).to_string();
        vec![
            self.dataset.clone(),
            self.n.to_string(),
            self.eps_rel.to_string(),
            self.eps_abs.to_string(),
            self.rho.to_string(),
            self.tau.to_string(),
            self.iters.to_string(),
            self.cost_of_a.to_string(),
            self.f_of_a.to_string(),
            self.feasible.to_string(),
            valid(&self.ratio1),
            opt(self.ratio1.and_then(|c| c.value())),
            valid(&self.ratio2),
            opt(self.ratio2.and_then(|c| c.value())),
            opt(self.ratio2.and_then(|c| c.gamma_star())),
            opt(self.stats2.map(|s| s.mu)),
            opt(self.stats2.map(|s| s.alpha)),
            opt(self.beta),
        ]
    }
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush()?;
    Ok(())
}

pub fn build_cost(spec: &CostSpec, n: usize, seed: u64) -> Result<Box<dyn CostModel>> {
    let cost_seed = rng::mix64(seed ^ 0xC057);
    Ok(match spec {
        CostSpec::Unit => Box::new(modular_cost(vec![1.0; n])?),
        CostSpec::Normal { mean, sd } => Box::new(modular_cost(sample_normal_costs(n, *mean, *sd, cost_seed)?)?),
        CostSpec::File(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let costs = parse_costs(&text)?;
            if costs.len() != n {
                bail!("cost file has {} entries, ground set has {n}", costs.len());
            }
            Box::new(modular_cost(costs)?)
        }
        CostSpec::Concave { p, weights } => {
            let w = match weights {
                None => vec![1.0; n],
                Some((mean, sd)) => sample_normal_costs(n, *mean, *sd, cost_seed)?,
            };
            Box::new(concave_cardinality_cost(w, *p)?)
        }
    })
}

/// ρ from the cost model: declared, or by enumeration on small ground sets.
pub fn derive_rho(cost: &dyn CostModel) -> Result<f64> {
    if let Some(r) = cost.declared_curvature() {
        return Ok(r);
    }
    if cost.len() > CURVATURE_LIMIT {
        bail!("cost curvature is unknown for n = {} > {CURVATURE_LIMIT}; pass an explicit rho list", cost.len());
    }
    Ok(curvature_bruteforce(&cost)?)
}

pub fn load_graph(path: &Path, directed: bool, q: f64) -> Result<Graph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let graph = load_edge_list(&text, !directed).with_context(|| format!("parsing {}", path.display()))?;
    Ok(weighted_cascade_probs(graph, q)?)
}

/// Graph and live-edge instances for an edge-list dataset.
pub fn load_network(config: &ExperimentConfig) -> Result<(Graph, RealizationSet)> {
    let Dataset::EdgeList(path) = &config.dataset else {
        bail!("{} is not an edge-list dataset", config.dataset.name())
    };
    let graph = load_graph(path, config.directed, config.q)?;
    let realizations = sample_realizations(&graph, config.num_instances, config.seed)?;
    Ok((graph, realizations))
}

#[allow(clippy::large_enum_variant)]
enum Inputs {
    Network { graph: Graph, realizations: RealizationSet },
    Analytic(IncomparabilityOracle),
}

impl Inputs {
    fn load(config: &ExperimentConfig) -> Result<Inputs> {
        Ok(match &config.dataset {
            Dataset::EdgeList(_) => {
                let (graph, realizations) = load_network(config)?;
                Inputs::Network { graph, realizations }
            }
            Dataset::Incomparability { n, sigma } => {
                Inputs::Analytic(make_incomparability_instance(*n, *sigma)?.oracle)
            }
        })
    }

    fn exact(&self) -> Box<dyn Oracle + '_> {
        match self {
            Inputs::Network { graph, realizations } => Box::new(AverageReachability::new(graph, realizations)),
            Inputs::Analytic(f) => Box::new(*f),
        }
    }
}

/// Thresholds `f(A_1), f(A_2), …` from an exact greedy run toward `f(S)`, at most `max_steps` of them.
pub fn auto_taus(exact: &dyn Oracle, cost: &dyn CostModel, max_steps: usize) -> Result<Vec<f64>> {
    let all: Vec<usize> = (0..exact.ground_set_size()).collect();
    let top = exact.query(&all);
    let opts = GreedyOptions { max_iterations: Some(max_steps), ..Default::default() };
    let (_, trace) = greedy_with(&exact, &cost, top, &opts)?;
    let mut taus: Vec<f64> = trace.iterations.iter().map(|it| it.value_after).filter(|v| *v > 0.0).collect();
    taus.dedup();
    if taus.is_empty() {
        bail!("the exact greedy made no progress; no thresholds to sweep");
    }
    Ok(taus)
}

struct Grid<'a> {
    dataset: String,
    exact: &'a dyn Oracle,
    cost: &'a dyn CostModel,
    rhos: &'a [f64],
    grid: &'a [f64],
    exact_stats: bool,
}

impl Grid<'_> {
    /// One greedy run on `approx` and one row per `ρ`. `eps_rel = 0` marks the exact baseline.
    fn evaluate(&self, approx: &dyn Oracle, eps_rel: f64, tau: f64) -> Result<Vec<Row>> {
        Ok(self.run(approx, eps_rel, tau)?.rows)
    }

    fn run(&self, approx: &dyn Oracle, eps_rel: f64, tau: f64) -> Result<Solved> {
        let baseline = eps_rel == 0.0;
        let eps_abs = if baseline { 0.0 } else { rel_to_abs_eps(eps_rel, tau)? };
        let opts = GreedyOptions { exec: Exec::Sequential, ..Default::default() };
        let (a, trace) = greedy_with(&approx, &self.cost, tau, &opts)?;
        let f_of_a = self.exact.query(&a);
        let certifiable = trace.status == Status::Covered && !trace.is_empty();

        let exact =
            (certifiable && (baseline || self.exact_stats)).then(|| trace_stats_exact(&self.exact, &trace).ok());
        let exact = exact.flatten();
        let stats2 = if baseline {
            exact
        } else if certifiable {
            trace_stats_bounds(&approx, &trace, eps_abs).ok()
        } else {
            None
        };
        let (c_min, c_max) = (self.cost.c_min(), self.cost.c_max());
        let n = self.exact.ground_set_size();
        let rows = self
            .rhos
            .iter()
            .map(|&rho| Row {
                dataset: self.dataset.clone(),
                n,
                eps_rel,
                eps_abs,
                rho,
                tau,
                iters: trace.len(),
                cost_of_a: self.cost.eval(&a),
                f_of_a,
                feasible: f_of_a >= tau - eps_abs,
                ratio1: exact
                    .map(|s| ratio_thm1(eps_abs, rho, c_min, c_max, s.mu, s.alpha, s.beta.unwrap_or(f64::NAN))),
                ratio2: stats2.map(|s| best_gamma(eps_abs, rho, c_min, c_max, s.mu, s.alpha, n, self.grid)),
                stats1: exact,
                stats2,
                beta: exact.and_then(|s| s.beta),
            })
            .collect();
        Ok(Solved { selected: a, trace, rows, original_ids: Vec::new() })
    }
}

/// A single run: the selected set, its trace, one row per `ρ`, and original vertex ids.
#[derive(Clone, Debug)]
pub struct Solved {
    pub selected: Vec<usize>,
    pub trace: GreedyTrace,
    pub rows: Vec<Row>,
    pub original_ids: Vec<u64>,
}

/// One grid point: exact oracle when `eps_rel = 0`, the sketch or noisy oracle otherwise.
pub fn solve_once(config: &ExperimentConfig, eps_rel: f64, tau: f64) -> Result<Solved> {
    let inputs = Inputs::load(config)?;
    let exact = inputs.exact();
    let n = exact.ground_set_size();
    let cost = build_cost(&config.cost, n, config.seed)?;
    let rhos = match &config.rho {
        Some(r) => r.clone(),
        None => vec![derive_rho(cost.as_ref())?],
    };
    let grid = gamma_grid(config.gamma_step)?;
    let ctx = Grid {
        dataset: config.dataset.name(),
        exact: exact.as_ref(),
        cost: cost.as_ref(),
        rhos: &rhos,
        grid: &grid,
        exact_stats: config.exact_stats,
    };
    let sketch;
    let approx: Box<dyn Oracle + '_> = if eps_rel == 0.0 {
        Box::new(exact.as_ref())
    } else {
        match &inputs {
            Inputs::Network { graph, realizations } => {
                sketch = network_sketch(config, graph, realizations, eps_rel)?;
                Box::new(&sketch)
            }
            Inputs::Analytic(f) => {
                Box::new(noisy_oracle(*f, rel_to_abs_eps(eps_rel, tau)?, config.seed, NoiseMode::Uniform))
            }
        }
    };
    let mut solved = ctx.run(approx.as_ref(), eps_rel, tau)?;
    solved.original_ids = match &inputs {
        Inputs::Network { graph, .. } => graph.original_ids().to_vec(),
        Inputs::Analytic(_) => (0..n as u64).collect(),
    };
    Ok(solved)
}

fn network_sketch(
    config: &ExperimentConfig,
    graph: &Graph,
    realizations: &RealizationSet,
    eps_rel: f64,
) -> Result<ReachSketch> {
    let k = sketch_size_for(eps_rel, graph.num_vertices().max(2), config.c)?;
    cached_sketch(config.sketch_dir.as_deref(), graph, realizations, rank_seed(config.seed), k)
}

/// Runs the full grid. Rows are ordered by `(eps_rel, tau, rho)` with the baseline (`eps_rel = 0`) first.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<Row>> {
    config.validate()?;
    let inputs = Inputs::load(config)?;
    let exact = inputs.exact();
    let n = exact.ground_set_size();
    if n == 0 {
        bail!("dataset has no vertices");
    }
    let cost = build_cost(&config.cost, n, config.seed)?;
    let rhos = match &config.rho {
        Some(r) => r.clone(),
        None => vec![derive_rho(cost.as_ref())?],
    };
    let taus = match &config.tau {
        TauSpec::List(t) => t.clone(),
        TauSpec::Auto { max_steps } => auto_taus(exact.as_ref(), cost.as_ref(), *max_steps)?,
    };
    let grid = gamma_grid(config.gamma_step)?;
    let ctx = Grid {
        dataset: config.dataset.name(),
        exact: exact.as_ref(),
        cost: cost.as_ref(),
        rhos: &rhos,
        grid: &grid,
        exact_stats: config.exact_stats,
    };

    let sketches: Vec<Option<ReachSketch>> = match &inputs {
        Inputs::Network { graph, realizations } => config
            .eps_rel
            .iter()
            .map(|&e| network_sketch(config, graph, realizations, e).map(Some))
            .collect::<Result<_>>()?,
        Inputs::Analytic(_) => vec![None; config.eps_rel.len()],
    };

    // Grid point 0 per τ is the exact baseline; j ≥ 1 is eps_rel[j − 1].
    let points: Vec<(usize, f64)> =
        taus.iter().flat_map(|&t| (0..=config.eps_rel.len()).map(move |j| (j, t))).collect();
    let results = Exec::default().map_slice(&points, |&(j, tau)| -> Result<Vec<Row>> {
        if j == 0 {
            return ctx.evaluate(exact.as_ref(), 0.0, tau);
        }
        let eps_rel = config.eps_rel[j - 1];
        match (&sketches[j - 1], &inputs) {
            (Some(s), _) => ctx.evaluate(s, eps_rel, tau),
            (None, Inputs::Analytic(f)) => {
                let noisy = noisy_oracle(*f, rel_to_abs_eps(eps_rel, tau)?, config.seed, NoiseMode::Uniform);
                ctx.evaluate(&noisy, eps_rel, tau)
            }
            (None, Inputs::Network { .. }) => unreachable!("network datasets always carry sketches"),
        }
    });
    let mut rows: Vec<Row> = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    rows.sort_by(|a, b| a.eps_rel.total_cmp(&b.eps_rel).then(a.tau.total_cmp(&b.tau)).then(a.rho.total_cmp(&b.rho)));
    Ok(rows)
}
