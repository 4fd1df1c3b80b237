//! Experiment configuration: `key = value` text, overridable key by key from the command line.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Dataset {
    /// SNAP-style edge list.
    EdgeList(PathBuf),
    /// The analytic clique instance `incomparability(n, sigma)`.
    Incomparability { n: usize, sigma: f64 },
}

impl Dataset {
    pub fn name(&self) -> String {
        match self {
            Dataset::EdgeList(p) => {
                p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into())
            }
            Dataset::Incomparability { n, sigma } => format!("incomparability({n},{sigma})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CostSpec {
    Unit,
    Normal {
        mean: f64,
        sd: f64,
    },
    File(PathBuf),
    /// `(Σ w)^p` with unit weights, or with `Normal(mean, sd)` weights when given.
    Concave {
        p: f64,
        weights: Option<(f64, f64)>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum TauSpec {
    List(Vec<f64>),
    /// Thresholds taken from the exact-oracle greedy's values after each step.
    Auto {
        max_steps: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: Dataset,
    pub directed: bool,
    pub q: f64,
    pub num_instances: usize,
    pub seed: u64,
    pub eps_rel: Vec<f64>,
    pub c: f64,
    pub tau: TauSpec,
    pub cost: CostSpec,
    /// Curvature values for the certificates; `None` derives ρ from the cost model.
    pub rho: Option<Vec<f64>>,
    pub gamma_step: f64,
    /// Compute the first certificate from the exact oracle.
    pub exact_stats: bool,
    pub output: Option<PathBuf>,
    pub sketch_dir: Option<PathBuf>,
}

pub const KEYS: &[&str] = &[
    "dataset",
    "directed",
    "q",
    "N",
    "seed",
    "eps_rel",
    "c",
    "tau",
    "auto_tau_steps",
    "cost",
    "rho",
    "gamma_step",
    "exact_stats",
    "output",
    "sketch_dir",
];

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", idx + 1))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            bail!("line {}: unknown key {k:?}", idx + 1);
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn list(v: &str) -> Result<Vec<f64>> {
    let items: Vec<f64> = v
        .split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("not a number: {s:?}")))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        bail!("empty list");
    }
    Ok(items)
}

/// Arguments of `name(a, b, …)`, or `None` if `v` is not a call of `name`.
fn call_args<'a>(v: &'a str, name: &str) -> Option<Vec<&'a str>> {
    let rest = v.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')?;
    Some(rest.split(',').map(str::trim).collect())
}

fn numbers(args: &[&str]) -> Result<Vec<f64>> {
    args.iter().map(|a| a.parse::<f64>().with_context(|| format!("not a number: {a:?}"))).collect()
}

pub fn parse_dataset(v: &str) -> Result<Dataset> {
    if let Some(args) = call_args(v, "incomparability") {
        let [n, sigma] = args[..] else { bail!("incomparability takes (n, sigma)") };
        return Ok(Dataset::Incomparability { n: n.parse().context("n")?, sigma: sigma.parse().context("sigma")? });
    }
    Ok(Dataset::EdgeList(PathBuf::from(v)))
}

pub fn parse_cost(v: &str) -> Result<CostSpec> {
    if v == "unit" {
        return Ok(CostSpec::Unit);
    }
    if let Some(path) = v.strip_prefix("file:") {
        return Ok(CostSpec::File(PathBuf::from(path)));
    }
    if let Some(args) = call_args(v, "normal") {
        let [mean, sd] = numbers(&args)?[..] else { bail!("normal takes (mean, sd)") };
        return Ok(CostSpec::Normal { mean, sd });
    }
    if let Some(args) = call_args(v, "concave") {
        return match numbers(&args)?[..] {
            [p] => Ok(CostSpec::Concave { p, weights: None }),
            [p, mean, sd] => Ok(CostSpec::Concave { p, weights: Some((mean, sd)) }),
            _ => bail!("concave takes (p) or (p, mean, sd)"),
        };
    }
    bail!("unknown cost spec {v:?}; expected unit, normal(mean, sd), file:PATH, or concave(p[, mean, sd])")
}

fn parse_bool(v: &str) -> Result<bool> {
    match v {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => bail!("not a boolean: {v:?}"),
    }
}

impl ExperimentConfig {
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| pairs.get(k).map(String::as_str);
        let ctx = |k: &'static str| move || format!("invalid value for {k}");

        let dataset = parse_dataset(get("dataset").ok_or_else(|| anyhow!("dataset is required"))?)?;
        let directed = get("directed").map(parse_bool).transpose().with_context(ctx("directed"))?.unwrap_or(false);
        let q = get("q").map(str::parse).transpose().with_context(ctx("q"))?.unwrap_or(0.5);
        let num_instances = get("N").map(str::parse).transpose().with_context(ctx("N"))?.unwrap_or(1000);
        let seed = get("seed").map(str::parse).transpose().with_context(ctx("seed"))?.unwrap_or(0);
        let eps_rel = get("eps_rel").map(list).transpose().with_context(ctx("eps_rel"))?.unwrap_or_else(|| vec![0.1]);
        let c = get("c").map(str::parse).transpose().with_context(ctx("c"))?.unwrap_or(3.0);
        let auto_steps = get("auto_tau_steps").map(str::parse).transpose().with_context(ctx("auto_tau_steps"))?;
        let tau = match get("tau") {
            None | Some("auto") => TauSpec::Auto { max_steps: auto_steps.unwrap_or(10) },
            Some(v) => TauSpec::List(list(v).with_context(ctx("tau"))?),
        };
        let cost = get("cost").map(parse_cost).transpose()?.unwrap_or(CostSpec::Normal { mean: 1.0, sd: 0.1 });
        let rho = match get("rho") {
            None | Some("auto") => None,
            Some(v) => Some(list(v).with_context(ctx("rho"))?),
        };
        let gamma_step = get("gamma_step").map(str::parse).transpose().with_context(ctx("gamma_step"))?.unwrap_or(0.01);
        let exact_stats =
            get("exact_stats").map(parse_bool).transpose().with_context(ctx("exact_stats"))?.unwrap_or(true);

        let config = ExperimentConfig {
            dataset,
            directed,
            q,
            num_instances,
            seed,
            eps_rel,
            c,
            tau,
            cost,
            rho,
            gamma_step,
            exact_stats,
            output: get("output").map(PathBuf::from),
            sketch_dir: get("sketch_dir").map(PathBuf::from),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_instances < 1 {
            bail!("N must be at least 1");
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            bail!("q = {} outside (0, 1]", self.q);
        }
        if let Some(bad) = self.eps_rel.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            bail!("eps_rel = {bad} outside (0, 1)");
        }
        match &self.tau {
            TauSpec::List(t) if t.iter().any(|t| !(*t > 0.0 && t.is_finite())) => bail!("tau values must be positive"),
            TauSpec::Auto { max_steps: 0 } => bail!("auto_tau_steps must be at least 1"),
            _ => {}
        }
        if let Some(r) = &self.rho {
            if r.iter().any(|r| !(*r >= 1.0)) {
                bail!("rho values must be at least 1");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "# facebook\ndataset = data/fb.txt\nq = 0.5\nN = 25000\neps_rel = 0.1, 0.2\ntau = 100,200\n\
                    cost = normal(1, 0.1)\nrho = 1, 1.5\n";
        let c = ExperimentConfig::from_pairs(&parse_pairs(text).unwrap()).unwrap();
        assert_eq!(c.dataset, Dataset::EdgeList("data/fb.txt".into()));
        assert_eq!(c.dataset.name(), "fb");
        assert_eq!(c.num_instances, 25000);
        assert_eq!(c.eps_rel, vec![0.1, 0.2]);
        assert_eq!(c.tau, TauSpec::List(vec![100.0, 200.0]));
        assert_eq!(c.cost, CostSpec::Normal { mean: 1.0, sd: 0.1 });
        assert_eq!(c.rho, Some(vec![1.0, 1.5]));
        assert!(c.exact_stats);
    }

    #[test]
    fn specs() {
        assert_eq!(parse_dataset("incomparability(10, 0.5)").unwrap(), Dataset::Incomparability { n: 10, sigma: 0.5 });
        assert_eq!(parse_cost("concave(0.5)").unwrap(), CostSpec::Concave { p: 0.5, weights: None });
        assert_eq!(parse_cost("concave(0.5,1,0.1)").unwrap(), CostSpec::Concave { p: 0.5, weights: Some((1.0, 0.1)) });
        assert_eq!(parse_cost("file:c.txt").unwrap(), CostSpec::File("c.txt".into()));
        assert!(parse_cost("gamma(1)").is_err());
        assert!(parse_dataset("incomparability(10)").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let bad = |extra: &str| {
            let text = format!("dataset = x\n{extra}\n");
            parse_pairs(&text).and_then(|p| ExperimentConfig::from_pairs(&p))
        };
        assert!(bad("q = 0").is_err());
        assert!(bad("q = 1.5").is_err());
        assert!(bad("N = 0").is_err());
        assert!(bad("eps_rel = 0.1,,0.2").is_err());
        assert!(bad("eps_rel = 1").is_err());
        assert!(bad("rho = 0.5").is_err());
        assert!(bad("tau = -1").is_err());
        assert!(bad("colour = red").is_err());
        assert!(bad("no equals sign").is_err());
        assert!(bad("").is_ok());
        assert!(parse_pairs("q = 1").and_then(|p| ExperimentConfig::from_pairs(&p)).is_err());
    }
}
