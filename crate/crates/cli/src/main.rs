use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use scsc_cli::config::{parse_pairs, ExperimentConfig};
use scsc_cli::experiment::{load_network, run_experiment, solve_once, write_csv, Row};
use scsc_cli::sketch_cache::{rank_seed, sketch_cache, SketchSource};
use scsc_cli::verify::{run_suite, SuiteOptions};
use scsc_core::greedy::Status;
use scsc_core::oracle::sketch_size_for;

/// Greedy submodular cover with approximate oracles and ratio certificates.
#[derive(Parser)]
#[command(name = "scsc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run greedy once and print the trace and certificates.
    Solve(SolveArgs),
    /// Run the (eps, tau, rho) grid and write one CSV row per point.
    Experiment(CommonArgs),
    /// Build or inspect reachability sketches.
    #[command(subcommand)]
    Sketch(SketchCommand),
    /// Randomized check of certificates and feasibility against exhaustive optima.
    Verify(VerifyArgs),
}

/// Flags mirroring the config keys. Each overrides the value from `--config`.
#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// File of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Edge-list path or `incomparability(n, sigma)`.
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    directed: Option<bool>,
    /// Weighted-cascade scale.
    #[arg(long)]
    q: Option<f64>,
    /// Number of sampled instances.
    #[arg(long = "num-instances")]
    num_instances: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated relative errors.
    #[arg(long = "eps-rel")]
    eps_rel: Option<String>,
    /// Sketch size constant.
    #[arg(long)]
    c: Option<f64>,
    /// Comma-separated thresholds or `auto`.
    #[arg(long)]
    tau: Option<String>,
    #[arg(long = "auto-tau-steps")]
    auto_tau_steps: Option<usize>,
    /// unit, normal(mean, sd), file:PATH, concave(p) or concave(p, mean, sd).
    #[arg(long)]
    cost: Option<String>,
    /// Comma-separated curvature values or `auto`.
    #[arg(long)]
    rho: Option<String>,
    #[arg(long = "gamma-step")]
    gamma_step: Option<f64>,
    #[arg(long = "exact-stats")]
    exact_stats: Option<bool>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long = "sketch-dir")]
    sketch_dir: Option<PathBuf>,
}

impl CommonArgs {
    fn pairs(&self) -> Result<BTreeMap<String, String>> {
        let mut pairs = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                parse_pairs(&text).with_context(|| format!("in {}", path.display()))?
            }
            None => BTreeMap::new(),
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let flags = [
            ("dataset", self.dataset.clone()),
            ("directed", self.directed.map(|v| v.to_string())),
            ("q", self.q.map(|v| v.to_string())),
            ("N", self.num_instances.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("eps_rel", self.eps_rel.clone()),
            ("c", self.c.map(|v| v.to_string())),
            ("tau", self.tau.clone()),
            ("auto_tau_steps", self.auto_tau_steps.map(|v| v.to_string())),
            ("cost", self.cost.clone()),
            ("rho", self.rho.clone()),
            ("gamma_step", self.gamma_step.map(|v| v.to_string())),
            ("exact_stats", self.exact_stats.map(|v| v.to_string())),
            ("output", path(&self.output)),
            ("sketch_dir", path(&self.sketch_dir)),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                pairs.insert(key.to_string(), v);
            }
        }
        Ok(pairs)
    }

    fn load(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::from_pairs(&self.pairs()?)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Threshold for this run.
    #[arg(long = "at-tau")]
    at_tau: f64,
    /// Relative error of the oracle; 0 runs the exact oracle.
    #[arg(long = "at-eps", default_value_t = 0.0)]
    at_eps: f64,
    #[arg(long = "trace-out")]
    trace_out: Option<PathBuf>,
    #[arg(long = "cert-out")]
    cert_out: Option<PathBuf>,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum SketchCommand {
    /// Build the sketch for one relative error and write it to a file.
    Build {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "at-eps")]
        at_eps: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a sketch file's header and size statistics.
    Inspect { path: PathBuf },
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 200)]
    instances: usize,
    #[arg(long = "max-n", default_value_t = 12)]
    max_n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

const CERT_HEADER: [&str; 10] =
    ["theorem", "valid", "value", "eps", "rho", "mu_or_lb", "alpha_or_ub", "beta", "gamma_star", "n"];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn cert_records(rows: &[Row]) -> Vec<[String; 10]> {
    let mut out = Vec::new();
    for r in rows {
        let beta = opt(r.beta);
        if let Some(c) = r.ratio1 {
            out.push([
                "1".into(),
                c.valid().to_string(),
                opt(c.value()),
                r.eps_abs.to_string(),
                r.rho.to_string(),
                opt(r.stats1.map(|s| s.mu)),
                opt(r.stats1.map(|s| s.alpha)),
                beta.clone(),
                String::new(),
                r.n.to_string(),
            ]);
        }
        if let Some(c) = r.ratio2 {
            out.push([
                "2".into(),
                c.valid().to_string(),
                opt(c.value()),
                r.eps_abs.to_string(),
                r.rho.to_string(),
                opt(r.stats2.map(|s| s.mu)),
                opt(r.stats2.map(|s| s.alpha)),
                beta,
                opt(c.gamma_star()),
                r.n.to_string(),
            ]);
        }
    }
    out
}

fn write_certs<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CERT_HEADER)?;
    for rec in cert_records(rows) {
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn solve(args: &SolveArgs) -> Result<ExitCode> {
    let config = args.common.load()?;
    let solved = solve_once(&config, args.at_eps, args.at_tau)?;
    let trace_csv = solved.trace.to_csv(Some(&solved.original_ids));
    match &args.trace_out {
        Some(p) => fs::write(p, &trace_csv).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{trace_csv}"),
    }
    match &args.cert_out {
        Some(p) => write_certs(&solved.rows, create(p)?)?,
        None => {
            println!();
            write_certs(&solved.rows, io::stdout().lock())?;
        }
    }
    let ids: Vec<String> = solved.selected.iter().map(|&v| solved.original_ids[v].to_string()).collect();
    let row = &solved.rows[0];
    eprintln!(
        "status: {}, |A| = {}, c(A) = {}, f(A) = {}, selected: [{}]",
        solved.trace.status.as_str(),
        ids.len(),
        row.cost_of_a,
        row.f_of_a,
        ids.join(" ")
    );
    Ok(if solved.trace.status == Status::Covered { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn experiment(args: &CommonArgs) -> Result<ExitCode> {
    let config = args.load()?;
    let rows = run_experiment(&config)?;
    match &config.output {
        Some(p) => write_csv(&rows, create(p)?)?,
        None => write_csv(&rows, io::stdout().lock())?,
    }
    Ok(ExitCode::SUCCESS)
}

fn sketch(cmd: &SketchCommand) -> Result<ExitCode> {
    match cmd {
        SketchCommand::Build { common, at_eps, out } => {
            let config = common.load()?;
            let (graph, realizations) = load_network(&config)?;
            let k = sketch_size_for(*at_eps, graph.num_vertices().max(2), config.c)?;
            let source = SketchSource::Build {
                graph: &graph,
                realizations: &realizations,
                rank_seed: rank_seed(config.seed),
                k,
            };
            let s = sketch_cache(out, source)?;
            println!("wrote {} (n = {}, N = {}, k = {k})", out.display(), s.num_vertices(), s.num_instances());
        }
        SketchCommand::Inspect { path } => {
            let s = sketch_cache(path, SketchSource::Load)?;
            let sizes: Vec<usize> = (0..s.num_vertices()).map(|u| s.ranks(u).len()).collect();
            let full = sizes.iter().filter(|&&l| l == s.k()).count();
            let total: usize = sizes.iter().sum();
            println!("n = {}", s.num_vertices());
            println!("N = {}", s.num_instances());
            println!("k = {}", s.k());
            println!("rank_seed = {}", s.seed());
            println!("full sketches = {full}");
            println!("stored ranks = {total}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(args: &VerifyArgs) -> Result<ExitCode> {
    let report = run_suite(SuiteOptions { instances: args.instances, max_n: args.max_n, seed: args.seed })?;
    println!("{report}");
    Ok(if report.violations() == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Experiment(a) => experiment(a),
        Command::Sketch(c) => sketch(c),
        Command::Verify(a) => verify(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
