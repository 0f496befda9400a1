//! The `dks` command line: `gen`, `solve`, `convergence`, `scaling`, `fit`.
//!
//! Settings come from flags, then from an optional TOML file given with
//! `--config` (keys under a `[<subcommand>]` table or at top level), then
//! from defaults. Exit codes: 0 success, 1 usage or invalid input, 2 runtime
//! failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::baselines::SaParams;
use crate::bench::{
    admissible_sizes, convergence_experiment, parse_fit_table, power_law_fit, sa_scaling_experiment,
    scaling_experiment, scaling_fits, write_convergence_csv, write_sa_scaling_csv, write_scaling_csv, Algorithm,
    ConvergenceConfig, ExecutorChoice, ExecutorKind, SaScalingConfig, ScalingConfig,
};
use crate::baselines::BlackBoxGrover;
use crate::error::{DksError, Result};
use crate::graph::{binomial, erdos_renyi, erdos_renyi_unique_densest, Graph};
use crate::search::{adaptive_search, QuantumExecutor, SearchConfig, SearchTrace};
use crate::sim::DEFAULT_MAX_QUBITS;

#[derive(Parser, Debug)]
#[command(name = "dks", version, about = "Grover search for dense k-subgraphs")]
struct Cli {
    /// TOML file with default settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an Erdos-Renyi graph in edge-list format.
    Gen(GenArgs),
    /// Find a densest k-subgraph with the adaptive Grover search.
    Solve(SolveArgs),
    /// Best-so-far traces of every algorithm on one graph.
    Convergence(ConvergenceArgs),
    /// Oracle cost against search-space size.
    Scaling(ScalingArgs),
    /// Fit y = a N^b to a two-column table.
    Fit(FitArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Resample until the densest k-subgraph is unique.
    #[arg(long)]
    unique_k: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    confidence: Option<f64>,
    #[arg(long)]
    success_floor: Option<f64>,
    /// auto | quantum | emulator
    #[arg(long)]
    executor: Option<String>,
    #[arg(long)]
    max_qubits: Option<usize>,
    /// Charge one extra call per attempt for the classical check.
    #[arg(long)]
    charge_verification: bool,
    /// Write the attempt log as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of grover,emulator,brute-force,annealing.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    #[arg(long)]
    max_qubits: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON summary path (default: the CSV path with a .json extension).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// Explicit vertex counts; otherwise the range n-min..=n-max.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    /// Drop sizes with more k-subsets than this.
    #[arg(long)]
    max_subsets: Option<u64>,
    #[arg(long)]
    graphs: Option<usize>,
    /// Runs per graph.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    executor: Option<String>,
    #[arg(long)]
    max_qubits: Option<usize>,
    #[arg(long)]
    n_boot: Option<usize>,
    #[arg(long)]
    ci: Option<f64>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Measure simulated annealing instead of the Grover search.
    #[arg(long)]
    sa: bool,
    /// Annealing steps per run (default 30 n).
    #[arg(long)]
    sa_steps: Option<usize>,
    /// Cost recorded for graphs where annealing never succeeded.
    #[arg(long)]
    cost_cap: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
}

/// Layered settings lookup: flag, then `[section].key`, then top-level `key`.
struct Settings {
    table: toml::Table,
    section: &'static str,
}

impl Settings {
    fn load(path: Option<&Path>, section: &'static str) -> Result<Self> {
        let table = match path {
            Some(p) => fs::read_to_string(p)?
                .parse::<toml::Table>()
                .map_err(|e| DksError::input(format!("config {}: {e}", p.display())))?,
            None => toml::Table::new(),
        };
        Ok(Settings { table, section })
    }

    fn lookup<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>> {
        let scoped = self.table.get(self.section).and_then(|s| s.get(key));
        match scoped.or_else(|| self.table.get(key)) {
            Some(v) => v
                .clone()
                .try_into()
                .map(Some)
                .map_err(|e| DksError::input(format!("config key '{key}': {e}"))),
            None => Ok(None),
        }
    }

    fn get<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.lookup(key),
        }
    }

    fn or<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }

    fn required<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.get(flag, key)?
            .ok_or_else(|| DksError::input(format!("missing required setting --{}", key.replace('_', "-"))))
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_command<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    match dispatch(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &DksError) -> i32 {
    match e {
        DksError::InvalidInput(_) => 1,
        _ => 2,
    }
}

fn dispatch(cli: Cli, out: &mut impl Write) -> Result<()> {
    let cfg = cli.config.as_deref();
    match cli.command {
        Command::Gen(a) => gen(a, Settings::load(cfg, "gen")?, out),
        Command::Solve(a) => solve(a, Settings::load(cfg, "solve")?, out),
        Command::Convergence(a) => convergence(a, Settings::load(cfg, "convergence")?, out),
        Command::Scaling(a) => scaling(a, Settings::load(cfg, "scaling")?, out),
        Command::Fit(a) => fit(a, Settings::load(cfg, "fit")?, out),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn summary_path(explicit: Option<PathBuf>, csv: &Path) -> PathBuf {
    explicit.unwrap_or_else(|| csv.with_extension("json"))
}

#[derive(Serialize)]
struct GenEcho {
    n: usize,
    p: f64,
    seed: u64,
    unique_k: Option<usize>,
}

fn gen(a: GenArgs, s: Settings, out: &mut impl Write) -> Result<()> {
    let echo = GenEcho {
        n: s.required(a.n, "n")?,
        p: s.or(a.p, "p", 0.5)?,
        seed: s.or(a.seed, "seed", 0)?,
        unique_k: s.get(a.unique_k, "unique_k")?,
    };
    let g = match echo.unique_k {
        Some(k) => erdos_renyi_unique_densest(echo.n, echo.p, k, echo.seed)?,
        None => erdos_renyi(echo.n, echo.p, echo.seed)?,
    };
    eprintln!("gen {}", serde_json::to_string(&echo)?);
    match s.get(a.out, "out")? {
        Some(path) => g.write_edge_list(path)?,
        None => out.write_all(g.to_edge_list().as_bytes())?,
    }
    Ok(())
}

fn read_graph(path: &Path) -> Result<Graph> {
    Graph::read_edge_list(path)
}

fn solve(a: SolveArgs, s: Settings, out: &mut impl Write) -> Result<()> {
    let input: PathBuf = s.required(a.input, "in")?;
    let g = read_graph(&input)?;
    let k: usize = s.required(a.k, "k")?;
    if k == 0 || k > g.n() {
        return Err(DksError::input(format!("k = {k} must lie in 1..={}", g.n())));
    }
    let cfg = SearchConfig {
        confidence: s.or(a.confidence, "confidence", 0.95)?,
        success_floor: s.or(a.success_floor, "success_floor", 0.25)?,
        required_failures: None,
        seed: s.or(a.seed, "seed", 0)?,
        charge_verification: a.charge_verification || s.or(None, "charge_verification", false)?,
    };
    let choice: ExecutorChoice = s.or(a.executor, "executor", "auto".to_string())?.parse()?;
    let kind = choice.resolve(binomial(g.n(), k));
    let trace: SearchTrace = match kind {
        ExecutorKind::QuantumSim => {
            let mut ex = QuantumExecutor::new(s.or(a.max_qubits, "max_qubits", DEFAULT_MAX_QUBITS)?);
            ex.check_capacity(g.n(), k)?;
            adaptive_search(&g, k, &cfg, &mut ex)?
        }
        ExecutorKind::Emulator => adaptive_search(&g, k, &cfg, &mut BlackBoxGrover::new())?,
    };
    let vertices: Vec<String> = trace.best.vertices().map(|v| v.to_string()).collect();
    writeln!(out, "vertices: {}", vertices.join(" "))?;
    writeln!(out, "edges: {}", trace.best_edges)?;
    writeln!(out, "oracle_calls: {}", trace.total_calls)?;
    writeln!(out, "attempts: {}", trace.attempts.len())?;
    writeln!(out, "executor: {}", kind.as_str())?;
    writeln!(out, "seed: {}", cfg.seed)?;
    writeln!(out, "optimal with probability at least {}", cfg.confidence)?;
    if let Some(path) = s.get(a.trace, "trace")? {
        let mut buf = Vec::new();
        writeln!(buf, "{}", SearchTrace::csv_header())?;
        trace.write_csv_rows(0, &mut buf)?;
        fs::write(path, buf)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ConvergenceSummary<'a> {
    input: &'a Path,
    config: &'a ConvergenceConfig,
    series: Vec<SeriesSummary>,
}

#[derive(Serialize)]
struct SeriesSummary {
    algorithm: Algorithm,
    runs: usize,
    mean_total_calls: f64,
    final_mean: f64,
}

fn convergence(a: ConvergenceArgs, s: Settings, out: &mut impl Write) -> Result<()> {
    let input: PathBuf = s.required(a.input, "in")?;
    let g = read_graph(&input)?;
    let mut cfg = ConvergenceConfig::new(s.required(a.k, "k")?, s.or(a.seed, "seed", 0)?);
    cfg.runs = s.or(a.runs, "runs", cfg.runs)?;
    cfg.max_qubits = s.or(a.max_qubits, "max_qubits", cfg.max_qubits)?;
    if let Some(names) = s.get(a.algorithms, "algorithms")? {
        cfg.algorithms = names.iter().map(|n| n.parse()).collect::<Result<_>>()?;
    }
    let jobs = s.get(a.jobs, "jobs")?;
    let series = crate::bench::with_jobs(jobs, || convergence_experiment(&g, &cfg))??;
    let csv_path: PathBuf = s.or(a.out, "out", PathBuf::from("convergence.csv"))?;
    let mut buf = Vec::new();
    write_convergence_csv(&series, &mut buf)?;
    fs::write(&csv_path, buf)?;
    let summary = ConvergenceSummary {
        input: &input,
        config: &cfg,
        series: series
            .iter()
            .map(|x| SeriesSummary {
                algorithm: x.algorithm,
                runs: x.runs,
                mean_total_calls: x.mean_total_calls,
                final_mean: x.points.last().map_or(0.0, |p| p.mean),
            })
            .collect(),
    };
    write_json(&summary_path(s.get(a.summary, "summary")?, &csv_path), &summary)?;
    for x in &summary.series {
        writeln!(
            out,
            "{}: final mean {:.4}, mean calls {:.1}",
            x.algorithm, x.final_mean, x.mean_total_calls
        )?;
    }
    Ok(())
}

fn scaling_sizes(a: &ScalingArgs, s: &Settings) -> Result<Vec<(usize, usize)>> {
    let ks: Vec<usize> = s.required(a.k.clone(), "k")?;
    let ns: Vec<usize> = match s.get(a.n.clone(), "n")? {
        Some(ns) => ns,
        None => {
            let lo: usize = s.required(a.n_min, "n_min")?;
            let hi: usize = s.required(a.n_max, "n_max")?;
            (lo..=hi).collect()
        }
    };
    let cap = s.or(a.max_subsets, "max_subsets", u64::MAX)?;
    let sizes: Vec<(usize, usize)> = ks
        .iter()
        .flat_map(|&k| admissible_sizes(k, ns.iter().copied(), cap))
        .collect();
    if sizes.is_empty() {
        return Err(DksError::input("no admissible (n, k) sizes"));
    }
    Ok(sizes)
}

#[derive(Serialize)]
struct ScalingSummary<'a, C: Serialize, P: Serialize, F: Serialize> {
    config: &'a C,
    points: &'a [P],
    fits: F,
}

fn scaling(a: ScalingArgs, s: Settings, out: &mut impl Write) -> Result<()> {
    let sizes = scaling_sizes(&a, &s)?;
    let seed = s.or(a.seed, "seed", 0)?;
    let sa_mode = a.sa || s.or(None, "sa", false)?;
    let csv_path: PathBuf = s.or(a.out.clone(), "out", PathBuf::from("scaling.csv"))?;
    let json_path = summary_path(s.get(a.summary.clone(), "summary")?, &csv_path);
    let mut buf = Vec::new();
    if sa_mode {
        let mut cfg = SaScalingConfig::new(sizes, seed);
        cfg.graphs = s.or(a.graphs, "graphs", cfg.graphs)?;
        cfg.runs_per_graph = s.or(a.runs, "runs", cfg.runs_per_graph)?;
        cfg.p_graph = s.or(a.p, "p", cfg.p_graph)?;
        cfg.n_boot = s.or(a.n_boot, "n_boot", cfg.n_boot)?;
        cfg.ci = s.or(a.ci, "ci", cfg.ci)?;
        cfg.jobs = s.get(a.jobs, "jobs")?;
        cfg.cost_cap = s.get(a.cost_cap, "cost_cap")?;
        cfg.annealing = SaParams {
            steps: s.or(a.sa_steps, "sa_steps", 0)?,
            ..cfg.annealing
        };
        let result = sa_scaling_experiment(&cfg)?;
        write_sa_scaling_csv(&result.points, &mut buf)?;
        let pts: Vec<(f64, f64)> = result.points.iter().map(|p| (p.n_subsets as f64, p.mean_cost)).collect();
        let fit = power_law_fit(&pts).ok();
        fs::write(&csv_path, &buf)?;
        write_json(
            &json_path,
            &ScalingSummary {
                config: &cfg,
                points: &result.points,
                fits: fit,
            },
        )?;
        for p in &result.points {
            writeln!(out, "n={} k={} N={} cost={:.1} capped={}", p.n, p.k, p.n_subsets, p.mean_cost, p.capped_graphs)?;
        }
        if let Some(f) = fit {
            writeln!(out, "fit a={:.6} b={:.6}", f.a, f.b)?;
        }
    } else {
        let mut cfg = ScalingConfig::new(sizes, seed);
        cfg.graphs = s.or(a.graphs, "graphs", cfg.graphs)?;
        cfg.runs = s.or(a.runs, "runs", cfg.runs)?;
        cfg.p_graph = s.or(a.p, "p", cfg.p_graph)?;
        cfg.executor = s.or(a.executor, "executor", "auto".to_string())?.parse()?;
        cfg.max_qubits = s.or(a.max_qubits, "max_qubits", cfg.max_qubits)?;
        cfg.n_boot = s.or(a.n_boot, "n_boot", cfg.n_boot)?;
        cfg.ci = s.or(a.ci, "ci", cfg.ci)?;
        cfg.jobs = s.get(a.jobs, "jobs")?;
        let result = scaling_experiment(&cfg)?;
        write_scaling_csv(&result.points, &mut buf)?;
        let fits = scaling_fits(&result.points, cfg.confidence);
        fs::write(&csv_path, &buf)?;
        write_json(
            &json_path,
            &ScalingSummary {
                config: &cfg,
                points: &result.points,
                fits: &fits,
            },
        )?;
        for p in &result.points {
            writeln!(
                out,
                "n={} k={} N={} {} cost={:.1} [{:.1}, {:.1}] optimal={:.3}",
                p.n,
                p.k,
                p.n_subsets,
                p.executor.as_str(),
                p.mean_cost,
                p.ci_lo,
                p.ci_hi,
                p.optimal_rate
            )?;
        }
        if let Some(f) = fits.grover {
            writeln!(out, "fit a={:.6} b={:.6}", f.a, f.b)?;
        }
    }
    Ok(())
}

fn fit(a: FitArgs, s: Settings, out: &mut impl Write) -> Result<()> {
    let input: PathBuf = s.required(a.input, "in")?;
    let pts = parse_fit_table(&fs::read_to_string(input)?)?;
    let f = power_law_fit(&pts)?;
    writeln!(out, "a={:.6} b={:.6}", f.a, f.b)?;
    writeln!(out, "r_squared={:.6} rms_log_residual={:.6e}", f.r_squared, f.rms_log_residual)?;
    Ok(())
}
