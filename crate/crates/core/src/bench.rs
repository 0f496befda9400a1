//! Experiment drivers and statistics: convergence traces, scaling sweeps,
//! the two-level bootstrap and power-law fits.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{brute_force_random_order, sa_cost, simulated_annealing_run, BlackBoxGrover, SaParams};
use crate::error::{DksError, Result};
use crate::graph::{binomial, brute_force_densest, erdos_renyi, erdos_renyi_unique_densest, Graph};
use crate::rng::{derive_seed, derived_rng};
use crate::search::{adaptive_search_with_rng, QuantumExecutor, SearchConfig};
use crate::sim::DEFAULT_MAX_QUBITS;

/// Largest `sqrt(N)` handled by the statevector executor under `auto`.
pub const SIMULATION_SQRT_LIMIT: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Grover,
    Emulator,
    BruteForce,
    Annealing,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Grover, Algorithm::Emulator, Algorithm::BruteForce, Algorithm::Annealing];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Grover => "grover",
            Algorithm::Emulator => "emulator",
            Algorithm::BruteForce => "brute-force",
            Algorithm::Annealing => "annealing",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = DksError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| DksError::input(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecutorKind {
    QuantumSim,
    Emulator,
}

impl ExecutorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExecutorKind::QuantumSim => "quantum-sim",
            ExecutorKind::Emulator => "emulator",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExecutorChoice {
    #[default]
    Auto,
    Quantum,
    Emulator,
}

impl FromStr for ExecutorChoice {
    type Err = DksError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(ExecutorChoice::Auto),
            "quantum" | "quantum-sim" => Ok(ExecutorChoice::Quantum),
            "emulator" => Ok(ExecutorChoice::Emulator),
            _ => Err(DksError::input(format!("unknown executor '{s}'"))),
        }
    }
}

impl ExecutorChoice {
    /// `auto` picks the simulator when `sqrt(N) <= 20`.
    pub fn resolve(self, n_subsets: u64) -> ExecutorKind {
        match self {
            ExecutorChoice::Quantum => ExecutorKind::QuantumSim,
            ExecutorChoice::Emulator => ExecutorKind::Emulator,
            ExecutorChoice::Auto if (n_subsets as f64).sqrt() <= SIMULATION_SQRT_LIMIT => ExecutorKind::QuantumSim,
            ExecutorChoice::Auto => ExecutorKind::Emulator,
        }
    }
}

/// Runs `f` on a pool with `jobs` threads, or on the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(DksError::input("--jobs must be at least 1")),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| DksError::input(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Linear-interpolation percentile of sorted data, `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    percentile(values, 0.5)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub call: usize,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Aligns best-so-far traces on the call axis, padding each with its final
/// value, and reports the pointwise mean and 5th/95th percentiles.
pub fn convergence_band(traces: &[Vec<usize>]) -> Vec<ConvergencePoint> {
    let len = traces.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|i| {
            let vals = sorted(
                traces
                    .iter()
                    .map(|t| t.get(i).or(t.last()).copied().unwrap_or(0) as f64)
                    .collect(),
            );
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            ConvergencePoint {
                call: i + 1,
                mean,
                lower: percentile(&vals, 0.05).min(mean),
                upper: percentile(&vals, 0.95).max(mean),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub k: usize,
    pub algorithms: Vec<Algorithm>,
    pub runs: usize,
    pub seed: u64,
    pub confidence: f64,
    pub success_floor: f64,
    /// Annealing parameters; `None` uses [`SaParams::defaults_for`].
    pub annealing: Option<SaParams>,
    pub max_qubits: usize,
}

impl ConvergenceConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        ConvergenceConfig {
            k,
            algorithms: Algorithm::ALL.to_vec(),
            runs: 1000,
            seed,
            confidence: 0.95,
            success_floor: 0.25,
            annealing: None,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }

    fn search(&self, seed: u64) -> SearchConfig {
        SearchConfig {
            confidence: self.confidence,
            success_floor: self.success_floor,
            seed,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceSeries {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub mean_total_calls: f64,
    pub points: Vec<ConvergencePoint>,
}

/// Best-so-far per oracle call for one seeded run of `alg`.
pub fn convergence_trace<R: Rng>(
    g: &Graph,
    cfg: &ConvergenceConfig,
    alg: Algorithm,
    quantum: &QuantumExecutor,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let k = cfg.k;
    match alg {
        Algorithm::Grover => {
            adaptive_search_with_rng(g, k, &cfg.search(0), &mut quantum.clone(), rng).map(|t| t.best_by_call())
        }
        Algorithm::Emulator => {
            adaptive_search_with_rng(g, k, &cfg.search(0), &mut BlackBoxGrover::new(), rng).map(|t| t.best_by_call())
        }
        Algorithm::BruteForce => brute_force_random_order(g, k, rng),
        Algorithm::Annealing => {
            let params = cfg.annealing.clone().unwrap_or_else(|| SaParams::defaults_for(g.n(), k));
            simulated_annealing_run(g, k, &params, rng).map(|r| r.best_by_call())
        }
    }
}

/// Runs every configured algorithm `runs` times on `g`. Run `r` of the
/// algorithm at position `a` uses the stream `(seed, a, r)`.
pub fn convergence_experiment(g: &Graph, cfg: &ConvergenceConfig) -> Result<Vec<ConvergenceSeries>> {
    if cfg.runs == 0 {
        return Err(DksError::input("need at least one run"));
    }
    if cfg.algorithms.contains(&Algorithm::Grover) {
        QuantumExecutor::new(cfg.max_qubits).check_capacity(g.n(), cfg.k)?;
    }
    cfg.algorithms
        .iter()
        .enumerate()
        .map(|(ai, &alg)| {
            let quantum = QuantumExecutor::new(cfg.max_qubits);
            let traces = (0..cfg.runs)
                .into_par_iter()
                .map(|r| {
                    let mut rng = derived_rng(cfg.seed, &[ai as u64, r as u64]);
                    convergence_trace(g, cfg, alg, &quantum, &mut rng)
                })
                .collect::<Result<Vec<_>>>()?;
            let mean_total_calls = traces.iter().map(|t| t.len() as f64).sum::<f64>() / traces.len() as f64;
            Ok(ConvergenceSeries {
                algorithm: alg,
                runs: cfg.runs,
                mean_total_calls,
                points: convergence_band(&traces),
            })
        })
        .collect()
}

pub fn write_convergence_csv<W: Write>(series: &[ConvergenceSeries], w: &mut W) -> Result<()> {
    writeln!(w, "algorithm,call,mean,lower,upper")?;
    for s in series {
        for p in &s.points {
            writeln!(w, "{},{},{},{},{}", s.algorithm, p.call, p.mean, p.lower, p.upper)?;
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub mean: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Two-level bootstrap of per-graph run costs. Each replicate takes the
/// median of a with-replacement resample of every graph's runs, then averages
/// those medians over a with-replacement resample of the graphs. Returns the
/// replicate mean and the central `ci` percentile interval.
pub fn hierarchical_bootstrap<R: Rng + ?Sized>(
    data: &[Vec<f64>],
    n_boot: usize,
    ci: f64,
    rng: &mut R,
) -> Result<BootstrapResult> {
    if data.is_empty() || data.iter().any(Vec::is_empty) {
        return Err(DksError::input("bootstrap needs at least one graph with at least one run"));
    }
    if n_boot == 0 || !(ci > 0.0 && ci < 1.0) {
        return Err(DksError::input(format!("invalid bootstrap settings n_boot = {n_boot}, ci = {ci}")));
    }
    let mut reps = Vec::with_capacity(n_boot);
    let mut buf = Vec::new();
    let mut medians = vec![0.0; data.len()];
    for _ in 0..n_boot {
        for (gi, runs) in data.iter().enumerate() {
            buf.clear();
            buf.extend((0..runs.len()).map(|_| runs[rng.gen_range(0..runs.len())]));
            medians[gi] = median(&mut buf);
        }
        let sum: f64 = (0..data.len()).map(|_| medians[rng.gen_range(0..data.len())]).sum();
        reps.push(sum / data.len() as f64);
    }
    let reps = sorted(reps);
    let alpha = (1.0 - ci) / 2.0;
    let mean = if reps[0] == reps[reps.len() - 1] {
        reps[0]
    } else {
        reps.iter().sum::<f64>() / reps.len() as f64
    };
    Ok(BootstrapResult {
        mean,
        lo: percentile(&reps, alpha).min(mean),
        hi: percentile(&reps, 1.0 - alpha).max(mean),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    /// Coefficient of determination in log space.
    pub r_squared: f64,
    /// Root mean square of the log residuals.
    pub rms_log_residual: f64,
    pub points: usize,
}

impl FitResult {
    pub fn predict(&self, n: f64) -> f64 {
        self.a * n.powf(self.b)
    }
}

/// Ordinary least squares of `ln y` on `ln N`; `y = a N^b`.
pub fn power_law_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(DksError::input("power-law fit needs at least two points"));
    }
    if points.iter().any(|&(n, y)| !(n > 0.0 && y > 0.0)) {
        return Err(DksError::input("power-law fit needs positive N and cost"));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let len = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / len;
    let my = ys.iter().sum::<f64>() / len;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(DksError::input("power-law fit needs at least two distinct N"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let intercept = my - b * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - b * x).powi(2)).sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    Ok(FitResult {
        a: intercept.exp(),
        b,
        r_squared: if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot },
        rms_log_residual: (ss_res / len).sqrt(),
        points: points.len(),
    })
}

/// Parses an `N,cost` table. A non-numeric first line is a header; if it
/// names `N` and `mean_cost` columns (as the scaling CSVs do) those two are
/// read, otherwise the table must have exactly two columns. Blank lines and
/// `#` comments are skipped.
pub fn parse_fit_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let split = |line: &str| -> Vec<String> {
        line.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    };
    let mut picks: Option<(usize, usize)> = None;
    let mut out = Vec::new();
    let mut seen_first = false;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols = split(line);
        let parsed = match picks {
            Some((x, y)) if cols.len() > x.max(y) => cols[x].parse::<f64>().ok().zip(cols[y].parse::<f64>().ok()),
            Some(_) => None,
            None if cols.len() == 2 => cols[0].parse::<f64>().ok().zip(cols[1].parse::<f64>().ok()),
            None => None,
        };
        let first = !seen_first;
        seen_first = true;
        match parsed {
            Some(p) => out.push(p),
            None if first => {
                let at = |name: &str| cols.iter().position(|c| c == name);
                if let (Some(x), Some(y)) = (at("N"), at("mean_cost")) {
                    picks = Some((x, y));
                }
            }
            None => {
                return Err(DksError::Parse {
                    line: i + 1,
                    msg: format!("expected numeric N and cost columns, got '{line}'"),
                })
            }
        }
    }
    Ok(out)
}

/// Inclusive `n` range for one `k`, keeping only sizes with
/// `C(n, k) <= max_subsets`.
pub fn admissible_sizes(k: usize, n_values: impl IntoIterator<Item = usize>, max_subsets: u64) -> Vec<(usize, usize)> {
    n_values
        .into_iter()
        .filter(|&n| n >= k && k >= 1 && binomial(n, k) <= max_subsets)
        .map(|n| (n, k))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    /// `(n, k)` sizes to sweep.
    pub sizes: Vec<(usize, usize)>,
    pub graphs: usize,
    pub runs: usize,
    pub p_graph: f64,
    pub seed: u64,
    pub confidence: f64,
    pub success_floor: f64,
    pub executor: ExecutorChoice,
    pub max_qubits: usize,
    pub n_boot: usize,
    pub ci: f64,
    pub jobs: Option<usize>,
}

impl ScalingConfig {
    pub fn new(sizes: Vec<(usize, usize)>, seed: u64) -> Self {
        ScalingConfig {
            sizes,
            graphs: 20,
            runs: 20,
            p_graph: 0.5,
            seed,
            confidence: 0.95,
            success_floor: 0.25,
            executor: ExecutorChoice::Auto,
            max_qubits: DEFAULT_MAX_QUBITS,
            n_boot: 2000,
            ci: 0.99,
            jobs: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    pub n: usize,
    pub k: usize,
    pub graph: usize,
    pub run: usize,
    pub calls: u64,
    pub best_edges: usize,
    pub optimum: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub n: usize,
    pub k: usize,
    pub n_subsets: u64,
    pub executor: ExecutorKind,
    pub mean_cost: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Fraction of runs that returned the brute-force optimum.
    pub optimal_rate: f64,
    pub graphs: usize,
    pub runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingOutput {
    pub points: Vec<ScalingPoint>,
    pub runs: Vec<RunRecord>,
}

fn scaling_graph(cfg: &ScalingConfig, n: usize, k: usize, gi: usize, kind: ExecutorKind) -> Result<Vec<RunRecord>> {
    let g = erdos_renyi(n, cfg.p_graph, derive_seed(cfg.seed, &[n as u64, k as u64, gi as u64]))?;
    let optimum = brute_force_densest(&g, k)?.edges;
    let quantum = QuantumExecutor::new(cfg.max_qubits);
    let emulator = match kind {
        ExecutorKind::Emulator => Some(BlackBoxGrover::prepared(&g, k)?),
        ExecutorKind::QuantumSim => None,
    };
    (0..cfg.runs)
        .map(|r| {
            let search = SearchConfig {
                confidence: cfg.confidence,
                success_floor: cfg.success_floor,
                ..Default::default()
            };
            let mut rng = derived_rng(cfg.seed, &[n as u64, k as u64, gi as u64, r as u64]);
            let trace = match &emulator {
                Some(em) => adaptive_search_with_rng(&g, k, &search, &mut em.clone(), &mut rng)?,
                None => adaptive_search_with_rng(&g, k, &search, &mut quantum.clone(), &mut rng)?,
            };
            Ok(RunRecord {
                n,
                k,
                graph: gi,
                run: r,
                calls: trace.total_calls,
                best_edges: trace.best_edges,
                optimum,
            })
        })
        .collect()
}

/// Oracle cost to certify the optimum, per `(n, k)`, over random graphs and
/// repeated adaptive searches. Graph `g` at size `(n, k)` is generated from
/// `(seed, n, k, g)` and its run `r` uses `(seed, n, k, g, r)`, so results do
/// not depend on the thread count.
pub fn scaling_experiment(cfg: &ScalingConfig) -> Result<ScalingOutput> {
    if cfg.graphs == 0 || cfg.runs == 0 {
        return Err(DksError::input("need at least one graph and one run"));
    }
    let mut points = Vec::new();
    let mut runs = Vec::new();
    for (si, &(n, k)) in cfg.sizes.iter().enumerate() {
        if k == 0 || k > n {
            return Err(DksError::input(format!("invalid size n = {n}, k = {k}")));
        }
        let n_subsets = binomial(n, k);
        let kind = cfg.executor.resolve(n_subsets);
        if kind == ExecutorKind::QuantumSim {
            QuantumExecutor::new(cfg.max_qubits).check_capacity(n, k)?;
        }
        let per_graph = with_jobs(cfg.jobs, || {
            (0..cfg.graphs)
                .into_par_iter()
                .map(|gi| scaling_graph(cfg, n, k, gi, kind))
                .collect::<Result<Vec<_>>>()
        })??;
        let costs: Vec<Vec<f64>> = per_graph.iter().map(|rs| rs.iter().map(|r| r.calls as f64).collect()).collect();
        let mut rng = derived_rng(cfg.seed, &[u64::MAX, si as u64]);
        let boot = hierarchical_bootstrap(&costs, cfg.n_boot, cfg.ci, &mut rng)?;
        let flat: Vec<RunRecord> = per_graph.into_iter().flatten().collect();
        let optimal = flat.iter().filter(|r| r.best_edges == r.optimum).count();
        points.push(ScalingPoint {
            n,
            k,
            n_subsets,
            executor: kind,
            mean_cost: boot.mean,
            ci_lo: boot.lo,
            ci_hi: boot.hi,
            optimal_rate: optimal as f64 / flat.len() as f64,
            graphs: cfg.graphs,
            runs: cfg.runs,
        });
        runs.extend(flat);
    }
    Ok(ScalingOutput { points, runs })
}

pub fn write_scaling_csv<W: Write>(points: &[ScalingPoint], w: &mut W) -> Result<()> {
    writeln!(w, "n,k,N,executor,mean_cost,ci_lo,ci_hi,optimal_rate,graphs,runs")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            p.n,
            p.k,
            p.n_subsets,
            p.executor.as_str(),
            p.mean_cost,
            p.ci_lo,
            p.ci_hi,
            p.optimal_rate,
            p.graphs,
            p.runs
        )?;
    }
    Ok(())
}

/// Fit of the quantum/emulator series plus the analytic `0.95 N` line.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingFits {
    pub grover: Option<FitResult>,
    pub brute_force: Option<FitResult>,
}

pub fn scaling_fits(points: &[ScalingPoint], confidence: f64) -> ScalingFits {
    let grover: Vec<(f64, f64)> = points.iter().map(|p| (p.n_subsets as f64, p.mean_cost)).collect();
    let brute: Vec<(f64, f64)> = points
        .iter()
        .map(|p| (p.n_subsets as f64, crate::baselines::brute_force_expected_cost(p.n_subsets, confidence)))
        .collect();
    ScalingFits {
        grover: power_law_fit(&grover).ok(),
        brute_force: power_law_fit(&brute).ok(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaScalingConfig {
    pub sizes: Vec<(usize, usize)>,
    pub graphs: usize,
    pub runs_per_graph: usize,
    pub p_graph: f64,
    pub seed: u64,
    /// Per-size template; `steps == 0` means `30 n`, and the tenure is
    /// replaced by `k` when `tenure_from_k` is set.
    pub annealing: SaParams,
    pub tenure_from_k: bool,
    /// Cost recorded for graphs where no run succeeded. `None` uses the cost
    /// implied by a single success, `ceil(T(1/runs) d)`.
    pub cost_cap: Option<u64>,
    pub n_boot: usize,
    pub ci: f64,
    pub jobs: Option<usize>,
}

impl SaScalingConfig {
    pub fn new(sizes: Vec<(usize, usize)>, seed: u64) -> Self {
        SaScalingConfig {
            sizes,
            graphs: 100,
            runs_per_graph: 1000,
            p_graph: 0.5,
            seed,
            annealing: SaParams {
                steps: 0,
                ..SaParams::defaults_for(1, 0)
            },
            tenure_from_k: true,
            cost_cap: None,
            n_boot: 2000,
            ci: 0.99,
            jobs: None,
        }
    }

    pub fn params_for(&self, n: usize, k: usize) -> SaParams {
        let mut p = self.annealing.clone();
        if p.steps == 0 {
            p.steps = (30 * n).max(1);
        }
        if self.tenure_from_k {
            p.tenure = k;
        }
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SaGraphRecord {
    pub n: usize,
    pub k: usize,
    pub graph: usize,
    pub success_rate: f64,
    pub cost: u64,
    pub capped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaScalingPoint {
    pub n: usize,
    pub k: usize,
    pub n_subsets: u64,
    pub steps: usize,
    pub mean_cost: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub capped_graphs: usize,
    pub graphs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaScalingOutput {
    pub points: Vec<SaScalingPoint>,
    pub graphs: Vec<SaGraphRecord>,
}

fn sa_graph(cfg: &SaScalingConfig, n: usize, k: usize, gi: usize) -> Result<SaGraphRecord> {
    let g = erdos_renyi_unique_densest(n, cfg.p_graph, k, derive_seed(cfg.seed, &[n as u64, k as u64, gi as u64]))?;
    let optimum = brute_force_densest(&g, k)?.edges;
    let params = cfg.params_for(n, k);
    let mut rng = derived_rng(cfg.seed, &[n as u64, k as u64, gi as u64, u64::MAX]);
    let mut wins = 0;
    for _ in 0..cfg.runs_per_graph {
        if simulated_annealing_run(&g, k, &params, &mut rng)?.best_edges == optimum {
            wins += 1;
        }
    }
    let s = wins as f64 / cfg.runs_per_graph as f64;
    let (cost, capped) = if wins == 0 {
        let cap = match cfg.cost_cap {
            Some(c) => c,
            None => sa_cost(1.0 / cfg.runs_per_graph as f64, params.steps)?,
        };
        (cap, true)
    } else {
        (sa_cost(s, params.steps)?, false)
    };
    Ok(SaGraphRecord {
        n,
        k,
        graph: gi,
        success_rate: s,
        cost,
        capped,
    })
}

/// SA oracle cost `ceil(T d)` per unique-densest graph, averaged over graphs
/// with a graph-level bootstrap interval.
pub fn sa_scaling_experiment(cfg: &SaScalingConfig) -> Result<SaScalingOutput> {
    if cfg.graphs == 0 || cfg.runs_per_graph == 0 {
        return Err(DksError::input("need at least one graph and one run"));
    }
    let mut points = Vec::new();
    let mut graphs = Vec::new();
    for (si, &(n, k)) in cfg.sizes.iter().enumerate() {
        if k == 0 || k > n {
            return Err(DksError::input(format!("invalid size n = {n}, k = {k}")));
        }
        cfg.params_for(n, k).validate()?;
        let records = with_jobs(cfg.jobs, || {
            (0..cfg.graphs)
                .into_par_iter()
                .map(|gi| sa_graph(cfg, n, k, gi))
                .collect::<Result<Vec<_>>>()
        })??;
        let costs: Vec<Vec<f64>> = records.iter().map(|r| vec![r.cost as f64]).collect();
        let mut rng = derived_rng(cfg.seed, &[u64::MAX, si as u64]);
        let boot = hierarchical_bootstrap(&costs, cfg.n_boot, cfg.ci, &mut rng)?;
        points.push(SaScalingPoint {
            n,
            k,
            n_subsets: binomial(n, k),
            steps: cfg.params_for(n, k).steps,
            mean_cost: boot.mean,
            ci_lo: boot.lo,
            ci_hi: boot.hi,
            capped_graphs: records.iter().filter(|r| r.capped).count(),
            graphs: cfg.graphs,
        });
        graphs.extend(records);
    }
    Ok(SaScalingOutput { points, graphs })
}

pub fn write_sa_scaling_csv<W: Write>(points: &[SaScalingPoint], w: &mut W) -> Result<()> {
    writeln!(w, "n,k,N,steps,mean_cost,ci_lo,ci_hi,capped_graphs,graphs")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            p.n, p.k, p.n_subsets, p.steps, p.mean_cost, p.ci_lo, p.ci_hi, p.capped_graphs, p.graphs
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 4.0);
        assert!((percentile(&v, 0.5) - 2.5).abs() < 1e-12);
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn executor_switch() {
        assert_eq!(ExecutorChoice::Auto.resolve(binomial(6, 3)), ExecutorKind::QuantumSim);
        assert_eq!(ExecutorChoice::Auto.resolve(binomial(12, 6)), ExecutorKind::Emulator);
        assert_eq!(ExecutorChoice::Auto.resolve(400), ExecutorKind::QuantumSim);
        assert_eq!(ExecutorChoice::Auto.resolve(401), ExecutorKind::Emulator);
        assert_eq!("quantum".parse::<ExecutorChoice>().unwrap(), ExecutorChoice::Quantum);
        assert!("gpu".parse::<ExecutorChoice>().is_err());
    }

    #[test]
    fn band_of_single_run_is_the_trace() {
        let pts = convergence_band(&[vec![1, 2, 2, 3]]);
        for (p, v) in pts.iter().zip([1.0, 2.0, 2.0, 3.0]) {
            assert_eq!((p.mean, p.lower, p.upper), (v, v, v));
        }
        let pts = convergence_band(&[vec![1, 3], vec![2]]);
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[1].mean, 2.5);
    }

    #[test]
    fn complete_graph_convergence_is_flat() {
        let g = Graph::complete(5).unwrap();
        let cfg = ConvergenceConfig {
            runs: 30,
            ..ConvergenceConfig::new(3, 1)
        };
        for s in convergence_experiment(&g, &cfg).unwrap() {
            let last = s.points.last().unwrap();
            assert_eq!((last.mean, last.lower, last.upper), (3.0, 3.0, 3.0));
            if matches!(s.algorithm, Algorithm::BruteForce | Algorithm::Annealing) {
                assert!(s.points.iter().all(|p| (p.mean, p.lower, p.upper) == (3.0, 3.0, 3.0)));
            }
        }
        // a search run shows 0 until its first measurement, then 3
        let q = QuantumExecutor::default();
        for seed in 0..20 {
            let t = convergence_trace(&g, &cfg, Algorithm::Grover, &q, &mut rng_from_seed(seed)).unwrap();
            let first = t.iter().position(|&v| v != 0).unwrap();
            assert!(t[first..].iter().all(|&v| v == 3));
        }
    }

    #[test]
    fn convergence_means_are_monotone() {
        let g = erdos_renyi(10, 0.5, 2).unwrap();
        let opt = brute_force_densest(&g, 4).unwrap().edges as f64;
        let cfg = ConvergenceConfig {
            runs: 40,
            algorithms: vec![Algorithm::Emulator, Algorithm::BruteForce, Algorithm::Annealing],
            ..ConvergenceConfig::new(4, 3)
        };
        let series = convergence_experiment(&g, &cfg).unwrap();
        for s in &series {
            assert!(s.points.windows(2).all(|w| w[0].mean <= w[1].mean + 1e-12));
            assert!(s.points.iter().all(|p| p.lower <= p.mean && p.mean <= p.upper));
        }
        let brute = &series[1];
        assert_eq!(brute.points.len(), 210);
        assert_eq!(brute.points[209].mean, opt);
        assert_eq!(brute.points[209].lower, opt);
        assert_eq!(series, convergence_experiment(&g, &cfg).unwrap());
    }

    #[test]
    fn bootstrap_constant_data() {
        let data = vec![vec![7.0; 5], vec![7.0; 3]];
        let r = hierarchical_bootstrap(&data, 2000, 0.99, &mut rng_from_seed(0)).unwrap();
        assert_eq!((r.mean, r.lo, r.hi), (7.0, 7.0, 7.0));
        assert!(hierarchical_bootstrap(&[], 10, 0.99, &mut rng_from_seed(0)).is_err());
        assert!(hierarchical_bootstrap(&[vec![]], 10, 0.99, &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn bootstrap_bounded_support() {
        let data = vec![(1..=101).map(f64::from).collect::<Vec<_>>()];
        let r = hierarchical_bootstrap(&data, 2000, 0.99, &mut rng_from_seed(1)).unwrap();
        assert!(1.0 <= r.lo && r.lo <= r.mean && r.mean <= r.hi && r.hi <= 101.0);
        assert!((r.mean - 51.0).abs() < 3.0);
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let data = vec![vec![1.0, 5.0, 9.0], vec![2.0, 3.0]];
        let a = hierarchical_bootstrap(&data, 500, 0.99, &mut rng_from_seed(4)).unwrap();
        let b = hierarchical_bootstrap(&data, 500, 0.99, &mut rng_from_seed(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fit_exact_power_laws() {
        let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0, 1e5].iter().map(|&n: &f64| (n, 2.0 * n.sqrt())).collect();
        let f = power_law_fit(&pts).unwrap();
        assert!((f.a - 2.0).abs() < 1e-9 && (f.b - 0.5).abs() < 1e-9);
        let pts: Vec<(f64, f64)> = [6.0, 20.0, 210.0].iter().map(|&n| (n, 0.95 * n)).collect();
        assert!((power_law_fit(&pts).unwrap().b - 1.0).abs() < 1e-9);
        assert!(power_law_fit(&[(1.0, 1.0)]).is_err());
        assert!(power_law_fit(&[(1.0, 1.0), (2.0, 0.0)]).is_err());
        assert!(power_law_fit(&[(3.0, 1.0), (3.0, 2.0)]).is_err());
    }

    #[test]
    fn fit_table_parsing() {
        let pts = parse_fit_table("N,cost\n4,4\n16 8\n# note\n\n").unwrap();
        assert_eq!(pts, vec![(4.0, 4.0), (16.0, 8.0)]);
        assert!(parse_fit_table("4,4\nx,y\n").is_err());
        let scaling = "n,k,N,executor,mean_cost,ci_lo\n5,3,10,emulator,12.5,8\n6,3,20,emulator,20,16\n";
        assert_eq!(parse_fit_table(scaling).unwrap(), vec![(10.0, 12.5), (20.0, 20.0)]);
        assert!(parse_fit_table("a,b,c\n1,2,3\n").is_err());
    }

    #[test]
    fn admissible_size_filter() {
        assert_eq!(admissible_sizes(3, 3..=7, 20), vec![(3, 3), (4, 3), (5, 3), (6, 3)]);
    }

    #[test]
    fn small_scaling_run() {
        let cfg = ScalingConfig {
            graphs: 3,
            runs: 4,
            n_boot: 200,
            ..ScalingConfig::new(vec![(6, 3), (12, 6)], 5)
        };
        let out = scaling_experiment(&cfg).unwrap();
        assert_eq!(out.points[0].executor, ExecutorKind::QuantumSim);
        assert_eq!(out.points[1].executor, ExecutorKind::Emulator);
        assert_eq!(out.points[1].n_subsets, 924);
        assert_eq!(out.runs.len(), 24);
        for p in &out.points {
            assert!(p.ci_lo <= p.mean_cost && p.mean_cost <= p.ci_hi);
        }
        let single = with_jobs(Some(1), || scaling_experiment(&cfg)).unwrap().unwrap();
        assert_eq!(out, single);
    }

    #[test]
    fn scaling_capacity_error() {
        let cfg = ScalingConfig {
            max_qubits: 8,
            graphs: 1,
            runs: 1,
            ..ScalingConfig::new(vec![(6, 3)], 0)
        };
        assert!(matches!(scaling_experiment(&cfg), Err(DksError::Capacity { .. })));
    }

    #[test]
    fn sa_scaling_trivial_and_capped() {
        let mut cfg = SaScalingConfig {
            graphs: 3,
            runs_per_graph: 20,
            n_boot: 100,
            ..SaScalingConfig::new(vec![(6, 2)], 3)
        };
        let out = sa_scaling_experiment(&cfg).unwrap();
        // 180 steps over 15 subsets always finds the unique pair
        assert!(out.graphs.iter().all(|g| g.success_rate == 1.0 && g.cost == 180));
        assert_eq!((out.points[0].ci_lo, out.points[0].ci_hi), (180.0, 180.0));

        cfg.annealing.steps = 1;
        cfg.sizes = vec![(9, 4)];
        cfg.cost_cap = Some(12345);
        let out = sa_scaling_experiment(&cfg).unwrap();
        for g in &out.graphs {
            assert_eq!(g.capped, g.success_rate == 0.0);
            if g.capped {
                assert_eq!(g.cost, 12345);
            }
        }
    }
}
