//! Adaptive-threshold search with randomised Grover iteration counts.
//!
//! At level `m` the executor is asked for a subset with at least `m + 1`
//! edges, i.e. its oracle marks exactly the strictly improving subsets. The
//! measured candidate is checked classically; an improvement raises the level
//! to its edge count, anything else counts as a failure. The search stops
//! after `R` consecutive failures at one level, where `R` is the smallest
//! integer with `(1 - s)^R <= 1 - p`.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;
use std::io::Write;
use std::sync::{Arc, Mutex};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{grover_circuit, grover_iteration, CounterSpec};
use crate::error::{DksError, Result};
use crate::graph::{binomial, initial_threshold, Graph, VertexSubset};
use crate::rng::rng_from_seed;
use crate::sim::{register_marginal, run_circuit, sample_index, QuantumCircuit, StateVector, DEFAULT_MAX_QUBITS, NODE_REGISTER};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Target confidence `p` that no better subset remains at termination.
    pub confidence: f64,
    /// Per-attempt success floor `s`.
    pub success_floor: f64,
    /// Overrides the `R` derived from `confidence` and `success_floor`.
    pub required_failures: Option<u32>,
    pub seed: u64,
    /// Also charge one oracle call for the classical check of each candidate.
    pub charge_verification: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            confidence: 0.95,
            success_floor: 0.25,
            required_failures: None,
            seed: 0,
            charge_verification: false,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(seed: u64) -> Self {
        SearchConfig {
            seed,
            ..Default::default()
        }
    }

    /// The number of consecutive failures that ends the search.
    pub fn failures_needed(&self) -> Result<u32> {
        let derived = required_failures(self.confidence, self.success_floor)?;
        match self.required_failures {
            Some(0) => Err(DksError::input("required failures must be at least 1")),
            Some(r) => Ok(r),
            None => Ok(derived),
        }
    }
}

/// Smallest `R` with `(1 - s)^R <= 1 - p`.
pub fn required_failures(p: f64, s: f64) -> Result<u32> {
    if !(p > 0.0 && p < 1.0) || !(s > 0.0 && s < 1.0) {
        return Err(DksError::input(format!(
            "confidence {p} and success floor {s} must lie strictly between 0 and 1"
        )));
    }
    let ratio = (1.0 - p).ln() / (1.0 - s).ln();
    let mut r = ratio.ceil().max(1.0) as u32;
    // guard against ratio landing a hair above an integer through rounding
    while r > 1 && (1.0 - s).powi(r as i32 - 1) <= 1.0 - p {
        r -= 1;
    }
    Ok(r)
}

/// `T = ceil((pi/4) sqrt(N))`.
pub fn iteration_bound(n_subsets: u64) -> u64 {
    ((FRAC_PI_4 * (n_subsets as f64).sqrt()).ceil() as u64).max(1)
}

/// Uniform draw from `{0, ..., T-1}`.
pub fn sample_iteration_count<R: Rng + ?Sized>(n_subsets: u64, rng: &mut R) -> u64 {
    rng.gen_range(0..iteration_bound(n_subsets))
}

/// `(1/T) sum_{t<T} sin^2((2t+1) theta)` with `sin^2 theta = M/N`.
pub fn average_success_floor(marked: u64, n_subsets: u64) -> Result<f64> {
    if marked == 0 || marked > n_subsets {
        return Err(DksError::input(format!("need 1 <= M <= N, got M = {marked}, N = {n_subsets}")));
    }
    let theta = (marked as f64 / n_subsets as f64).sqrt().asin();
    let t_max = iteration_bound(n_subsets);
    let sum: f64 = (0..t_max)
        .map(|t| ((2 * t + 1) as f64 * theta).sin().powi(2))
        .sum();
    Ok(sum / t_max as f64)
}

/// What one executor call returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub subset: VertexSubset,
    pub oracle_calls: u64,
    pub iterations: u64,
}

/// A search subroutine: given a threshold, return a weight-k candidate that
/// has at least `threshold` edges with some probability.
pub trait Executor {
    fn attempt<R: Rng + ?Sized>(&mut self, g: &Graph, k: usize, threshold: usize, rng: &mut R) -> Result<Candidate>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Improvement,
    Failure,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Improvement => "improvement",
            Outcome::Failure => "failure",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Attempt {
    /// Level `m` in force for this attempt.
    pub threshold: usize,
    pub iterations: u64,
    pub subset: VertexSubset,
    pub edges: usize,
    pub oracle_calls: u64,
    pub cumulative_calls: u64,
    pub outcome: Outcome,
    pub best_so_far: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchTrace {
    pub attempts: Vec<Attempt>,
    /// Levels visited, strictly increasing, starting at the initial threshold.
    pub thresholds: Vec<usize>,
    pub total_calls: u64,
    pub best: VertexSubset,
    pub best_edges: usize,
    pub required_failures: u32,
}

impl SearchTrace {
    /// Number of threshold levels visited.
    pub fn levels(&self) -> usize {
        self.thresholds.len()
    }

    /// Best-so-far edge count at oracle calls `1..=max(total, 1)`. A
    /// measurement becomes visible once the calls of its attempt are spent;
    /// before the first measurement the value is 0.
    pub fn best_by_call(&self) -> Vec<usize> {
        let len = self.total_calls.max(1) as usize;
        let mut out = Vec::with_capacity(len);
        let mut best = 0;
        let mut it = self.attempts.iter().peekable();
        for call in 1..=len as u64 {
            while let Some(a) = it.peek() {
                if a.cumulative_calls <= call {
                    best = best.max(a.edges);
                    it.next();
                } else {
                    break;
                }
            }
            out.push(best);
        }
        out
    }

    pub fn csv_header() -> &'static str {
        "run_id,attempt_idx,m,t,charged_calls,cumulative_calls,measured_edges,outcome,best_so_far"
    }

    pub fn write_csv_rows<W: Write>(&self, run_id: u64, w: &mut W) -> Result<()> {
        for (i, a) in self.attempts.iter().enumerate() {
            writeln!(
                w,
                "{run_id},{i},{},{},{},{},{},{},{}",
                a.threshold,
                a.iterations,
                a.oracle_calls,
                a.cumulative_calls,
                a.edges,
                a.outcome.as_str(),
                a.best_so_far
            )?;
        }
        Ok(())
    }
}

/// Runs the adaptive search with an RNG seeded from `cfg.seed`.
pub fn adaptive_search<E: Executor>(g: &Graph, k: usize, cfg: &SearchConfig, ex: &mut E) -> Result<SearchTrace> {
    adaptive_search_with_rng(g, k, cfg, ex, &mut rng_from_seed(cfg.seed))
}

pub fn adaptive_search_with_rng<E: Executor, R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    cfg: &SearchConfig,
    ex: &mut E,
    rng: &mut R,
) -> Result<SearchTrace> {
    let r = cfg.failures_needed()?;
    let mut level = initial_threshold(g, k)?;
    let mut thresholds = vec![level];
    let mut attempts = Vec::new();
    let mut failures = 0;
    let mut total = 0u64;
    let mut best: Option<(VertexSubset, usize)> = None;

    while failures < r {
        let cand = ex.attempt(g, k, level + 1, rng)?;
        if cand.subset.len() != k {
            return Err(DksError::input(format!(
                "executor returned {} with weight {} instead of {k}",
                cand.subset,
                cand.subset.len()
            )));
        }
        let edges = g.edge_count(cand.subset)?;
        let charged = cand.oracle_calls + u64::from(cfg.charge_verification);
        total += charged;
        if best.is_none_or(|(_, b)| edges > b) {
            best = Some((cand.subset, edges));
        }
        let outcome = if edges > level {
            Outcome::Improvement
        } else {
            Outcome::Failure
        };
        attempts.push(Attempt {
            threshold: level,
            iterations: cand.iterations,
            subset: cand.subset,
            edges,
            oracle_calls: charged,
            cumulative_calls: total,
            outcome,
            best_so_far: best.map_or(0, |(_, b)| b),
        });
        match outcome {
            Outcome::Improvement => {
                level = edges;
                thresholds.push(level);
                failures = 0;
            }
            Outcome::Failure => failures += 1,
        }
    }

    let (best, best_edges) = best.expect("at least one attempt");
    Ok(SearchTrace {
        attempts,
        thresholds,
        total_calls: total,
        best,
        best_edges,
        required_failures: r,
    })
}

/// Measurement distribution of the vertex register restricted to weight-k
/// strings (the remainder is numerical leakage below 1e-9).
pub fn weight_k_distribution(sv: &StateVector, circuit: &QuantumCircuit, k: usize) -> Result<Vec<f64>> {
    let mut marginal = register_marginal(sv, circuit.layout(), NODE_REGISTER)?;
    for (x, p) in marginal.iter_mut().enumerate() {
        if x.count_ones() as usize != k {
            *p = 0.0;
        }
    }
    Ok(marginal)
}

struct LevelCache {
    state: StateVector,
    iteration: QuantumCircuit,
    k: usize,
    distributions: Vec<Arc<Vec<f64>>>,
}

impl LevelCache {
    fn new(g: &Graph, k: usize, threshold: usize) -> Result<Self> {
        let prep = grover_circuit(g, k, threshold, 0)?;
        let mut state = StateVector::zero(prep.num_qubits());
        state.apply(&prep)?;
        let first = weight_k_distribution(&state, &prep, k)?;
        Ok(LevelCache {
            state,
            iteration: grover_iteration(g, k, threshold)?,
            k,
            distributions: vec![Arc::new(first)],
        })
    }

    fn distribution(&mut self, t: usize) -> Result<Arc<Vec<f64>>> {
        while self.distributions.len() <= t {
            self.state.apply(&self.iteration)?;
            let d = weight_k_distribution(&self.state, &self.iteration, self.k)?;
            self.distributions.push(Arc::new(d));
        }
        Ok(Arc::clone(&self.distributions[t]))
    }
}

#[derive(Default)]
struct InstanceCache {
    key: Option<(Graph, usize)>,
    levels: HashMap<usize, Arc<Mutex<LevelCache>>>,
}

/// Statevector-backed executor: samples `t`, simulates the Grover circuit
/// with `t` iterations, measures the vertex register and charges `t` calls.
///
/// States after each iteration are memoised per threshold, so a circuit with
/// `t` iterations is simulated by continuing the `t - 1` state with the same
/// gate sequence. Clones share the memo.
#[derive(Clone)]
pub struct QuantumExecutor {
    max_qubits: usize,
    cache: Arc<Mutex<InstanceCache>>,
}

impl Default for QuantumExecutor {
    fn default() -> Self {
        QuantumExecutor::new(DEFAULT_MAX_QUBITS)
    }
}

impl QuantumExecutor {
    pub fn new(max_qubits: usize) -> Self {
        QuantumExecutor {
            max_qubits,
            cache: Arc::new(Mutex::new(InstanceCache::default())),
        }
    }

    /// Qubits needed for `(n, k)`: `n + L + 1`.
    pub fn qubits_needed(n: usize, k: usize) -> usize {
        let spec = CounterSpec::new(k, 0).expect("threshold 0 is always valid");
        n + spec.width()
    }

    pub fn check_capacity(&self, n: usize, k: usize) -> Result<()> {
        let needed = Self::qubits_needed(n, k);
        if needed > self.max_qubits {
            return Err(DksError::Capacity {
                needed,
                limit: self.max_qubits,
            });
        }
        Ok(())
    }

    fn level(&self, g: &Graph, k: usize, threshold: usize) -> Result<Arc<Mutex<LevelCache>>> {
        let mut cache = self.cache.lock().expect("cache poisoned");
        let matches = matches!(&cache.key, Some((cg, ck)) if cg == g && *ck == k);
        if !matches {
            cache.key = Some((g.clone(), k));
            cache.levels.clear();
        }
        if let Some(level) = cache.levels.get(&threshold) {
            return Ok(Arc::clone(level));
        }
        let level = Arc::new(Mutex::new(LevelCache::new(g, k, threshold)?));
        cache.levels.insert(threshold, Arc::clone(&level));
        Ok(level)
    }

    /// Vertex-register distribution after `t` iterations at `threshold`.
    pub fn distribution(&self, g: &Graph, k: usize, threshold: usize, t: usize) -> Result<Arc<Vec<f64>>> {
        self.check_capacity(g.n(), k)?;
        let level = self.level(g, k, threshold)?;
        let mut guard = level.lock().expect("level poisoned");
        guard.distribution(t)
    }

    /// One attempt with a caller-chosen iteration count.
    pub fn attempt_with_iterations<R: Rng + ?Sized>(
        &self,
        g: &Graph,
        k: usize,
        threshold: usize,
        t: u64,
        rng: &mut R,
    ) -> Result<Candidate> {
        let dist = self.distribution(g, k, threshold, t as usize)?;
        let subset = VertexSubset(sample_index(&dist, rng) as u64);
        Ok(Candidate {
            subset,
            oracle_calls: t,
            iterations: t,
        })
    }
}

impl Executor for QuantumExecutor {
    fn attempt<R: Rng + ?Sized>(&mut self, g: &Graph, k: usize, threshold: usize, rng: &mut R) -> Result<Candidate> {
        if k == 0 || k > g.n() {
            return Err(DksError::input(format!("k = {k} outside 1..={}", g.n())));
        }
        self.check_capacity(g.n(), k)?;
        let t = sample_iteration_count(binomial(g.n(), k), rng);
        self.attempt_with_iterations(g, k, threshold, t, rng)
    }
}

/// Builds and runs the full `t`-iteration circuit from scratch, then measures
/// exactly as [`QuantumExecutor`] does. Used to cross-check the memoised path.
pub fn quantum_attempt_uncached<R: Rng + ?Sized>(
    g: &Graph,
    k: usize,
    threshold: usize,
    t: u64,
    rng: &mut R,
) -> Result<Candidate> {
    let c = grover_circuit(g, k, threshold, t as usize)?;
    let sv = run_circuit(&c, &StateVector::zero(c.num_qubits()))?;
    let dist = weight_k_distribution(&sv, &c, k)?;
    Ok(Candidate {
        subset: VertexSubset(sample_index(&dist, rng) as u64),
        oracle_calls: t,
        iterations: t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{brute_force_densest, erdos_renyi, max_edges, KSubsets};
    use crate::rng::rng_from_seed;

    #[test]
    fn required_failures_values() {
        assert_eq!(required_failures(0.95, 0.25).unwrap(), 11);
        assert_eq!(required_failures(0.99, 0.25).unwrap(), 17);
        assert_eq!(required_failures(0.5, 0.5).unwrap(), 1);
        assert!(required_failures(1.0, 0.25).is_err());
        assert!(required_failures(0.95, 0.0).is_err());
        // (1 - s)^R <= 1 - p and (1 - s)^(R-1) > 1 - p
        for (p, s) in [(0.9, 0.1), (0.95, 0.3), (0.999, 0.25), (0.75, 0.5)] {
            let r = required_failures(p, s).unwrap() as i32;
            assert!((1.0 - s).powi(r) <= 1.0 - p);
            assert!(r == 1 || (1.0 - s).powi(r - 1) > 1.0 - p);
        }
    }

    #[test]
    fn iteration_bounds() {
        assert_eq!(iteration_bound(1), 1);
        assert_eq!(iteration_bound(6), 2);
        assert_eq!(iteration_bound(210), 12);
        let mut rng = rng_from_seed(0);
        assert!((0..100).all(|_| sample_iteration_count(1, &mut rng) == 0));
    }

    #[test]
    fn iteration_counts_are_uniform() {
        let mut rng = rng_from_seed(5);
        let draws = 12_000;
        let mut hist = [0usize; 12];
        for _ in 0..draws {
            hist[sample_iteration_count(210, &mut rng) as usize] += 1;
        }
        let p = 1.0 / 12.0;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for h in hist {
            assert!((h as f64 - draws as f64 * p).abs() < 3.0 * sigma, "{hist:?}");
        }
    }

    #[test]
    fn success_floor_values() {
        assert!((average_success_floor(7, 7).unwrap() - 1.0).abs() < 1e-12);
        // M = 1, N = 4: theta = pi/6, T = 2: (sin^2(pi/6) + sin^2(pi/2)) / 2
        let direct = ((std::f64::consts::PI / 6.0).sin().powi(2) + 1.0) / 2.0;
        assert!((average_success_floor(1, 4).unwrap() - direct).abs() < 1e-12);
        assert!((direct - 0.625).abs() < 1e-12);
        assert!(average_success_floor(0, 4).is_err());
    }

    /// Returns a marked subset every time; charges nothing.
    struct ExactExecutor;

    impl Executor for ExactExecutor {
        fn attempt<R: Rng + ?Sized>(&mut self, g: &Graph, k: usize, threshold: usize, rng: &mut R) -> Result<Candidate> {
            let marked: Vec<u64> = KSubsets::new(g.n(), k).filter(|&s| g.induced_edges(s) >= threshold).collect();
            let subset = if marked.is_empty() {
                KSubsets::new(g.n(), k).next().unwrap()
            } else {
                marked[rng.gen_range(0..marked.len())]
            };
            Ok(Candidate {
                subset: VertexSubset(subset),
                oracle_calls: 1,
                iterations: 1,
            })
        }
    }

    #[test]
    fn edgeless_graph_terminates_after_r_failures() {
        let g = Graph::empty(6).unwrap();
        let trace = adaptive_search(&g, 3, &SearchConfig::with_seed(1), &mut ExactExecutor).unwrap();
        assert_eq!(trace.attempts.len(), 11);
        assert!(trace.attempts.iter().all(|a| a.outcome == Outcome::Failure));
        assert_eq!(trace.best_edges, 0);
        assert_eq!(trace.thresholds, vec![0]);
    }

    #[test]
    fn complete_graph_certifies_maximum() {
        let g = Graph::complete(5).unwrap();
        let trace = adaptive_search(&g, 3, &SearchConfig::with_seed(2), &mut ExactExecutor).unwrap();
        // m0 = 3 = e_max already, so every attempt fails
        assert_eq!(trace.best_edges, 3);
        assert_eq!(trace.attempts.len(), 11);
        let g = crate::graph::Graph::new(6, [(0, 1), (0, 2), (1, 2), (3, 4)]).unwrap();
        let trace = adaptive_search(&g, 3, &SearchConfig::with_seed(2), &mut ExactExecutor).unwrap();
        assert_eq!(trace.best_edges, 3);
        assert_eq!(trace.attempts.last().unwrap().threshold, 3);
    }

    #[test]
    fn trace_invariants_and_accounting() {
        let g = erdos_renyi(8, 0.5, 3).unwrap();
        let mut ex = QuantumExecutor::default();
        for seed in 0..20 {
            let cfg = SearchConfig::with_seed(seed);
            let trace = adaptive_search(&g, 4, &cfg, &mut ex).unwrap();
            assert!(trace.thresholds.windows(2).all(|w| w[0] < w[1]));
            assert!(trace.levels() <= max_edges(4) - trace.thresholds[0] + 1);
            let sum_t: u64 = trace.attempts.iter().map(|a| a.iterations).sum();
            assert_eq!(trace.total_calls, sum_t);
            assert!(trace.attempts.windows(2).all(|w| w[0].cumulative_calls <= w[1].cumulative_calls));
            assert!(trace.attempts.windows(2).all(|w| w[0].best_so_far <= w[1].best_so_far));
            // terminates exactly at the R-th consecutive failure
            let tail = &trace.attempts[trace.attempts.len() - 11..];
            assert!(tail.iter().all(|a| a.outcome == Outcome::Failure));
            assert!(trace.attempts.len() == 11 || trace.attempts[trace.attempts.len() - 12].outcome == Outcome::Improvement);
            for a in &trace.attempts {
                assert_eq!(a.outcome == Outcome::Improvement, a.edges > a.threshold);
            }
            assert_eq!(trace.best_edges, trace.attempts.iter().map(|a| a.edges).max().unwrap());
        }
    }

    #[test]
    fn verification_charging_adds_one_per_attempt() {
        let g = erdos_renyi(7, 0.5, 1).unwrap();
        let mut ex = QuantumExecutor::default();
        let base = adaptive_search(&g, 3, &SearchConfig::with_seed(4), &mut ex).unwrap();
        let cfg = SearchConfig {
            charge_verification: true,
            ..SearchConfig::with_seed(4)
        };
        let charged = adaptive_search(&g, 3, &cfg, &mut ex).unwrap();
        assert_eq!(charged.total_calls, base.total_calls + base.attempts.len() as u64);
    }

    #[test]
    fn search_is_reproducible() {
        let g = erdos_renyi(7, 0.5, 9).unwrap();
        let cfg = SearchConfig::with_seed(77);
        let a = adaptive_search(&g, 3, &cfg, &mut QuantumExecutor::default()).unwrap();
        let b = adaptive_search(&g, 3, &cfg, &mut QuantumExecutor::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn memoised_and_fresh_simulation_agree() {
        let g = erdos_renyi(6, 0.5, 12).unwrap();
        let ex = QuantumExecutor::default();
        for t in [3u64, 0, 1, 2, 4] {
            let mut r1 = rng_from_seed(t);
            let mut r2 = rng_from_seed(t);
            for _ in 0..5 {
                let a = ex.attempt_with_iterations(&g, 3, 2, t, &mut r1).unwrap();
                let b = quantum_attempt_uncached(&g, 3, 2, t, &mut r2).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn zero_iterations_charge_nothing_and_are_uniform() {
        let g = Graph::path(4).unwrap();
        let ex = QuantumExecutor::default();
        let d = ex.distribution(&g, 2, 1, 0).unwrap();
        for (x, p) in d.iter().enumerate() {
            let e = if x.count_ones() == 2 { 1.0 / 6.0 } else { 0.0 };
            assert!((p - e).abs() < 1e-10);
        }
        let c = ex.attempt_with_iterations(&g, 2, 1, 0, &mut rng_from_seed(0)).unwrap();
        assert_eq!(c.oracle_calls, 0);
    }

    #[test]
    fn exact_grover_case_hits_unique_marked() {
        let g = Graph::new(4, [(0, 1), (0, 2), (1, 2)]).unwrap();
        let ex = QuantumExecutor::default();
        let mut rng = rng_from_seed(3);
        for _ in 0..200 {
            let c = ex.attempt_with_iterations(&g, 3, 3, 1, &mut rng).unwrap();
            assert_eq!(c.subset, VertexSubset(0b0111));
        }
    }

    #[test]
    fn path_hit_frequency_matches_half() {
        let g = Graph::path(4).unwrap();
        let ex = QuantumExecutor::default();
        let mut rng = rng_from_seed(21);
        let shots = 10_000;
        let hits = (0..shots)
            .filter(|_| {
                let c = ex.attempt_with_iterations(&g, 2, 1, 1, &mut rng).unwrap();
                g.induced_edges(c.subset.0) >= 1
            })
            .count();
        let freq = hits as f64 / shots as f64;
        let sigma = (0.25f64 / shots as f64).sqrt();
        assert!((freq - 0.5).abs() < 3.0 * sigma, "{freq}");
    }

    #[test]
    fn capacity_refusal() {
        let g = erdos_renyi(20, 0.5, 0).unwrap();
        let mut ex = QuantumExecutor::new(16);
        let err = ex.attempt(&g, 5, 3, &mut rng_from_seed(0)).unwrap_err();
        assert!(matches!(err, DksError::Capacity { needed: 25, limit: 16 }));
    }

    #[test]
    fn quantum_search_usually_finds_optimum() {
        let mut hits = 0;
        let mut total = 0;
        for gseed in 0..4 {
            let g = erdos_renyi(8, 0.5, gseed).unwrap();
            let opt = brute_force_densest(&g, 4).unwrap().edges;
            let ex = QuantumExecutor::default();
            for run in 0..25 {
                let trace = adaptive_search(&g, 4, &SearchConfig::with_seed(run), &mut ex.clone()).unwrap();
                hits += usize::from(trace.best_edges == opt);
                total += 1;
            }
        }
        assert!(hits as f64 >= 0.9 * total as f64, "{hits}/{total}");
    }

    #[test]
    fn best_by_call_alignment() {
        let trace = SearchTrace {
            attempts: vec![
                Attempt {
                    threshold: 1,
                    iterations: 2,
                    subset: VertexSubset(0b11),
                    edges: 2,
                    oracle_calls: 2,
                    cumulative_calls: 2,
                    outcome: Outcome::Improvement,
                    best_so_far: 2,
                },
                Attempt {
                    threshold: 2,
                    iterations: 0,
                    subset: VertexSubset(0b11),
                    edges: 1,
                    oracle_calls: 0,
                    cumulative_calls: 2,
                    outcome: Outcome::Failure,
                    best_so_far: 2,
                },
                Attempt {
                    threshold: 2,
                    iterations: 1,
                    subset: VertexSubset(0b11),
                    edges: 3,
                    oracle_calls: 1,
                    cumulative_calls: 3,
                    outcome: Outcome::Improvement,
                    best_so_far: 3,
                },
            ],
            thresholds: vec![1, 2, 3],
            total_calls: 3,
            best: VertexSubset(0b11),
            best_edges: 3,
            required_failures: 11,
        };
        assert_eq!(trace.best_by_call(), vec![0, 2, 3]);
        let mut buf = Vec::new();
        trace.write_csv_rows(7, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "7,0,1,2,2,2,2,improvement,2");
    }
}
