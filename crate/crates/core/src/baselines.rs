//! Classical comparison procedures: brute force, the black-box Grover
//! emulator, and tabu simulated annealing. All of them charge one oracle call
//! per logical oracle query.

use std::io::Write;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DksError, Result};
use crate::graph::{binomial, max_edges, Graph, KSubsets, VertexSubset, ENUMERATION_LIMIT};
use crate::rng::rng_from_seed;
use crate::search::{sample_iteration_count, Candidate, Executor};

/// Probability that the emulator's coin lands on the marked branch.
pub const EMULATOR_HIT_PROBABILITY: f64 = 0.25;

/// Expected calls for random-order brute force to reach confidence `p`.
pub fn brute_force_expected_cost(n_subsets: u64, p_target: f64) -> f64 {
    p_target * n_subsets as f64
}

/// Best-so-far edge count per oracle call when all k-subsets are examined in
/// a uniformly random order. The result has length `C(n, k)`.
pub fn brute_force_random_order<R: Rng + ?Sized>(g: &Graph, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    check_k(g, k)?;
    let total = binomial(g.n(), k);
    if total > ENUMERATION_LIMIT {
        return Err(DksError::input(format!("C({}, {k}) = {total} is too large to enumerate", g.n())));
    }
    let mut counts: Vec<usize> = KSubsets::new(g.n(), k).map(|s| g.induced_edges(s)).collect();
    counts.shuffle(rng);
    let mut best = 0;
    Ok(counts
        .into_iter()
        .map(|c| {
            best = best.max(c);
            best
        })
        .collect())
}

fn check_k(g: &Graph, k: usize) -> Result<()> {
    if k > g.n() {
        return Err(DksError::input(format!("k = {k} exceeds n = {}", g.n())));
    }
    Ok(())
}

fn uniform_subset<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> VertexSubset {
    VertexSubset(sample(rng, n, k).iter().fold(0u64, |m, v| m | (1 << v)))
}

#[derive(Debug)]
struct EmulatorTable {
    graph: Graph,
    k: usize,
    /// `first[m]` is the lexicographically first k-subset with at least `m`
    /// edges, for `m` in `0..=E_max + 1`.
    first: Vec<Option<u64>>,
}

impl EmulatorTable {
    fn build(g: &Graph, k: usize) -> Result<Self> {
        check_k(g, k)?;
        let total = binomial(g.n(), k);
        if total > ENUMERATION_LIMIT {
            return Err(DksError::input(format!("C({}, {k}) = {total} is too large to enumerate", g.n())));
        }
        let e_max = max_edges(k);
        let mut first = vec![None; e_max + 2];
        let mut filled = 0;
        for s in KSubsets::new(g.n(), k) {
            let e = g.induced_edges(s);
            while filled <= e {
                first[filled] = Some(s);
                filled += 1;
            }
            if filled > e_max {
                break;
            }
        }
        Ok(EmulatorTable {
            graph: g.clone(),
            k,
            first,
        })
    }
}

/// Black-box stand-in for the quantum executor at sizes beyond simulation.
///
/// Samples `t` exactly like the quantum executor and charges it. With
/// probability 1/4 it returns the lexicographically first subset meeting the
/// threshold (if there is one); otherwise a uniform k-subset. The internal
/// enumeration is free. Clones share the per-instance table.
#[derive(Clone, Debug, Default)]
pub struct BlackBoxGrover {
    table: Option<Arc<EmulatorTable>>,
}

impl BlackBoxGrover {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds the lookup table for `(g, k)` ahead of time.
    pub fn prepared(g: &Graph, k: usize) -> Result<Self> {
        Ok(BlackBoxGrover {
            table: Some(Arc::new(EmulatorTable::build(g, k)?)),
        })
    }

    fn table(&mut self, g: &Graph, k: usize) -> Result<Arc<EmulatorTable>> {
        match &self.table {
            Some(t) if t.k == k && t.graph == *g => Ok(Arc::clone(t)),
            _ => {
                let t = Arc::new(EmulatorTable::build(g, k)?);
                self.table = Some(Arc::clone(&t));
                Ok(t)
            }
        }
    }

    /// Like [`Executor::attempt`], also reporting whether the coin chose the
    /// marked branch.
    pub fn attempt_instrumented<R: Rng + ?Sized>(
        &mut self,
        g: &Graph,
        k: usize,
        threshold: usize,
        rng: &mut R,
    ) -> Result<(Candidate, bool)> {
        let table = self.table(g, k)?;
        let t = sample_iteration_count(binomial(g.n(), k), rng);
        let heads = rng.gen_bool(EMULATOR_HIT_PROBABILITY);
        let marked = table.first.get(threshold).copied().flatten();
        let subset = match (heads, marked) {
            (true, Some(s)) => VertexSubset(s),
            _ => uniform_subset(g.n(), k, rng),
        };
        Ok((
            Candidate {
                subset,
                oracle_calls: t,
                iterations: t,
            },
            heads,
        ))
    }
}

impl Executor for BlackBoxGrover {
    fn attempt<R: Rng + ?Sized>(&mut self, g: &Graph, k: usize, threshold: usize, rng: &mut R) -> Result<Candidate> {
        self.attempt_instrumented(g, k, threshold, rng).map(|(c, _)| c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaParams {
    /// Oracle calls per run, `d`.
    pub steps: usize,
    pub initial_temperature: f64,
    pub cooling: f64,
    pub tenure: usize,
    pub seed: u64,
}

impl SaParams {
    /// `d = 30 n`, `T0 = 1`, `alpha = 0.98`, tenure `k`.
    pub fn defaults_for(n: usize, k: usize) -> Self {
        SaParams {
            steps: (30 * n).max(1),
            initial_temperature: 1.0,
            cooling: 0.98,
            tenure: k,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(DksError::input("SA needs at least one step"));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(DksError::input(format!("cooling factor {} outside (0, 1)", self.cooling)));
        }
        if self.initial_temperature.is_nan() || self.initial_temperature < 0.0 {
            return Err(DksError::input("initial temperature must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SaStep {
    pub current_edges: usize,
    pub best_so_far: usize,
    pub temperature: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SaRun {
    pub best: VertexSubset,
    pub best_edges: usize,
    /// One entry per oracle call.
    pub trace: Vec<SaStep>,
}

impl SaRun {
    pub fn calls(&self) -> usize {
        self.trace.len()
    }

    pub fn best_by_call(&self) -> Vec<usize> {
        self.trace.iter().map(|s| s.best_so_far).collect()
    }

    pub fn csv_header() -> &'static str {
        "run_id,call_idx,current_edges,best_so_far,temperature,accepted"
    }

    pub fn write_csv_rows<W: Write>(&self, run_id: u64, w: &mut W) -> Result<()> {
        for (i, s) in self.trace.iter().enumerate() {
            writeln!(
                w,
                "{run_id},{},{},{},{},{}",
                i + 1,
                s.current_edges,
                s.best_so_far,
                s.temperature,
                u8::from(s.accepted)
            )?;
        }
        Ok(())
    }
}

/// Seeds an RNG from `params.seed` and runs [`simulated_annealing_run`].
pub fn simulated_annealing(g: &Graph, k: usize, params: &SaParams) -> Result<SaRun> {
    simulated_annealing_run(g, k, params, &mut rng_from_seed(params.seed))
}

fn pick<R: Rng + ?Sized>(mask: u64, rng: &mut R) -> usize {
    let count = mask.count_ones();
    let mut idx = rng.gen_range(0..count);
    let mut m = mask;
    loop {
        let v = m.trailing_zeros();
        if idx == 0 {
            return v as usize;
        }
        idx -= 1;
        m &= m - 1;
    }
}

/// One simulated annealing run over k-subsets with a vertex-swap move and a
/// vertex tabu list.
pub fn simulated_annealing_run<R: Rng + ?Sized>(g: &Graph, k: usize, params: &SaParams, rng: &mut R) -> Result<SaRun> {
    check_k(g, k)?;
    params.validate()?;
    let n = g.n();
    let mut current = uniform_subset(n, k, rng).0;
    let mut cur_edges = g.induced_edges(current);
    let mut best = current;
    let mut best_edges = cur_edges;
    let mut trace = vec![SaStep {
        current_edges: cur_edges,
        best_so_far: best_edges,
        temperature: params.initial_temperature,
        accepted: true,
    }];
    if k == 0 || k == n {
        return Ok(SaRun {
            best: VertexSubset(best),
            best_edges,
            trace,
        });
    }

    let full = g.full_mask();
    let mut tabu_until = vec![0usize; n];
    for step in 1..params.steps {
        let temperature = params.initial_temperature * params.cooling.powi(step as i32);
        let free = (0..n).filter(|&v| tabu_until[v] <= step).fold(0u64, |m, v| m | (1 << v));
        let (ins, outs, aspiration) = if current & free != 0 && !current & full & free != 0 {
            (current & free, !current & full & free, false)
        } else {
            (current, !current & full, true)
        };
        let u = pick(ins, rng);
        let v = pick(outs, rng);
        let next = (current & !(1 << u)) | (1 << v);
        let next_edges = g.induced_edges(next);
        let delta = next_edges as f64 - cur_edges as f64;
        let accepted = if aspiration {
            next_edges > best_edges
        } else if delta >= 0.0 {
            true
        } else if temperature > 0.0 {
            rng.gen::<f64>() < (delta / temperature).exp()
        } else {
            false
        };
        if accepted {
            current = next;
            cur_edges = next_edges;
            tabu_until[u] = step + 1 + params.tenure;
            tabu_until[v] = step + 1 + params.tenure;
            if cur_edges > best_edges {
                best = current;
                best_edges = cur_edges;
            }
        }
        trace.push(SaStep {
            current_edges: cur_edges,
            best_so_far: best_edges,
            temperature,
            accepted,
        });
    }
    Ok(SaRun {
        best: VertexSubset(best),
        best_edges,
        trace,
    })
}

/// Independent runs needed to hit a target with 95% confidence given a
/// single-run success probability `s`: `max(1, ln 0.05 / ln(1 - s))`.
pub fn sa_required_runs(s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(DksError::input(format!("success probability {s} must lie in (0, 1]")));
    }
    if s == 1.0 {
        return Ok(1.0);
    }
    let t = 0.05f64.ln() / (1.0 - s).ln();
    // 1 - 0.95 is not exactly 0.05 in binary; keep integral ratios integral
    let t = if (t - t.round()).abs() < 1e-9 { t.round() } else { t };
    Ok(t.max(1.0))
}

/// `ceil(T d)` with `T` from [`sa_required_runs`].
pub fn sa_cost(s: f64, steps: usize) -> Result<u64> {
    Ok((sa_required_runs(s)? * steps as f64).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{brute_force_densest, erdos_renyi, erdos_renyi_unique_densest};

    #[test]
    fn brute_force_cost() {
        assert!((brute_force_expected_cost(210, 0.95) - 199.5).abs() < 1e-12);
        assert!((brute_force_expected_cost(1, 0.95) - 0.95).abs() < 1e-12);
        assert!((brute_force_expected_cost(1_000_000, 0.95) - 950_000.0).abs() < 1e-6);
    }

    #[test]
    fn random_order_brute_force_reaches_optimum() {
        let g = erdos_renyi(10, 0.5, 4).unwrap();
        let opt = brute_force_densest(&g, 4).unwrap().edges;
        let mut rng = rng_from_seed(1);
        for _ in 0..10 {
            let t = brute_force_random_order(&g, 4, &mut rng).unwrap();
            assert_eq!(t.len(), 210);
            assert!(t.windows(2).all(|w| w[0] <= w[1]));
            assert_eq!(*t.last().unwrap(), opt);
        }
    }

    #[test]
    fn emulator_threshold_zero_returns_first_subset() {
        let g = erdos_renyi(7, 0.5, 2).unwrap();
        let mut em = BlackBoxGrover::new();
        let mut rng = rng_from_seed(3);
        for _ in 0..200 {
            let (c, heads) = em.attempt_instrumented(&g, 3, 0, &mut rng).unwrap();
            assert_eq!(c.subset.len(), 3);
            if heads {
                assert_eq!(c.subset, VertexSubset(0b111));
            }
        }
    }

    #[test]
    fn emulator_first_marked_is_lexicographic() {
        let g = Graph::new(5, [(3, 4), (2, 4), (0, 1)]).unwrap();
        let em = BlackBoxGrover::prepared(&g, 2).unwrap();
        let table = em.table.as_ref().unwrap();
        assert_eq!(table.first[0], Some(0b00011));
        assert_eq!(table.first[1], Some(0b00011));
        assert_eq!(table.first[2], None);
        let g = Graph::new(5, [(3, 4), (2, 4), (2, 3)]).unwrap();
        let em = BlackBoxGrover::prepared(&g, 3).unwrap();
        let table = em.table.as_ref().unwrap();
        assert_eq!(table.first[1], Some(0b01101));
        assert_eq!(table.first[3], Some(0b11100));
        assert_eq!(table.first[4], None);
    }

    #[test]
    fn emulator_unreachable_threshold_is_uniform() {
        let g = Graph::path(5).unwrap();
        let mut em = BlackBoxGrover::new();
        let mut rng = rng_from_seed(8);
        let shots = 10_000;
        let mut hist = std::collections::HashMap::new();
        for _ in 0..shots {
            let c = em.attempt(&g, 2, 2, &mut rng).unwrap();
            *hist.entry(c.subset).or_insert(0usize) += 1;
        }
        assert_eq!(hist.len(), 10);
        let p = 0.1;
        let sigma = (shots as f64 * p * (1.0 - p)).sqrt();
        for &h in hist.values() {
            assert!((h as f64 - shots as f64 * p).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn emulator_heads_frequency() {
        let g = erdos_renyi(8, 0.5, 5).unwrap();
        let mut em = BlackBoxGrover::new();
        let mut rng = rng_from_seed(13);
        let shots = 10_000;
        let heads = (0..shots)
            .filter(|_| em.attempt_instrumented(&g, 3, 2, &mut rng).unwrap().1)
            .count();
        let sigma = (shots as f64 * 0.25 * 0.75).sqrt();
        assert!((heads as f64 - 2500.0).abs() < 3.0 * sigma, "{heads}");
    }

    #[test]
    fn sa_complete_graph() {
        let g = Graph::complete(5).unwrap();
        let params = SaParams::defaults_for(5, 3);
        let run = simulated_annealing(&g, 3, &params).unwrap();
        assert!(run.trace.iter().all(|s| s.best_so_far == 3));
        assert_eq!(run.calls(), 150);
    }

    #[test]
    fn sa_single_step() {
        let g = erdos_renyi(8, 0.5, 1).unwrap();
        let params = SaParams {
            steps: 1,
            ..SaParams::defaults_for(8, 3)
        };
        let run = simulated_annealing(&g, 3, &params).unwrap();
        assert_eq!(run.calls(), 1);
        assert_eq!(run.best_edges, g.induced_edges(run.best.0));
    }

    #[test]
    fn sa_degenerate_full_set() {
        let g = erdos_renyi(6, 0.5, 1).unwrap();
        let run = simulated_annealing(&g, 6, &SaParams::defaults_for(6, 6)).unwrap();
        assert_eq!(run.best, VertexSubset(0b111111));
        assert_eq!(run.calls(), 1);
        assert!(simulated_annealing(&g, 7, &SaParams::defaults_for(6, 7)).is_err());
    }

    #[test]
    fn sa_trace_properties() {
        for seed in 0..20 {
            let g = erdos_renyi(10, 0.5, seed).unwrap();
            let params = SaParams {
                seed,
                ..SaParams::defaults_for(10, 4)
            };
            let run = simulated_annealing(&g, 4, &params).unwrap();
            assert_eq!(run.calls(), params.steps);
            assert!(run.trace.windows(2).all(|w| w[0].best_so_far <= w[1].best_so_far));
            assert_eq!(run.best_edges, run.trace.last().unwrap().best_so_far);
            assert_eq!(run.best.len(), 4);
            assert_eq!(g.induced_edges(run.best.0), run.best_edges);
        }
    }

    #[test]
    fn zero_temperature_is_hill_climbing() {
        for seed in 0..20 {
            let g = erdos_renyi(10, 0.5, seed).unwrap();
            let params = SaParams {
                initial_temperature: 0.0,
                tenure: 0,
                seed,
                ..SaParams::defaults_for(10, 4)
            };
            let run = simulated_annealing(&g, 4, &params).unwrap();
            for w in run.trace.windows(2) {
                assert!(w[1].current_edges >= w[0].current_edges);
            }
        }
    }

    #[test]
    fn sa_usually_succeeds_on_small_instances() {
        let g = erdos_renyi_unique_densest(8, 0.5, 3, 6).unwrap();
        let opt = brute_force_densest(&g, 3).unwrap().edges;
        let mut rng = rng_from_seed(0);
        let params = SaParams::defaults_for(8, 3);
        let wins = (0..200)
            .filter(|_| simulated_annealing_run(&g, 3, &params, &mut rng).unwrap().best_edges == opt)
            .count();
        assert!(wins > 0);
    }

    #[test]
    fn required_runs_values() {
        assert_eq!(sa_required_runs(0.95).unwrap(), 1.0);
        assert_eq!(sa_required_runs(1.0).unwrap(), 1.0);
        assert!((sa_required_runs(0.25).unwrap() - 10.4133).abs() < 1e-3);
        assert!((sa_required_runs(0.5).unwrap() - 4.3219).abs() < 1e-3);
        assert_eq!(sa_cost(0.5, 100).unwrap(), 433);
        assert_eq!(sa_cost(0.25, 100).unwrap(), 1042);
        assert_eq!(sa_cost(1.0, 240).unwrap(), 240);
        assert!(sa_required_runs(0.0).is_err());
        let mut prev = f64::INFINITY;
        for i in 1..=100 {
            let t = sa_required_runs(i as f64 / 100.0).unwrap();
            assert!(t <= prev);
            prev = t;
        }
    }
}
