//! Graph model, random generators, exhaustive reference solver and the QUBO
//! penalty formulation of the densest k-subgraph problem.

use std::fmt;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DksError, Result};
use crate::rng::{rng_from_seed, DksRng};

/// Largest vertex count representable by a subset mask.
pub const MAX_VERTICES: usize = 63;

/// Default number of graphs drawn before unique-densest generation gives up.
pub const DEFAULT_REJECTION_CAP: usize = 10_000;

/// Upper bound on `C(n, k)` accepted by the exhaustive routines.
pub const ENUMERATION_LIMIT: u64 = 1 << 27;

/// Exact binomial coefficient. Returns 0 for `k > n`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).unwrap_or(u64::MAX)
}

/// Maximum number of edges a k-vertex subgraph can have, `k(k-1)/2`.
pub fn max_edges(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// A set of vertices stored as a bitmask; vertex `i` is bit `i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexSubset(pub u64);

impl VertexSubset {
    pub fn from_vertices(vertices: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &v in vertices {
            if v > MAX_VERTICES {
                return Err(DksError::input(format!("vertex {v} exceeds {MAX_VERTICES}")));
            }
            mask |= 1 << v;
        }
        Ok(VertexSubset(mask))
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, v: usize) -> bool {
        v < 64 && self.0 >> v & 1 == 1
    }

    /// Vertices in increasing order.
    pub fn vertices(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(v)
            }
        })
    }

    /// Bitstring with the highest vertex first (ket order), so lexicographic
    /// order of bitstrings is numeric order of masks.
    pub fn to_bitstring(self, n: usize) -> String {
        (0..n)
            .rev()
            .map(|i| if self.0 >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }
}

impl fmt::Display for VertexSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vs: Vec<String> = self.vertices().map(|v| v.to_string()).collect();
        write!(f, "{{{}}}", vs.join(", "))
    }
}

/// Iterator over all k-subsets of `n` vertices in increasing mask order
/// (Gosper's hack).
#[derive(Clone, Debug)]
pub struct KSubsets {
    next: Option<u64>,
    limit: u64,
}

impl KSubsets {
    pub fn new(n: usize, k: usize) -> Self {
        assert!(n <= MAX_VERTICES, "n = {n} exceeds mask width");
        let limit = 1u64 << n;
        let next = if k > n {
            None
        } else if k == 0 {
            Some(0)
        } else {
            Some((1u64 << k) - 1)
        };
        KSubsets { next, limit }
    }
}

impl Iterator for KSubsets {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let nxt = (((r ^ cur) >> 2) / c) | r;
            (nxt < self.limit).then_some(nxt)
        };
        Some(cur)
    }
}

/// Undirected simple graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<u64>,
}

impl Graph {
    /// Builds a graph from unordered pairs. Pairs are normalised to `i < j`
    /// and stored sorted.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 || n > MAX_VERTICES {
            return Err(DksError::input(format!(
                "vertex count must be in 1..={MAX_VERTICES}, got {n}"
            )));
        }
        let mut adj = vec![0u64; n];
        let mut list = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(DksError::input(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(DksError::input(format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if adj[i] >> j & 1 == 1 {
                return Err(DksError::input(format!("duplicate edge ({i}, {j})")));
            }
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
            list.push((i, j));
        }
        list.sort_unstable();
        Ok(Graph { n, edges: list, adj })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Graph::new(n, [])
    }

    pub fn complete(n: usize) -> Result<Self> {
        Graph::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Result<Self> {
        Graph::new(n, (1..n).map(|i| (i - 1, i)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.adj[i] >> j & 1 == 1
    }

    /// Neighbourhood of `v` as a mask.
    pub fn neighbours(&self, v: usize) -> u64 {
        self.adj[v]
    }

    pub fn full_mask(&self) -> u64 {
        (1u64 << self.n) - 1
    }

    /// Number of edges induced by `s`. This is the objective evaluation that
    /// the benchmarks count as one oracle call.
    pub fn edge_count(&self, s: VertexSubset) -> Result<usize> {
        if s.0 & !self.full_mask() != 0 {
            return Err(DksError::input(format!(
                "subset {:#x} references vertices outside 0..{}",
                s.0, self.n
            )));
        }
        Ok(self.induced_edges(s.0))
    }

    /// Unchecked variant of [`Graph::edge_count`] for hot loops; bits at or
    /// above `n` are ignored.
    #[inline]
    pub fn induced_edges(&self, mask: u64) -> usize {
        let mask = mask & self.full_mask();
        let mut rest = mask;
        let mut twice = 0u32;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            twice += (self.adj[v] & mask).count_ones();
        }
        (twice / 2) as usize
    }

    /// Number of k-subsets inducing at least `m` edges.
    pub fn count_at_least(&self, k: usize, m: usize) -> u64 {
        KSubsets::new(self.n, k)
            .filter(|&s| self.induced_edges(s) >= m)
            .count() as u64
    }

    /// Serialises to the edge-list text format: `"n m"` then one `"i j"` line
    /// per edge, sorted, newline-terminated.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        for &(i, j) in &self.edges {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }

    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(DksError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let [n, m] = parse_pair(header, 1)?;
        let mut edges = Vec::with_capacity(m);
        for idx in 0..m {
            let (lineno, line) = lines.next().ok_or_else(|| DksError::Parse {
                line: idx + 2,
                msg: format!("expected {m} edges, found {idx}"),
            })?;
            let [i, j] = parse_pair(line, lineno + 1)?;
            if i >= j || j >= n {
                return Err(DksError::Parse {
                    line: lineno + 1,
                    msg: format!("edge ({i}, {j}) violates 0 <= i < j < {n}"),
                });
            }
            edges.push((i, j));
        }
        if let Some((lineno, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(DksError::Parse {
                line: lineno + 1,
                msg: format!("unexpected trailing content {extra:?}"),
            });
        }
        Graph::new(n, edges).map_err(|e| DksError::Parse {
            line: 1,
            msg: e.to_string(),
        })
    }

    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        Graph::parse_edge_list(&fs::read_to_string(path)?)
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_edge_list())?;
        Ok(())
    }
}

fn parse_pair(line: &str, lineno: usize) -> Result<[usize; 2]> {
    let err = |msg: String| DksError::Parse { line: lineno, msg };
    let mut parts = line.split(' ');
    let mut out = [0usize; 2];
    for slot in &mut out {
        let tok = parts.next().ok_or_else(|| err(format!("expected two integers in {line:?}")))?;
        *slot = tok
            .parse()
            .map_err(|_| err(format!("invalid integer {tok:?}")))?;
    }
    if parts.next().is_some() {
        return Err(err(format!("expected exactly two integers in {line:?}")));
    }
    Ok(out)
}

/// Expected edge count of a random k-subset, rounded down:
/// `floor(|E| / C(n,2) * C(k,2))`.
pub fn initial_threshold(g: &Graph, k: usize) -> Result<usize> {
    if k == 0 || k > g.n() {
        return Err(DksError::input(format!("k = {k} outside 1..={}", g.n())));
    }
    let pairs = max_edges(g.n());
    if pairs == 0 {
        return Ok(0);
    }
    // exact integer floor of |E| * C(k,2) / C(n,2)
    Ok(g.num_edges() * max_edges(k) / pairs)
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(DksError::input(format!("edge probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// G(n, p) with pairs visited in lexicographic order.
pub fn erdos_renyi_with_rng<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    check_probability(p)?;
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges)
}

pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    erdos_renyi_with_rng(n, p, &mut rng_from_seed(seed))
}

fn check_enumerable(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Err(DksError::input(format!("k = {k} exceeds n = {n}")));
    }
    let count = binomial(n, k);
    if count > ENUMERATION_LIMIT {
        return Err(DksError::input(format!(
            "C({n}, {k}) = {count} exceeds the enumeration limit {ENUMERATION_LIMIT}"
        )));
    }
    Ok(count)
}

/// Returns true iff exactly one k-subset attains the maximum edge count.
pub fn has_unique_densest(g: &Graph, k: usize) -> bool {
    let mut best = None;
    let mut ties = 0usize;
    for s in KSubsets::new(g.n(), k) {
        let e = g.induced_edges(s);
        match best {
            Some(b) if e < b => {}
            Some(b) if e == b => ties += 1,
            _ => {
                best = Some(e);
                ties = 1;
            }
        }
    }
    ties == 1
}

/// Rejection-samples G(n, p) until the densest k-subgraph is unique.
pub fn erdos_renyi_unique_densest_with_cap(
    n: usize,
    p: f64,
    k: usize,
    seed: u64,
    cap: usize,
) -> Result<Graph> {
    check_probability(p)?;
    check_enumerable(n, k)?;
    let mut rng: DksRng = rng_from_seed(seed);
    for _ in 0..cap {
        let g = erdos_renyi_with_rng(n, p, &mut rng)?;
        if has_unique_densest(&g, k) {
            return Ok(g);
        }
    }
    Err(DksError::Generation {
        attempts: cap,
        reason: format!("no G({n}, {p}) sample had a unique densest {k}-subgraph"),
    })
}

pub fn erdos_renyi_unique_densest(n: usize, p: f64, k: usize, seed: u64) -> Result<Graph> {
    erdos_renyi_unique_densest_with_cap(n, p, k, seed, DEFAULT_REJECTION_CAP)
}

/// Result of exhaustive search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BruteForceResult {
    pub subset: VertexSubset,
    pub edges: usize,
    /// Objective evaluations performed, always `C(n, k)`.
    pub calls: u64,
}

/// Exhaustive search; ties resolve to the numerically smallest mask.
pub fn brute_force_densest(g: &Graph, k: usize) -> Result<BruteForceResult> {
    let calls = check_enumerable(g.n(), k)?;
    let mut best = (0u64, 0usize);
    let mut seen = false;
    for s in KSubsets::new(g.n(), k) {
        let e = g.induced_edges(s);
        if !seen || e > best.1 {
            best = (s, e);
            seen = true;
        }
    }
    Ok(BruteForceResult {
        subset: VertexSubset(best.0),
        edges: best.1,
        calls,
    })
}

/// QUBO form `sum_i Q_ii x_i + sum_{i<j} Q_ij x_i x_j + offset` of the
/// penalised objective `-edges(x) + lambda (|x| - k)^2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuboModel {
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
    /// `Q_ii = lambda (1 - 2k)`.
    pub linear: Vec<f64>,
    /// Row-major `n x n`; only entries with `i < j` are meaningful.
    quadratic: Vec<f64>,
    /// `lambda k^2`, kept so energies equal the unexpanded objective.
    pub offset: f64,
}

impl QuboModel {
    /// `max(k(k-1)/2, k) + 1`. Adding one vertex to a k-subset gains at
    /// most `k` edges, so for `k <= 2` the penalty must also exceed `k`.
    pub fn default_lambda(k: usize) -> f64 {
        max_edges(k).max(k) as f64 + 1.0
    }

    /// `Q_ij` for `i != j` (symmetric access).
    pub fn quadratic(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.quadratic[a * self.n + b]
    }

    pub fn energy(&self, x: &[bool]) -> Result<f64> {
        if x.len() != self.n {
            return Err(DksError::input(format!(
                "bit vector has length {}, model has {} variables",
                x.len(),
                self.n
            )));
        }
        let mut e = self.offset;
        for i in 0..self.n {
            if !x[i] {
                continue;
            }
            e += self.linear[i];
            for (j, &xj) in x.iter().enumerate().skip(i + 1) {
                if xj {
                    e += self.quadratic[i * self.n + j];
                }
            }
        }
        Ok(e)
    }

    /// Energy of the assignment given as a mask.
    pub fn energy_of_mask(&self, mask: u64) -> f64 {
        let bits: Vec<bool> = (0..self.n).map(|i| mask >> i & 1 == 1).collect();
        self.energy(&bits).expect("length matches by construction")
    }
}

pub fn qubo_build(g: &Graph, k: usize, lambda: f64) -> Result<QuboModel> {
    let bound = max_edges(k) as f64;
    if lambda.is_nan() || lambda <= bound {
        return Err(DksError::input(format!(
            "penalty {lambda} must exceed k(k-1)/2 = {bound}"
        )));
    }
    if k > g.n() {
        return Err(DksError::input(format!("k = {k} exceeds n = {}", g.n())));
    }
    let n = g.n();
    let mut quadratic = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let a = if g.has_edge(i, j) { 1.0 } else { 0.0 };
            quadratic[i * n + j] = 2.0 * lambda - a;
        }
    }
    Ok(QuboModel {
        n,
        k,
        lambda,
        linear: vec![lambda * (1.0 - 2.0 * k as f64); n],
        quadratic,
        offset: lambda * (k * k) as f64,
    })
}

pub fn qubo_energy(q: &QuboModel, x: &[bool]) -> Result<f64> {
    q.energy(x)
}
