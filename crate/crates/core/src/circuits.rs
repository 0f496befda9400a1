//! Gate-level builders for the search circuit: Dicke-state preparation, the
//! Fourier-basis edge counter with its folded two's-complement comparator,
//! the phase oracle, the diffusion operator and resource accounting.
//!
//! Counter convention: counter qubit `b` (qubit `n + b`, with `b = L` being
//! `q_res`) holds bit `b` of the count. In the Fourier basis, adding `a`
//! rotates qubit `b` by `2 pi a / 2^(b+1)`, which is the basis produced by a
//! swap-free QFT; the inverse QFT below therefore needs no swaps.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{DksError, Result};
use crate::graph::{max_edges, Graph};
use crate::sim::{GateKind, QuantumCircuit, RegisterLayout, RESULT_REGISTER};

/// Sizing of the edge counter for a given `k` and threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CounterSpec {
    /// `k(k-1)/2`.
    pub e_max: usize,
    /// `L = ceil(log2(e_max + 1))`; the counter has `L + 1` qubits.
    pub count_bits: usize,
    /// Marked states satisfy `count >= threshold`.
    pub threshold: usize,
}

impl CounterSpec {
    /// Accepts thresholds up to `e_max + 1`; the top value marks nothing and
    /// is what the search uses once the current best is already `e_max`.
    pub fn new(k: usize, threshold: usize) -> Result<Self> {
        let e_max = max_edges(k);
        if threshold > e_max + 1 {
            return Err(DksError::input(format!(
                "threshold {threshold} outside 0..={} for k = {k}",
                e_max + 1
            )));
        }
        Ok(CounterSpec {
            e_max,
            count_bits: count_bits_for(e_max),
            threshold,
        })
    }

    /// Total counter width `L + 1`.
    pub fn width(&self) -> usize {
        self.count_bits + 1
    }

    pub fn modulus(&self) -> u64 {
        1 << self.width()
    }

    /// `C = 2^(L+1) - m (mod 2^(L+1))`; zero when `m = 0`.
    pub fn comparator_constant(&self) -> u64 {
        (self.modulus() - self.threshold as u64 % self.modulus()) % self.modulus()
    }

    /// Register layout of the full search circuit on `n` vertices.
    pub fn layout(&self, n: usize) -> RegisterLayout {
        RegisterLayout::algorithm(n, self.count_bits)
    }
}

/// Smallest `L` with `2^L >= e_max + 1`.
pub fn count_bits_for(e_max: usize) -> usize {
    (usize::BITS - e_max.leading_zeros()) as usize
}

/// Deterministic Dicke-state preparation on `n` qubits: `X` on the top `k`
/// qubits followed by the split-and-cyclic-shift network.
///
/// Applied to `|0...0>` this yields the uniform superposition of all
/// weight-`k` strings.
pub fn dicke_preparation(n: usize, k: usize) -> Result<QuantumCircuit> {
    if k > n {
        return Err(DksError::input(format!("k = {k} exceeds n = {n}")));
    }
    let mut c = QuantumCircuit::new(RegisterLayout::node_only(n));
    for q in n - k..n {
        c.add(GateKind::X, q, &[])?;
    }
    for m in (2..=n).rev() {
        split_and_cyclic_shift(&mut c, m, k.min(m - 1))?;
    }
    Ok(c)
}

/// SCS block acting on 1-based positions `m-j ..= m` (qubit = position - 1).
///
/// On `|0..0 1^l>` with `l <= j` it produces
/// `sqrt(l/m) |0..0 1^l> + sqrt((m-l)/m) |0..0 1^l 0>`.
fn split_and_cyclic_shift(c: &mut QuantumCircuit, m: usize, j: usize) -> Result<()> {
    if j == 0 {
        return Ok(());
    }
    let q = |pos: usize| pos - 1;
    let angle = |l: usize| 2.0 * ((l as f64) / (m as f64)).sqrt().acos();

    c.add(GateKind::X, q(m), &[q(m - 1)])?;
    c.add(GateKind::Ry(angle(1)), q(m - 1), &[q(m)])?;
    c.add(GateKind::X, q(m), &[q(m - 1)])?;

    for l in 2..=j {
        c.add(GateKind::X, q(m), &[q(m - l)])?;
        c.add(GateKind::Ry(angle(l)), q(m - l), &[q(m - l + 1), q(m)])?;
        c.add(GateKind::X, q(m), &[q(m - l)])?;
    }
    Ok(())
}

fn reduce_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Fourier-basis edge counter with the comparator constant folded into the
/// same pass. On `|x>|0>` it produces `|x>|(edges(x) + C) mod 2^(L+1)>`.
pub fn edge_counter_circuit(g: &Graph, spec: &CounterSpec) -> Result<QuantumCircuit> {
    let layout = spec.layout(g.n());
    let counter: Vec<usize> = (g.n()..g.n() + spec.width()).collect();
    let mut c = QuantumCircuit::new(layout);

    // |0> in the computational basis is the zero state of the Fourier basis.
    for &q in &counter {
        c.add(GateKind::H, q, &[])?;
    }
    for &(i, j) in g.edges() {
        for (b, &q) in counter.iter().enumerate() {
            c.add(GateKind::Phase(PI / (1u64 << b) as f64), q, &[i, j])?;
        }
    }
    let constant = spec.comparator_constant();
    if constant != 0 {
        for (b, &q) in counter.iter().enumerate() {
            let theta = reduce_angle(TAU * constant as f64 / (1u64 << (b + 1)) as f64);
            if theta.abs() > 1e-12 {
                c.add(GateKind::Phase(theta), q, &[])?;
            }
        }
    }
    inverse_qft(&mut c, &counter)?;
    Ok(c)
}

/// Inverse of the swap-free QFT: qubit `b` carrying phase `2 pi y / 2^(b+1)`
/// is mapped back to bit `b` of `y`.
fn inverse_qft(c: &mut QuantumCircuit, qubits: &[usize]) -> Result<()> {
    for b in 0..qubits.len() {
        for l in 0..b {
            let theta = -TAU / (1u64 << (b - l + 1)) as f64;
            c.add(GateKind::Phase(theta), qubits[b], &[qubits[l]])?;
        }
        c.add(GateKind::H, qubits[b], &[])?;
    }
    Ok(())
}

/// Phase oracle: `|x>|0> -> (-1)^[edges(x) >= m] |x>|0>` for every `x` whose
/// edge count fits the counter.
pub fn oracle_circuit(g: &Graph, k: usize, m: usize) -> Result<QuantumCircuit> {
    if k > g.n() {
        return Err(DksError::input(format!("k = {k} exceeds n = {}", g.n())));
    }
    let spec = CounterSpec::new(k, m)?;
    let counter = edge_counter_circuit(g, &spec)?;
    let mut c = QuantumCircuit::new(spec.layout(g.n()));
    c.append(&counter)?;
    // MSB = 1 encodes count < m, so flip the MSB = 0 branch.
    let res = c.layout().get(RESULT_REGISTER)?.qubit(0);
    c.add(GateKind::X, res, &[])?;
    c.add(GateKind::Z, res, &[])?;
    c.add(GateKind::X, res, &[])?;
    c.append(&counter.inverse())?;
    Ok(c)
}

/// Reflection about the Dicke state, `P (I - 2|0><0|) P^dagger`, which is
/// `2|D><D| - I` up to a global sign.
pub fn diffusion_circuit(n: usize, k: usize) -> Result<QuantumCircuit> {
    let prep = dicke_preparation(n, k)?;
    let mut c = prep.inverse();
    for q in 0..n {
        c.add(GateKind::X, q, &[])?;
    }
    if n > 0 {
        let controls: Vec<usize> = (0..n - 1).collect();
        c.add(GateKind::Z, n - 1, &controls)?;
    }
    for q in 0..n {
        c.add(GateKind::X, q, &[])?;
    }
    c.append(&prep)?;
    Ok(c)
}

/// One Grover iteration (oracle then diffusion) on the full layout.
pub fn grover_iteration(g: &Graph, k: usize, m: usize) -> Result<QuantumCircuit> {
    let mut c = oracle_circuit(g, k, m)?;
    c.append(&diffusion_circuit(g.n(), k)?)?;
    Ok(c)
}

/// Dicke preparation followed by `t` Grover iterations. The vertex register
/// is measured by the caller.
pub fn grover_circuit(g: &Graph, k: usize, m: usize, t: usize) -> Result<QuantumCircuit> {
    let spec = CounterSpec::new(k, m)?;
    let mut c = QuantumCircuit::new(spec.layout(g.n()));
    c.append(&dicke_preparation(g.n(), k)?)?;
    if t > 0 {
        let iteration = grover_iteration(g, k, m)?;
        for _ in 0..t {
            c.append(&iteration)?;
        }
    }
    Ok(c)
}

/// Two-qubit-equivalent cost of one gate.
///
/// - singly controlled `X`, `Z`, `H`: 1; singly controlled `Phase`, `Ry`: 2
/// - doubly controlled `X`, `Z` (Toffoli-class): 6; doubly controlled
///   `Phase`, `Ry`: 8 (three half-angle controlled rotations and two CNOTs)
/// - `c >= 3` controls: an ancilla AND-ladder of `c - 1` Toffolis computed and
///   uncomputed around one singly controlled gate, `12 (c - 1) + cost_1`
pub fn two_qubit_cost(kind: &GateKind, controls: usize) -> u64 {
    let single = match kind {
        GateKind::X | GateKind::Z | GateKind::H => 1,
        GateKind::Phase(_) | GateKind::Ry(_) => 2,
    };
    match controls {
        0 => 0,
        1 => single,
        2 => match kind {
            GateKind::X | GateKind::Z => 6,
            _ => 8,
        },
        c => 12 * (c as u64 - 1) + single,
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ResourceReport {
    pub gates: u64,
    pub two_qubit_gates: u64,
    /// Greedy layering on qubit disjointness, one layer per emitted gate.
    pub depth: u64,
    pub qubits: u64,
    /// Ancillas needed by the multi-controlled decompositions.
    pub ancillas: u64,
}

impl ResourceReport {
    pub fn to_key_values(&self) -> String {
        format!(
            "gates={}\ntwo_qubit_gates={}\ndepth={}\nqubits={}\nancillas={}\n",
            self.gates, self.two_qubit_gates, self.depth, self.qubits, self.ancillas
        )
    }
}

pub fn resource_report(c: &QuantumCircuit) -> ResourceReport {
    let mut layer = vec![0u64; c.num_qubits()];
    let mut report = ResourceReport {
        qubits: c.num_qubits() as u64,
        ..Default::default()
    };
    for g in c.gates() {
        report.gates += 1;
        report.two_qubit_gates += two_qubit_cost(&g.kind, g.controls.len());
        if g.controls.len() >= 3 {
            report.ancillas = report.ancillas.max(g.controls.len() as u64 - 1);
        }
        let next = g.qubits().map(|q| layer[q]).max().unwrap_or(0) + 1;
        for q in g.qubits() {
            layer[q] = next;
        }
        report.depth = report.depth.max(next);
    }
    report
}
