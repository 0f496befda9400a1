//! Dense statevector simulator.
//!
//! Amplitude index `i` encodes qubit `q` as bit `q` of `i`. Registers are
//! contiguous qubit ranges; the algorithm layout places the vertex register
//! `q_node` in the low-order bits, followed by `q_edge` and the comparator
//! bit `q_res`.
//!
//! Multi-controlled gates are applied directly as conditioned amplitude
//! updates; no ancilla decomposition is simulated.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::{self, Write as _};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DksError, Result};

/// Tolerance for comparing states and unit norms.
pub const STATE_TOLERANCE: f64 = 1e-10;
/// Tolerated accumulated norm drift over long circuits.
pub const NORM_DRIFT_TOLERANCE: f64 = 1e-9;
/// Largest register accepted by [`circuit_unitary`].
pub const MAX_UNITARY_QUBITS: usize = 12;
/// Default simulator capacity.
pub const DEFAULT_MAX_QUBITS: usize = 24;

pub const NODE_REGISTER: &str = "q_node";
pub const EDGE_REGISTER: &str = "q_edge";
pub const RESULT_REGISTER: &str = "q_res";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl Register {
    pub fn qubits(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }

    pub fn qubit(&self, offset: usize) -> usize {
        assert!(offset < self.len, "offset {offset} outside register {}", self.name);
        self.start + offset
    }
}

/// Named, disjoint, contiguous qubit ranges allocated from qubit 0 upward.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    num_qubits: usize,
}

impl RegisterLayout {
    pub fn new(spec: &[(&str, usize)]) -> Result<Self> {
        let mut registers: Vec<Register> = Vec::with_capacity(spec.len());
        let mut next = 0;
        for &(name, len) in spec {
            if registers.iter().any(|r| r.name == name) {
                return Err(DksError::input(format!("duplicate register {name}")));
            }
            registers.push(Register {
                name: name.to_string(),
                start: next,
                len,
            });
            next += len;
        }
        Ok(RegisterLayout {
            registers,
            num_qubits: next,
        })
    }

    /// Vertex register only.
    pub fn node_only(n: usize) -> Self {
        RegisterLayout::new(&[(NODE_REGISTER, n)]).expect("single register")
    }

    /// `q_node` (n qubits), `q_edge` (count_bits qubits), `q_res` (1 qubit).
    pub fn algorithm(n: usize, count_bits: usize) -> Self {
        RegisterLayout::new(&[(NODE_REGISTER, n), (EDGE_REGISTER, count_bits), (RESULT_REGISTER, 1)])
            .expect("distinct names")
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn get(&self, name: &str) -> Result<&Register> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| DksError::input(format!("no register named {name}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    H,
    X,
    Z,
    /// `diag(1, e^{i theta})`.
    Phase(f64),
    /// Rotation about Y: `[[cos t/2, -sin t/2], [sin t/2, cos t/2]]`.
    Ry(f64),
}

impl GateKind {
    fn mnemonic(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::Phase(_) => "P",
            GateKind::Ry(_) => "RY",
        }
    }

    fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::Phase(t) | GateKind::Ry(t) => Some(t),
            _ => None,
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            GateKind::Phase(t) => GateKind::Phase(-t),
            GateKind::Ry(t) => GateKind::Ry(-t),
            other => other,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, GateKind::Z | GateKind::Phase(_))
    }
}

/// A single-qubit gate with an arbitrary (possibly empty) control set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub controls: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, target: usize, controls: &[usize]) -> Self {
        Gate {
            kind,
            target,
            controls: controls.to_vec(),
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.target).chain(self.controls.iter().copied())
    }

    pub fn inverse(&self) -> Self {
        Gate {
            kind: self.kind.inverse(),
            target: self.target,
            controls: self.controls.clone(),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.mnemonic(), self.target)?;
        for c in &self.controls {
            write!(f, " {c}")?;
        }
        if let Some(t) = self.kind.angle() {
            write!(f, " {t:?}")?;
        }
        Ok(())
    }
}

/// Ordered gate list over a register layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumCircuit {
    layout: RegisterLayout,
    gates: Vec<Gate>,
}

impl QuantumCircuit {
    pub fn new(layout: RegisterLayout) -> Self {
        QuantumCircuit {
            layout,
            gates: Vec::new(),
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.num_qubits()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate after checking qubit indices and control distinctness.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let q = self.num_qubits();
        if gate.target >= q {
            return Err(DksError::input(format!("target {} outside {q} qubits", gate.target)));
        }
        for (i, &c) in gate.controls.iter().enumerate() {
            if c >= q {
                return Err(DksError::input(format!("control {c} outside {q} qubits")));
            }
            if c == gate.target || gate.controls[..i].contains(&c) {
                return Err(DksError::input(format!("repeated qubit {c} in gate {gate}")));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn add(&mut self, kind: GateKind, target: usize, controls: &[usize]) -> Result<()> {
        self.push(Gate::new(kind, target, controls))
    }

    /// Appends all gates of `other`, whose qubits must fit this circuit.
    pub fn append(&mut self, other: &QuantumCircuit) -> Result<()> {
        if other.num_qubits() > self.num_qubits() {
            return Err(DksError::input(format!(
                "cannot append a {}-qubit circuit to a {}-qubit circuit",
                other.num_qubits(),
                self.num_qubits()
            )));
        }
        self.gates.extend_from_slice(&other.gates);
        Ok(())
    }

    /// Reversed gate order with each gate inverted.
    pub fn inverse(&self) -> QuantumCircuit {
        QuantumCircuit {
            layout: self.layout.clone(),
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    /// One gate per line: `KIND target [controls...] [theta]`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            let _ = writeln!(out, "{g}");
        }
        out
    }

    /// Parses [`QuantumCircuit::dump`] output back onto a layout.
    pub fn parse_dump(layout: RegisterLayout, text: &str) -> Result<Self> {
        let mut c = QuantumCircuit::new(layout);
        for (idx, line) in text.lines().enumerate() {
            let err = |msg: String| DksError::Parse { line: idx + 1, msg };
            let toks: Vec<&str> = line.split_whitespace().collect();
            let (&name, rest) = toks.split_first().ok_or_else(|| err("empty line".into()))?;
            let angled = matches!(name, "P" | "RY");
            let (qubit_toks, angle) = if angled {
                let (a, q) = rest.split_last().ok_or_else(|| err("missing angle".into()))?;
                (q, Some(a.parse::<f64>().map_err(|_| err(format!("bad angle {a}")))?))
            } else {
                (rest, None)
            };
            let qubits = qubit_toks
                .iter()
                .map(|t| t.parse::<usize>().map_err(|_| err(format!("bad qubit {t}"))))
                .collect::<Result<Vec<_>>>()?;
            let (&target, controls) = qubits.split_first().ok_or_else(|| err("missing target".into()))?;
            let kind = match (name, angle) {
                ("H", None) => GateKind::H,
                ("X", None) => GateKind::X,
                ("Z", None) => GateKind::Z,
                ("P", Some(t)) => GateKind::Phase(t),
                ("RY", Some(t)) => GateKind::Ry(t),
                _ => return Err(err(format!("unknown gate {name}"))),
            };
            c.add(kind, target, controls).map_err(|e| err(e.to_string()))?;
        }
        Ok(c)
    }
}

/// `2^Q` complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero(num_qubits: usize) -> Self {
        StateVector::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { num_qubits, amps }
    }

    /// Wraps explicit amplitudes; the length must be a power of two and the
    /// norm must be one within [`STATE_TOLERANCE`].
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(DksError::input(format!("{} amplitudes is not a power of two", amps.len())));
        }
        let sv = StateVector {
            num_qubits: amps.len().trailing_zeros() as usize,
            amps,
        };
        let norm = sv.norm_sqr();
        if (norm - 1.0).abs() > STATE_TOLERANCE {
            return Err(DksError::input(format!("state has squared norm {norm}")));
        }
        Ok(sv)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies every gate of `circuit` in order.
    pub fn apply(&mut self, circuit: &QuantumCircuit) -> Result<()> {
        if circuit.num_qubits() != self.num_qubits {
            return Err(DksError::input(format!(
                "circuit has {} qubits, state has {}",
                circuit.num_qubits(),
                self.num_qubits
            )));
        }
        for g in circuit.gates() {
            apply_gate(&mut self.amps, self.num_qubits, g);
        }
        Ok(())
    }
}

/// Spreads the bits of `j` over the positions not listed in `fixed`
/// (ascending), leaving zeros at the fixed positions.
#[inline]
fn deposit(mut j: usize, fixed: &[usize]) -> usize {
    for &p in fixed {
        let low = j & ((1 << p) - 1);
        j = ((j >> p) << (p + 1)) | low;
    }
    j
}

fn apply_gate(amps: &mut [Complex64], num_qubits: usize, gate: &Gate) {
    let tbit = 1usize << gate.target;
    let cmask = gate.controls.iter().fold(0usize, |m, &c| m | 1 << c);
    let mut fixed: Vec<usize> = gate.qubits().collect();
    fixed.sort_unstable();
    let free = 1usize << (num_qubits - fixed.len());

    let diag = |amps: &mut [Complex64], factor: Complex64| {
        for j in 0..free {
            let i = deposit(j, &fixed) | cmask | tbit;
            amps[i] *= factor;
        }
    };
    let block = |amps: &mut [Complex64], m: [[f64; 2]; 2]| {
        for j in 0..free {
            let i0 = deposit(j, &fixed) | cmask;
            let i1 = i0 | tbit;
            let (a0, a1) = (amps[i0], amps[i1]);
            amps[i0] = a0 * m[0][0] + a1 * m[0][1];
            amps[i1] = a0 * m[1][0] + a1 * m[1][1];
        }
    };

    match gate.kind {
        GateKind::Z => diag(amps, Complex64::new(-1.0, 0.0)),
        GateKind::Phase(t) => diag(amps, Complex64::from_polar(1.0, t)),
        GateKind::X => {
            for j in 0..free {
                let i0 = deposit(j, &fixed) | cmask;
                amps.swap(i0, i0 | tbit);
            }
        }
        GateKind::H => block(amps, [[FRAC_1_SQRT_2, FRAC_1_SQRT_2], [FRAC_1_SQRT_2, -FRAC_1_SQRT_2]]),
        GateKind::Ry(t) => {
            let (s, c) = (t / 2.0).sin_cos();
            block(amps, [[c, -s], [s, c]])
        }
    }
}

/// Runs `c` on a copy of `initial`.
pub fn run_circuit(c: &QuantumCircuit, initial: &StateVector) -> Result<StateVector> {
    let mut sv = initial.clone();
    sv.apply(c)?;
    Ok(sv)
}

/// Born-rule marginal distribution of one register, indexed by the
/// register-local value.
pub fn register_marginal(sv: &StateVector, layout: &RegisterLayout, name: &str) -> Result<Vec<f64>> {
    if layout.num_qubits() != sv.num_qubits() {
        return Err(DksError::input("layout does not match state size"));
    }
    let reg = layout.get(name)?;
    let mask = (1usize << reg.len) - 1;
    let mut marginal = vec![0.0; 1 << reg.len];
    for (i, a) in sv.amplitudes().iter().enumerate() {
        marginal[(i >> reg.start) & mask] += a.norm_sqr();
    }
    Ok(marginal)
}

/// Draws an index with probability proportional to `weights` using exactly
/// one uniform variate.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
            acc += w;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Measures register `name` (Born rule on its marginal).
pub fn sample_register<R: Rng + ?Sized>(
    sv: &StateVector,
    layout: &RegisterLayout,
    name: &str,
    rng: &mut R,
) -> Result<u64> {
    let marginal = register_marginal(sv, layout, name)?;
    Ok(sample_index(&marginal, rng) as u64)
}

/// Bitstring of a register value, most significant qubit first.
pub fn format_bits(value: u64, width: usize) -> String {
    (0..width)
        .rev()
        .map(|i| if value >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Full unitary of `c`, column `j` being the image of basis state `j`.
pub fn circuit_unitary(c: &QuantumCircuit) -> Result<DMatrix<Complex64>> {
    let q = c.num_qubits();
    if q > MAX_UNITARY_QUBITS {
        return Err(DksError::Capacity {
            needed: q,
            limit: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1usize << q;
    let mut u = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let out = run_circuit(c, &StateVector::basis(q, col))?;
        for (row, a) in out.amplitudes().iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    Ok(u)
}
