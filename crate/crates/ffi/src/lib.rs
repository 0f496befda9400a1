//! C ABI over `dks-core`.
//!
//! Graphs are opaque handles created by `dks_graph_*` constructors and
//! released with `dks_graph_free`. Every fallible call returns a
//! [`DksStatus`]; on failure `dks_last_error` gives a message for the calling
//! thread. Subsets cross the boundary as 64-bit masks, vertex `i` in bit `i`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dks_core::baselines::BlackBoxGrover;
use dks_core::bench::{ExecutorChoice, ExecutorKind};
use dks_core::graph::{binomial, brute_force_densest, erdos_renyi};
use dks_core::search::{adaptive_search, QuantumExecutor, SearchConfig};
use dks_core::sim::DEFAULT_MAX_QUBITS;
use dks_core::{DksError, Graph, VertexSubset};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DksStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Capacity = 3,
    Generation = 4,
    Parse = 5,
    Io = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DksExecutor {
    Auto = 0,
    Quantum = 1,
    Emulator = 2,
}

/// Opaque graph handle.
pub struct DksGraph {
    inner: Graph,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DksSearchSummary {
    pub subset: u64,
    pub edges: u32,
    pub oracle_calls: u64,
    pub attempts: u32,
    pub levels: u32,
    /// 1 when the statevector simulator ran, 0 for the emulator.
    pub simulated: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &DksError) -> DksStatus {
    match e {
        DksError::InvalidInput(_) => DksStatus::InvalidInput,
        DksError::Capacity { .. } => DksStatus::Capacity,
        DksError::Generation { .. } => DksStatus::Generation,
        DksError::Parse { .. } => DksStatus::Parse,
        DksError::Io(_) => DksStatus::Io,
        _ => DksStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (DksStatus, String)>) -> DksStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DksStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            DksStatus::Internal
        }
    }
}

fn core_err(e: DksError) -> (DksStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (DksStatus, String) {
    (DksStatus::NullPointer, format!("{what} is null"))
}

unsafe fn graph_ref<'a>(g: *const DksGraph) -> Result<&'a Graph, (DksStatus, String)> {
    g.as_ref().map(|g| &g.inner).ok_or_else(|| null("graph"))
}

unsafe fn emit(out: *mut *mut DksGraph, g: Graph) -> Result<(), (DksStatus, String)> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(DksGraph { inner: g }));
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `dks_*` call on the same thread.
#[no_mangle]
pub extern "C" fn dks_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds a graph on `n` vertices from `num_edges` pairs stored flat in
/// `edges` (`edges[2i]`, `edges[2i + 1]`).
///
/// # Safety
/// `edges` must point to `2 * num_edges` readable values (it may be null
/// when `num_edges` is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dks_graph_new(n: u32, edges: *const u32, num_edges: usize, out: *mut *mut DksGraph) -> DksStatus {
    guard(|| {
        let flat: &[u32] = if num_edges == 0 {
            &[]
        } else if edges.is_null() {
            return Err(null("edges"));
        } else {
            std::slice::from_raw_parts(edges, 2 * num_edges)
        };
        let pairs = flat.chunks_exact(2).map(|p| (p[0] as usize, p[1] as usize));
        let g = Graph::new(n as usize, pairs).map_err(core_err)?;
        emit(out, g)
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dks_graph_erdos_renyi(n: u32, p: f64, seed: u64, out: *mut *mut DksGraph) -> DksStatus {
    guard(|| emit(out, erdos_renyi(n as usize, p, seed).map_err(core_err)?))
}

/// Reads a graph in edge-list format.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dks_graph_read(path: *const c_char, out: *mut *mut DksGraph) -> DksStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (DksStatus::InvalidInput, "path is not UTF-8".to_string()))?;
        emit(out, Graph::read_edge_list(path).map_err(core_err)?)
    })
}

/// Releases a graph. Null is ignored.
///
/// # Safety
/// `g` must come from a `dks_graph_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dks_graph_free(g: *mut DksGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Vertex count, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dks_graph_num_vertices(g: *const DksGraph) -> u32 {
    g.as_ref().map_or(0, |g| g.inner.n() as u32)
}

/// Edge count, or 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dks_graph_num_edges(g: *const DksGraph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.num_edges())
}

/// Number of edges induced by `subset`.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dks_edge_count(g: *const DksGraph, subset: u64, out: *mut u32) -> DksStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = g.edge_count(VertexSubset(subset)).map_err(core_err)? as u32;
        Ok(())
    })
}

/// Exhaustive densest k-subgraph; ties go to the numerically smallest mask.
///
/// # Safety
/// `g` must be a live handle; `subset` and `edges` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dks_brute_force(g: *const DksGraph, k: u32, subset: *mut u64, edges: *mut u32) -> DksStatus {
    guard(|| {
        let g = graph_ref(g)?;
        if subset.is_null() || edges.is_null() {
            return Err(null("output"));
        }
        let r = brute_force_densest(g, k as usize).map_err(core_err)?;
        *subset = r.subset.0;
        *edges = r.edges as u32;
        Ok(())
    })
}

/// Adaptive Grover search for a densest k-subgraph, certified with the given
/// confidence. `max_qubits` of 0 selects the default simulator limit.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dks_search(
    g: *const DksGraph,
    k: u32,
    confidence: f64,
    seed: u64,
    executor: DksExecutor,
    max_qubits: u32,
    out: *mut DksSearchSummary,
) -> DksStatus {
    guard(|| {
        let g = graph_ref(g)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let k = k as usize;
        if k == 0 || k > g.n() {
            return Err((DksStatus::InvalidInput, format!("k = {k} must lie in 1..={}", g.n())));
        }
        let cfg = SearchConfig {
            confidence,
            seed,
            ..Default::default()
        };
        let choice = match executor {
            DksExecutor::Auto => ExecutorChoice::Auto,
            DksExecutor::Quantum => ExecutorChoice::Quantum,
            DksExecutor::Emulator => ExecutorChoice::Emulator,
        };
        let kind = choice.resolve(binomial(g.n(), k));
        let trace = match kind {
            ExecutorKind::QuantumSim => {
                let limit = if max_qubits == 0 { DEFAULT_MAX_QUBITS } else { max_qubits as usize };
                let mut ex = QuantumExecutor::new(limit);
                ex.check_capacity(g.n(), k).map_err(core_err)?;
                adaptive_search(g, k, &cfg, &mut ex)
            }
            ExecutorKind::Emulator => adaptive_search(g, k, &cfg, &mut BlackBoxGrover::new()),
        }
        .map_err(core_err)?;
        *out = DksSearchSummary {
            subset: trace.best.0,
            edges: trace.best_edges as u32,
            oracle_calls: trace.total_calls,
            attempts: trace.attempts.len() as u32,
            levels: trace.levels() as u32,
            simulated: u32::from(kind == ExecutorKind::QuantumSim),
        };
        Ok(())
    })
}

/// Static version string.
#[no_mangle]
pub extern "C" fn dks_version() -> *const c_char {
    static VERSION: &[u8] = concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes();
    VERSION.as_ptr().cast()
}
