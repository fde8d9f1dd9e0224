//! C ABI over the `wsbmf` library.
//!
//! Graphs and results are opaque heap handles released with their `_free`
//! functions. Fallible calls return a [`WsbmfStatus`]; on failure the message
//! is available from [`wsbmf_last_error`] on the same thread. Node indices in
//! prior pairs and result rows are global: Δ nodes first, then Γ nodes.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use wsbmf::ingest::{self, CoverDocument, CoverFormat};
use wsbmf::metrics::{self, HardPartition};
use wsbmf::{BipartiteGraph, DetectionResult, Error, PriorConstraints, SolverConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsbmfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InputError = 3,
    SolverError = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Solver settings; obtain defaults from [`wsbmf_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WsbmfConfig {
    pub communities: usize,
    pub restarts: usize,
    pub seed: u64,
    pub gamma: f64,
    pub c1_iters: usize,
    pub c2_iters: usize,
    pub threshold_grid: usize,
}

impl From<&WsbmfConfig> for SolverConfig {
    fn from(c: &WsbmfConfig) -> Self {
        SolverConfig {
            communities: c.communities,
            restarts: c.restarts,
            seed: c.seed,
            gamma: c.gamma,
            c1_iters: c.c1_iters,
            c2_iters: c.c2_iters,
            threshold_grid: c.threshold_grid,
            ..SolverConfig::with_communities(c.communities)
        }
    }
}

pub struct WsbmfGraph {
    inner: BipartiteGraph,
}

pub struct WsbmfResult {
    graph: BipartiteGraph,
    config: SolverConfig,
    inner: DetectionResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> WsbmfStatus {
    match e {
        Error::AllRestartsFailed { .. } | Error::ZeroRow(_) | Error::DegenerateColumn { .. } => {
            WsbmfStatus::SolverError
        }
        Error::InvalidConfig(_) | Error::NegativeWeight(_) => WsbmfStatus::InvalidArgument,
        _ => WsbmfStatus::InputError,
    }
}

struct Fail(WsbmfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(WsbmfStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> WsbmfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            WsbmfStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            WsbmfStatus::Panic
        }
    }
}

unsafe fn pairs<'a>(ptr: *const usize, count: usize, what: &str) -> Result<&'a [usize], Fail> {
    if count == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(ptr, 2 * count))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn wsbmf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn wsbmf_config_default(communities: usize) -> WsbmfConfig {
    let d = SolverConfig::with_communities(communities);
    WsbmfConfig {
        communities,
        restarts: d.restarts,
        seed: d.seed,
        gamma: d.gamma,
        c1_iters: d.c1_iters,
        c2_iters: d.c2_iters,
        threshold_grid: d.threshold_grid,
    }
}

/// Builds a graph from `n_edges` `(delta, gamma)` index pairs laid out flat.
#[no_mangle]
pub unsafe extern "C" fn wsbmf_graph_new(
    n_delta: usize,
    n_gamma: usize,
    edges: *const usize,
    n_edges: usize,
    out: *mut *mut WsbmfGraph,
) -> WsbmfStatus {
    guard(|| {
        let flat = pairs(edges, n_edges, "edges")?;
        let g = BipartiteGraph::new(n_delta, n_gamma, flat.chunks_exact(2).map(|p| (p[0], p[1])))?;
        put(out, WsbmfGraph { inner: g })
    })
}

/// Parses edge-list text (`delta_id gamma_id` per line, `#` comments).
#[no_mangle]
pub unsafe extern "C" fn wsbmf_graph_from_edgelist(text: *const c_char, out: *mut *mut WsbmfGraph) -> WsbmfStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Fail(WsbmfStatus::InputError, e.to_string()))?;
        put(out, WsbmfGraph { inner: ingest::parse_edgelist(text)? })
    })
}

/// The bundled 18 × 14 women/events network.
#[no_mangle]
pub unsafe extern "C" fn wsbmf_graph_women(out: *mut *mut WsbmfGraph) -> WsbmfStatus {
    guard(|| put(out, WsbmfGraph { inner: ingest::women() }))
}

#[no_mangle]
pub unsafe extern "C" fn wsbmf_graph_n_delta(graph: *const WsbmfGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.n_delta())
}

#[no_mangle]
pub unsafe extern "C" fn wsbmf_graph_n_gamma(graph: *const WsbmfGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.n_gamma())
}

#[no_mangle]
pub unsafe extern "C" fn wsbmf_graph_n_edges(graph: *const WsbmfGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.n_edges())
}

#[no_mangle]
pub unsafe extern "C" fn wsbmf_graph_free(graph: *mut WsbmfGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

#[no_mangle]
pub unsafe extern "C" fn wsbmf_detect(
    graph: *const WsbmfGraph,
    config: *const WsbmfConfig,
    out: *mut *mut WsbmfResult,
) -> WsbmfStatus {
    wsbmf_detect_with_priors(graph, config, ptr::null(), 0, ptr::null(), 0, out)
}

/// Detection with existence and absence constraints, each given as flat
/// pairs of global node indices from the same part.
#[no_mangle]
pub unsafe extern "C" fn wsbmf_detect_with_priors(
    graph: *const WsbmfGraph,
    config: *const WsbmfConfig,
    existence: *const usize,
    n_existence: usize,
    absence: *const usize,
    n_absence: usize,
    out: *mut *mut WsbmfResult,
) -> WsbmfStatus {
    guard(|| {
        let graph = graph.as_ref().ok_or_else(|| null("graph"))?;
        let config: SolverConfig = config.as_ref().ok_or_else(|| null("config"))?.into();
        let to_pairs = |flat: &[usize]| flat.chunks_exact(2).map(|p| (p[0], p[1])).collect::<Vec<_>>();
        let priors = PriorConstraints::new(
            to_pairs(pairs(existence, n_existence, "existence")?),
            to_pairs(pairs(absence, n_absence, "absence")?),
            config.gamma,
        )?;
        let inner = wsbmf::detect(&graph.inner, &priors, &config)?;
        put(
            out,
            WsbmfResult {
                graph: graph.inner.clone(),
                config,
                inner,
            },
        )
    })
}

#[no_mangle]
pub unsafe extern "C" fn wsbmf_result_n_nodes(result: *const WsbmfResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.continuous.n())
}

#[no_mangle]
pub unsafe extern "C" fn wsbmf_result_communities(result: *const WsbmfResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.continuous.communities())
}

/// Copies the n × c binary membership matrix, row-major, into `buf`.
#[no_mangle]
pub unsafe extern "C" fn wsbmf_result_binary(result: *const WsbmfResult, buf: *mut u8, len: usize) -> WsbmfStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        copy_out(r.inner.binary.values().iter().copied(), r.inner.binary.values().len(), buf, len)
    })
}

/// Copies the n × c continuous membership matrix, row-major, into `buf`.
#[no_mangle]
pub unsafe extern "C" fn wsbmf_result_continuous(result: *const WsbmfResult, buf: *mut f64, len: usize) -> WsbmfStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        let u = r.inner.continuous.values();
        copy_out(u.iter().copied(), u.len(), buf, len)
    })
}

unsafe fn copy_out<T>(values: impl Iterator<Item = T>, needed: usize, buf: *mut T, len: usize) -> Result<(), Fail> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < needed {
        return Err(Fail(
            WsbmfStatus::BufferTooSmall,
            format!("buffer holds {len} values, {needed} needed"),
        ));
    }
    for (i, v) in values.enumerate() {
        *buf.add(i) = v;
    }
    Ok(())
}

/// Objective of the selected restart; NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn wsbmf_result_objective(result: *const WsbmfResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.objective)
}

#[no_mangle]
pub unsafe extern "C" fn wsbmf_result_density(result: *const WsbmfResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.density)
}

#[no_mangle]
pub unsafe extern "C" fn wsbmf_result_threshold(result: *const WsbmfResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.binary.threshold())
}

/// Serializes the cover as JSON; release the string with [`wsbmf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn wsbmf_result_to_json(result: *const WsbmfResult, out: *mut *mut c_char) -> WsbmfStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let doc = CoverDocument::from_result(&r.graph, &r.inner, &r.config);
        let text = ingest::write_cover(&doc, CoverFormat::Json);
        *out = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn wsbmf_result_free(result: *mut WsbmfResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

#[no_mangle]
pub unsafe extern "C" fn wsbmf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// NMI between two label arrays of length `n`.
#[no_mangle]
pub unsafe extern "C" fn wsbmf_nmi(truth: *const usize, found: *const usize, n: usize, out: *mut f64) -> WsbmfStatus {
    guard(|| {
        if truth.is_null() || found.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let t = HardPartition::new(slice::from_raw_parts(truth, n).to_vec());
        let f = HardPartition::new(slice::from_raw_parts(found, n).to_vec());
        *out = metrics::nmi(&t, &f)?;
        Ok(())
    })
}
