//! C interface to `elastinet`.
//!
//! Every function returns an [`EnStatus`]; on failure a message is available from
//! [`en_last_error`] on the same thread. Handles are opaque and must be released with the
//! matching `*_free` function. Strings returned through out-parameters are owned by the
//! caller and released with [`en_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use elastinet::analysis::train_tracks_network;
use elastinet::classify::{classify_network, ClassifyOptions, VerdictKind};
use elastinet::geometry::{elastic_energy, Network};
use elastinet::graph::AngledGraph;
use elastinet::io::{self, Loaded};
use elastinet::optimize::{
    minimize_fixed_length, minimize_relaxed, MinimizeOptions, MinimizeResult,
};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    /// Outputs were written but the optimizer did not meet its tolerances.
    NotConverged = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnVerdict {
    Regular = 0,
    Degenerate = 1,
    Inadmissible = 2,
}

impl From<VerdictKind> for EnVerdict {
    fn from(v: VerdictKind) -> Self {
        match v {
            VerdictKind::Regular => EnVerdict::Regular,
            VerdictKind::Degenerate => EnVerdict::Degenerate,
            VerdictKind::Inadmissible => EnVerdict::Inadmissible,
        }
    }
}

/// Angled graph.
pub struct EnGraph(AngledGraph);

/// Network (graph plus one polyline or collapsed point per edge).
pub struct EnNetwork(Network);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnMinimizeOptions {
    pub samples: usize,
    pub max_iter: usize,
    pub restarts: usize,
    pub seed: u64,
    pub tol_c: f64,
    pub tol_g: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnMinimizeSummary {
    pub energy: f64,
    pub closure_residual: f64,
    pub iterations: usize,
    pub degenerate_edges: usize,
    pub verdict: EnVerdict,
    pub converged: bool,
    pub suspicious: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

type Failure = (EnStatus, String);

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<EnStatus, Failure>) -> EnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            if status == EnStatus::Ok {
                set_error("");
            }
            status
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EnStatus::Panic
        }
    }
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err((EnStatus::NullPointer, "null string".into()));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| (EnStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or((EnStatus::NullPointer, "null handle".into()))
}

fn check_out<T>(p: *mut T) -> Result<(), Failure> {
    if p.is_null() {
        Err((EnStatus::NullPointer, "null output pointer".into()))
    } else {
        Ok(())
    }
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    (EnStatus::InvalidArgument, e.to_string())
}

fn owned_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(invalid)
}

/// Message of the last failure on this thread; empty after a success. Valid until the next call.
#[no_mangle]
pub extern "C" fn en_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn en_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a graph document; a network document yields its graph.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn en_graph_from_json(
    json: *const c_char,
    out: *mut *mut EnGraph,
) -> EnStatus {
    guard(|| {
        check_out(out)?;
        let loaded =
            io::parse_document(text(json)?).map_err(|e| (EnStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(EnGraph(loaded.graph().clone())));
        Ok(EnStatus::Ok)
    })
}

/// # Safety
/// `g` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn en_graph_free(g: *mut EnGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn en_graph_num_edges(g: *const EnGraph, out: *mut usize) -> EnStatus {
    guard(|| {
        check_out(out)?;
        *out = handle(g)?.0.num_edges();
        Ok(EnStatus::Ok)
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn en_network_from_json(
    json: *const c_char,
    out: *mut *mut EnNetwork,
) -> EnStatus {
    guard(|| {
        check_out(out)?;
        match io::parse_document(text(json)?).map_err(|e| (EnStatus::Parse, e.to_string()))? {
            Loaded::Network(n) => {
                *out = Box::into_raw(Box::new(EnNetwork(n)));
                Ok(EnStatus::Ok)
            }
            Loaded::Graph(_) => Err((EnStatus::Parse, "document has no geometry".into())),
        }
    })
}

/// # Safety
/// `n` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn en_network_free(n: *mut EnNetwork) {
    if !n.is_null() {
        drop(Box::from_raw(n));
    }
}

/// # Safety
/// `n` must be a live handle; `out` must be writable. Release the string with `en_string_free`.
#[no_mangle]
pub unsafe extern "C" fn en_network_to_json(
    n: *const EnNetwork,
    out: *mut *mut c_char,
) -> EnStatus {
    guard(|| {
        check_out(out)?;
        *out = owned_string(io::network_json(&handle(n)?.0))?;
        Ok(EnStatus::Ok)
    })
}

/// `α ∫k² + β·length` summed over the edges.
///
/// # Safety
/// `n` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn en_network_energy(
    n: *const EnNetwork,
    alpha: f64,
    beta: f64,
    out: *mut f64,
) -> EnStatus {
    guard(|| {
        check_out(out)?;
        *out = elastic_energy(&handle(n)?.0, alpha, beta).total;
        Ok(EnStatus::Ok)
    })
}

/// `tangent_tol` compares tangents measured on the polylines with the assigned directions.
///
/// # Safety
/// `n` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn en_network_classify(
    n: *const EnNetwork,
    tangent_tol: f64,
    out: *mut EnVerdict,
) -> EnStatus {
    guard(|| {
        check_out(out)?;
        if tangent_tol.is_nan() || tangent_tol < 0.0 {
            return Err(invalid("tangent_tol must be nonnegative"));
        }
        let opts = ClassifyOptions {
            tangent_tol,
            ..Default::default()
        };
        *out = classify_network(&handle(n)?.0, &opts).kind.into();
        Ok(EnStatus::Ok)
    })
}

/// # Safety
/// `n` must be a live handle; `out` must be writable. Release the string with `en_string_free`.
#[no_mangle]
pub unsafe extern "C" fn en_network_render_svg(
    n: *const EnNetwork,
    px_per_unit: f64,
    out: *mut *mut c_char,
) -> EnStatus {
    guard(|| {
        check_out(out)?;
        if !(px_per_unit > 0.0 && px_per_unit.is_finite()) {
            return Err(invalid("px_per_unit must be positive"));
        }
        *out = owned_string(io::render_svg(&handle(n)?.0, px_per_unit))?;
        Ok(EnStatus::Ok)
    })
}

#[no_mangle]
pub extern "C" fn en_minimize_options_default() -> EnMinimizeOptions {
    let d = MinimizeOptions::default();
    EnMinimizeOptions {
        samples: d.samples,
        max_iter: d.max_iter,
        restarts: d.restarts,
        seed: d.seed,
        tol_c: d.tol_c,
        tol_g: d.tol_g,
    }
}

fn options(o: Option<&EnMinimizeOptions>) -> MinimizeOptions {
    let d = MinimizeOptions::default();
    match o {
        None => d,
        Some(o) => MinimizeOptions {
            samples: o.samples,
            max_iter: o.max_iter,
            restarts: o.restarts,
            seed: o.seed,
            tol_c: o.tol_c,
            tol_g: o.tol_g,
            ..d
        },
    }
}

unsafe fn deliver(
    r: MinimizeResult,
    network: *mut *mut EnNetwork,
    summary: *mut EnMinimizeSummary,
) -> EnStatus {
    if !summary.is_null() {
        *summary = EnMinimizeSummary {
            energy: r.energy,
            closure_residual: r.closure_residual,
            iterations: r.iterations,
            degenerate_edges: r.degenerate_edges.len(),
            verdict: r.verdict.into(),
            converged: r.converged,
            suspicious: r.suspicious,
        };
    }
    let status = if r.converged {
        EnStatus::Ok
    } else {
        EnStatus::NotConverged
    };
    *network = Box::into_raw(Box::new(EnNetwork(r.network)));
    status
}

/// Minimizes the relaxed energy. `opts` and `summary` may be null; on `NotConverged` the best
/// iterate is still returned.
///
/// # Safety
/// `g` must be a live handle; `network` must be writable; non-null pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn en_minimize_relaxed(
    g: *const EnGraph,
    alpha: f64,
    beta: f64,
    opts: *const EnMinimizeOptions,
    network: *mut *mut EnNetwork,
    summary: *mut EnMinimizeSummary,
) -> EnStatus {
    guard(|| {
        check_out(network)?;
        let r = minimize_relaxed(&handle(g)?.0, alpha, beta, &options(opts.as_ref()))
            .map_err(invalid)?;
        let status = deliver(r, network, summary);
        if status == EnStatus::NotConverged {
            return Err((status, "optimizer did not converge".into()));
        }
        Ok(status)
    })
}

/// Minimizes `α ∫k²` with the edge lengths fixed (`num_lengths` must equal the edge count).
///
/// # Safety
/// `lengths` must point to `num_lengths` doubles; other pointers as for `en_minimize_relaxed`.
#[no_mangle]
pub unsafe extern "C" fn en_minimize_fixed_length(
    g: *const EnGraph,
    lengths: *const f64,
    num_lengths: usize,
    alpha: f64,
    opts: *const EnMinimizeOptions,
    network: *mut *mut EnNetwork,
    summary: *mut EnMinimizeSummary,
) -> EnStatus {
    guard(|| {
        check_out(network)?;
        if lengths.is_null() {
            return Err((EnStatus::NullPointer, "null lengths".into()));
        }
        let l = std::slice::from_raw_parts(lengths, num_lengths);
        let r = minimize_fixed_length(&handle(g)?.0, l, alpha, &options(opts.as_ref()))
            .map_err(invalid)?;
        let status = deliver(r, network, summary);
        if status == EnStatus::NotConverged {
            return Err((status, "optimizer did not converge".into()));
        }
        Ok(status)
    })
}

/// Train-track curve joining `(0,0)` to `(b,h)` with horizontal end tangents.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn en_train_tracks(
    h: f64,
    half: usize,
    out: *mut *mut EnNetwork,
) -> EnStatus {
    guard(|| {
        check_out(out)?;
        *out = Box::into_raw(Box::new(EnNetwork(
            train_tracks_network(h, half).map_err(invalid)?,
        )));
        Ok(EnStatus::Ok)
    })
}
