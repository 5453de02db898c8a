//! C interface to scforge.
//!
//! Ensembles and graphs are opaque handles created by `scf_*` constructors
//! and released with the matching `*_free`. Every fallible call returns an
//! [`ScfStatus`]; on failure, `scf_last_error` returns a message for the
//! calling thread that stays valid until that thread's next failing call.
//! Panics never cross the boundary; they surface as `SCF_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use scforge::construct::{self, build_met, build_peg, build_random, PegParams, TannerGraph};
use scforge::de::{threshold_bracket, DeModel, DeOptions};
use scforge::designer::{design_max_rate, design_min_iters, design_min_iters_nonuniform_checks, DesignParams};
use scforge::ensemble::{io as ens_io, Ensemble, ScEnsemble, ScRaEnsemble};
use scforge::sim::{estimate_fer, peel_decode, StopRule};
use scforge::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidParameter = 2,
    Parse = 3,
    Io = 4,
    Construction = 5,
    Config = 6,
    Lp = 7,
    Utf8 = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScfBuildMethod {
    Random = 0,
    Met = 1,
    Peg = 2,
}

/// Opaque SC-LDPC or SC-RA ensemble.
pub struct ScfEnsemble {
    inner: Ensemble,
}

/// Opaque Tanner graph instance.
pub struct ScfGraph {
    inner: TannerGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ScfStatus {
    match e {
        Error::Parameter(_) | Error::Distribution(_) => ScfStatus::InvalidParameter,
        Error::Construction(_) => ScfStatus::Construction,
        Error::Parse { .. } => ScfStatus::Parse,
        Error::Config(_) => ScfStatus::Config,
        Error::Lp(_) => ScfStatus::Lp,
        Error::Io(_) => ScfStatus::Io,
    }
}

struct Fail(ScfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ScfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ScfStatus::Ok,
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            ScfStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(ScfStatus::NullArgument, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| Fail(ScfStatus::Utf8, "path is not UTF-8".into()))?;
    Ok(PathBuf::from(s))
}

fn bad(msg: impl Into<String>) -> Fail {
    Fail(ScfStatus::InvalidParameter, msg.into())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn scf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL.
#[no_mangle]
pub extern "C" fn scf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Regular (l, r) SC-LDPC ensemble with `positions` variable positions,
/// coupling width `w` and `m` variables per position.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn scf_ensemble_sc_ldpc(
    l: usize,
    r: usize,
    positions: usize,
    w: usize,
    m: usize,
    met: bool,
    out: *mut *mut ScfEnsemble,
) -> ScfStatus {
    guard(|| {
        let e = ScEnsemble::regular(l, r, positions, w, m)?;
        let e = if met { e.with_met()? } else { e };
        write(out, Box::into_raw(Box::new(ScfEnsemble { inner: Ensemble::Ldpc(e) })), "out")
    })
}

/// Regular SC-RA ensemble with check degree `q + 2`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn scf_ensemble_sc_ra(q: usize, positions: usize, m: usize, out: *mut *mut ScfEnsemble) -> ScfStatus {
    guard(|| {
        let e = ScRaEnsemble::regular(q, positions, m)?;
        write(out, Box::into_raw(Box::new(ScfEnsemble { inner: Ensemble::Ra(e) })), "out")
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn scf_ensemble_load(path: *const c_char, out: *mut *mut ScfEnsemble) -> ScfStatus {
    guard(|| {
        let e = ens_io::load(&path_arg(path)?)?;
        if let Some(v) = e.validate().first() {
            return Err(bad(v.to_string()));
        }
        write(out, Box::into_raw(Box::new(ScfEnsemble { inner: e })), "out")
    })
}

/// # Safety
/// `e` must come from this library; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn scf_ensemble_save(e: *const ScfEnsemble, path: *const c_char) -> ScfStatus {
    guard(|| Ok(ens_io::save(&deref(e, "ensemble")?.inner, &path_arg(path)?)?))
}

/// # Safety
/// `e` must be NULL or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn scf_ensemble_free(e: *mut ScfEnsemble) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// # Safety
/// `e` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn scf_ensemble_positions(e: *const ScfEnsemble, out: *mut usize) -> ScfStatus {
    guard(|| write(out, deref(e, "ensemble")?.inner.positions(), "out"))
}

/// Design rate.
///
/// # Safety
/// `e` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn scf_ensemble_rate(e: *const ScfEnsemble, out: *mut f64) -> ScfStatus {
    guard(|| {
        let r = match &deref(e, "ensemble")?.inner {
            Ensemble::Ldpc(x) => x.general_rate(false),
            Ensemble::Ra(x) => x.design_rate(),
        };
        write(out, r, "out")
    })
}

/// BP threshold bracket: decoding succeeds at `lo` and fails at `hi`.
///
/// # Safety
/// `e` must come from this library; `lo` and `hi` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn scf_ensemble_threshold(e: *const ScfEnsemble, lo: *mut f64, hi: *mut f64) -> ScfStatus {
    guard(|| {
        let e = deref(e, "ensemble")?;
        if lo.is_null() || hi.is_null() {
            return Err(null("lo/hi"));
        }
        let (a, b) = threshold_bracket(&DeModel::from_ensemble(&e.inner), &DeOptions::default());
        write(lo, a, "lo")?;
        write(hi, b, "hi")
    })
}

/// Local degree distribution design with default parameters. `alg` is 2
/// (maximum rate), 3 (minimum iterations) or 4 (minimum iterations with
/// non-uniform checks). The result is a new ensemble.
///
/// # Safety
/// `e` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn scf_design(e: *const ScfEnsemble, alg: u8, out: *mut *mut ScfEnsemble) -> ScfStatus {
    guard(|| {
        let e = &deref(e, "ensemble")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let (p, de) = (DesignParams::default(), DeOptions::default());
        let ldpc = || match e {
            Ensemble::Ldpc(x) => Ok(x),
            Ensemble::Ra(_) => Err(bad(format!("algorithm {alg} needs an sc-ldpc ensemble"))),
        };
        let outcome = match alg {
            2 => design_max_rate(ldpc()?, &p, &de, None)?,
            3 => design_min_iters(e, &p, &de, None)?,
            4 => design_min_iters_nonuniform_checks(ldpc()?, &p, &de, None)?,
            _ => return Err(bad(format!("alg must be 2, 3 or 4, got {alg}"))),
        };
        write(out, Box::into_raw(Box::new(ScfEnsemble { inner: outcome.ensemble })), "out")
    })
}

/// Finite-length instance. SC-RA ensembles accept only `SCF_BUILD_METHOD_PEG`.
///
/// # Safety
/// `e` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn scf_graph_build(
    e: *const ScfEnsemble,
    method: ScfBuildMethod,
    seed: u64,
    out: *mut *mut ScfGraph,
) -> ScfStatus {
    guard(|| {
        let e = &deref(e, "ensemble")?.inner;
        if out.is_null() {
            return Err(null("out"));
        }
        let g = match (method, e) {
            (ScfBuildMethod::Peg, _) => build_peg(e, &PegParams::default(), seed)?,
            (ScfBuildMethod::Random, Ensemble::Ldpc(x)) => build_random(x, seed)?,
            (ScfBuildMethod::Met, Ensemble::Ldpc(x)) => build_met(x, seed)?,
            (_, Ensemble::Ra(_)) => return Err(bad("sc-ra instances are built with PEG")),
        };
        write(out, Box::into_raw(Box::new(ScfGraph { inner: g })), "out")
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn scf_graph_load(path: *const c_char, out: *mut *mut ScfGraph) -> ScfStatus {
    guard(|| {
        let g = construct::load(&path_arg(path)?)?;
        write(out, Box::into_raw(Box::new(ScfGraph { inner: g })), "out")
    })
}

/// Writes the text form to `path` and the alist form to `path.alist`.
///
/// # Safety
/// `g` must come from this library; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn scf_graph_save(g: *const ScfGraph, path: *const c_char) -> ScfStatus {
    guard(|| Ok(construct::save(&deref(g, "graph")?.inner, &path_arg(path)?)?))
}

/// # Safety
/// `g` must be NULL or come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn scf_graph_free(g: *mut ScfGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Variable, check and edge counts. Any output pointer may be NULL.
///
/// # Safety
/// `g` must come from this library; non-NULL outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn scf_graph_size(g: *const ScfGraph, vars: *mut usize, checks: *mut usize, edges: *mut usize) -> ScfStatus {
    guard(|| {
        let g = &deref(g, "graph")?.inner;
        for (p, v) in [(vars, g.num_vars()), (checks, g.num_checks()), (edges, g.num_edges())] {
            if !p.is_null() {
                p.write(v);
            }
        }
        Ok(())
    })
}

/// Peels the erasure pattern `erased` (one byte per variable, nonzero means
/// erased) and stores the number of variables left unresolved.
///
/// # Safety
/// `g` must come from this library; `erased` must point to `n` bytes and
/// `residual` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn scf_graph_peel(g: *const ScfGraph, erased: *const u8, n: usize, residual: *mut usize) -> ScfStatus {
    guard(|| {
        let g = &deref(g, "graph")?.inner;
        if erased.is_null() && n > 0 {
            return Err(null("erased"));
        }
        if n != g.num_vars() {
            return Err(bad(format!("mask has {n} entries, graph has {} variables", g.num_vars())));
        }
        let mask: Vec<bool> = if n == 0 { Vec::new() } else { std::slice::from_raw_parts(erased, n).iter().map(|&b| b != 0).collect() };
        write(residual, peel_decode(g, &mask).residual, "residual")
    })
}

/// Block erasure count over `trials` independent channel draws at erasure
/// probability `eps`. Reproducible for a given `seed`.
///
/// # Safety
/// `g` must come from this library; `errors` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn scf_simulate(g: *const ScfGraph, eps: f64, trials: u64, seed: u64, errors: *mut u64) -> ScfStatus {
    guard(|| {
        let g = &deref(g, "graph")?.inner;
        if !(0.0..=1.0).contains(&eps) {
            return Err(bad(format!("eps must lie in [0, 1], got {eps}")));
        }
        if trials == 0 {
            return Err(bad("trials must be positive"));
        }
        let r = estimate_fer(g, &[eps], StopRule::fixed(trials), seed);
        write(errors, r.points[0].errors, "errors")
    })
}
