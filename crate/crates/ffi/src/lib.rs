//! C interface. Graphs are opaque handles; every call returns a
//! [`CdagStatus`] and leaves a message for [`cdag_last_error`] on failure.
//! Node sets are passed as comma-separated names.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cdag::cli::{parse_graph, render_graph, GraphFile};
use cdag::docalc::{apply_rule, DoQuery, Rule};
use cdag::formula::Format;
use cdag::identify::{identify, IdResult};
use cdag::{ClusterDag, Error, NodeSet};

/// Parsed graph file.
pub struct CdagGraph {
    file: GraphFile,
    cdag: ClusterDag,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CdagStatus {
    Ok = 0,
    /// The answer is no: not separated, not identifiable, rule does not apply.
    Negative = 1,
    NullArgument = 2,
    InvalidUtf8 = 3,
    Parse = 4,
    /// Unknown names, overlapping sets, bad rule or format number.
    InvalidQuery = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CdagFormat {
    Text = 0,
    Latex = 1,
    Json = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

type Fallible<T> = Result<T, (CdagStatus, String)>;

fn query_error(e: Error) -> (CdagStatus, String) {
    (CdagStatus::InvalidQuery, e.to_string())
}

fn guard(f: impl FnOnce() -> Fallible<CdagStatus>) -> CdagStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => {
            set_error("");
            s
        }
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            CdagStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Fallible<&'a str> {
    if p.is_null() {
        return Err((CdagStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (CdagStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// Null reads as the empty set.
unsafe fn set_arg(p: *const c_char, what: &str) -> Fallible<NodeSet> {
    if p.is_null() {
        return Ok(NodeSet::new());
    }
    Ok(str_arg(p, what)?.split(',').map(str::trim).filter(|s| !s.is_empty()).collect())
}

unsafe fn graph_arg<'a>(g: *const CdagGraph) -> Fallible<&'a CdagGraph> {
    g.as_ref().ok_or((CdagStatus::NullArgument, "graph is null".into()))
}

fn give_string(s: String, out: *mut *mut c_char) -> Fallible<()> {
    let c = CString::new(s).map_err(|_| (CdagStatus::Panic, "output holds a NUL byte".to_string()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Parses graph-file text. On success `*out` owns a graph to release with
/// [`cdag_graph_free`].
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cdag_graph_parse(text: *const c_char, out: *mut *mut CdagGraph) -> CdagStatus {
    guard(|| {
        if out.is_null() {
            return Err((CdagStatus::NullArgument, "out is null".into()));
        }
        *out = ptr::null_mut();
        let text = str_arg(text, "text")?;
        let file = parse_graph(text).map_err(|e| (CdagStatus::Parse, e.to_string()))?;
        let cdag = file.cdag().map_err(|e| (CdagStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(CdagGraph { file, cdag }));
        Ok(CdagStatus::Ok)
    })
}

/// # Safety
/// `g` must come from [`cdag_graph_parse`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cdag_graph_free(g: *mut CdagGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Canonical graph-file text of `g`, released with [`cdag_string_free`].
///
/// # Safety
/// `g` must be a live graph and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cdag_graph_render(g: *const CdagGraph, out: *mut *mut c_char) -> CdagStatus {
    guard(|| {
        let g = graph_arg(g)?;
        if out.is_null() {
            return Err((CdagStatus::NullArgument, "out is null".into()));
        }
        give_string(render_graph(&g.file), out)?;
        Ok(CdagStatus::Ok)
    })
}

/// `Ok` if `x` and `y` are d-separated given `z` in the cluster graph,
/// `Negative` if not.
///
/// # Safety
/// `g` must be a live graph; the sets are NUL-terminated strings or null.
#[no_mangle]
pub unsafe extern "C" fn cdag_dsep(
    g: *const CdagGraph,
    x: *const c_char,
    y: *const c_char,
    z: *const c_char,
) -> CdagStatus {
    guard(|| {
        let g = graph_arg(g)?;
        let (x, y, z) = (set_arg(x, "x")?, set_arg(y, "y")?, set_arg(z, "z")?);
        let sep = g.cdag.d_separated(&x, &y, &z).map_err(query_error)?;
        Ok(if sep { CdagStatus::Ok } else { CdagStatus::Negative })
    })
}

/// Identifies `P(y | do(x))`. `format` is a [`CdagFormat`] value. `Ok`
/// puts the formula in `*out`; `Negative` puts a hedge description there. Release with [`cdag_string_free`].
///
/// # Safety
/// `g` must be a live graph, `x` and `y` NUL-terminated strings, `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cdag_identify(
    g: *const CdagGraph,
    x: *const c_char,
    y: *const c_char,
    format: u32,
    out: *mut *mut c_char,
) -> CdagStatus {
    guard(|| {
        let g = graph_arg(g)?;
        if out.is_null() {
            return Err((CdagStatus::NullArgument, "out is null".into()));
        }
        *out = ptr::null_mut();
        let (x, y) = (set_arg(x, "x")?, set_arg(y, "y")?);
        let format = match format {
            f if f == CdagFormat::Text as u32 => Format::Text,
            f if f == CdagFormat::Latex as u32 => Format::Latex,
            f if f == CdagFormat::Json as u32 => Format::Json,
            f => return Err((CdagStatus::InvalidQuery, format!("no format {f}"))),
        };
        match identify(&g.cdag, &x, &y).map_err(query_error)? {
            IdResult::Identified(e) => {
                give_string(e.render(format), out)?;
                Ok(CdagStatus::Ok)
            }
            IdResult::NonIdentified(h) => {
                give_string(h.to_string(), out)?;
                Ok(CdagStatus::Negative)
            }
        }
    })
}

/// `Ok` if do-calculus rule `rule` (1, 2 or 3) licenses its equality for
/// effect `y`, intervention `x`, the set `z` and context `w`.
///
/// # Safety
/// `g` must be a live graph; the sets are NUL-terminated strings or null.
#[no_mangle]
pub unsafe extern "C" fn cdag_docalc(
    g: *const CdagGraph,
    rule: u32,
    x: *const c_char,
    y: *const c_char,
    z: *const c_char,
    w: *const c_char,
) -> CdagStatus {
    guard(|| {
        let g = graph_arg(g)?;
        let rule = match rule {
            1 => Rule::R1,
            2 => Rule::R2,
            3 => Rule::R3,
            r => return Err((CdagStatus::InvalidQuery, format!("no rule {r}"))),
        };
        let q = DoQuery::new(set_arg(x, "x")?, set_arg(y, "y")?, set_arg(z, "z")?, set_arg(w, "w")?);
        let v = apply_rule(rule, &g.cdag, &q).map_err(query_error)?;
        Ok(if v.applies { CdagStatus::Ok } else { CdagStatus::Negative })
    })
}

/// Message of the last failed call on this thread, empty after a success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cdag_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn cdag_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn cdag_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
