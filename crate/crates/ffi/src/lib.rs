//! C ABI over `xppkit`.
//!
//! Models and repositories are opaque heap handles released with their
//! `_free` function. Every fallible call returns an [`XppStatus`]; on failure
//! the message is kept per thread and read with [`xpp_last_error`]. Strings
//! returned through `char **` out-parameters are owned by the caller and
//! released with [`xpp_string_free`].

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use xppkit::analysis::{find_zero_average, get_trj};
use xppkit::autorepo::{parse_auto, AutoRepo, BifurcationDiagram, LoadOptions};
use xppkit::export::{emit_diagram_plot, emit_labeled_points_plot, write_points, PeriodicBranchMode, PlotStyle};
use xppkit::expr::parse_expr;
use xppkit::model::{parse_model, Model};

/// Status codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XppStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ModelParse = 3,
    AutoParse = 4,
    OutOfRange = 5,
    Analysis = 6,
    Export = 7,
    BufferTooSmall = 8,
}

/// Parsed `.ode` model.
pub struct XppModel(Model);

/// Parsed `.auto` continuation file bound to a model.
pub struct XppRepo {
    repo: AutoRepo,
    warnings: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(s).expect("nul bytes removed")));
}

fn fail(status: XppStatus, msg: impl std::fmt::Display) -> XppStatus {
    set_error(msg.to_string());
    status
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, XppStatus> {
    if p.is_null() {
        return Err(fail(XppStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(p).to_str().map_err(|e| fail(XppStatus::InvalidUtf8, e))
}

unsafe fn give_string(s: String, out: *mut *mut c_char) -> XppStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            XppStatus::Ok
        }
        Err(e) => fail(XppStatus::Export, e),
    }
}

fn diagram(repo: &XppRepo, index: usize) -> Result<&BifurcationDiagram, XppStatus> {
    repo.repo.diagrams.get(index).ok_or_else(|| {
        fail(XppStatus::OutOfRange, format!("diagram {} out of range ({} diagrams)", index, repo.repo.diagrams.len()))
    })
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! nonnull {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(XppStatus::NullArgument, concat!("`", stringify!($p), "` is null"));
        })+
    };
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn xpp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` is null or was returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn xpp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse model source text.
///
/// # Safety
/// `source` is a nul-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn xpp_model_parse(source: *const c_char, out: *mut *mut XppModel) -> XppStatus {
    nonnull!(out);
    let src = tri!(text(source));
    match parse_model(src) {
        Ok(m) => {
            *out = Box::into_raw(Box::new(XppModel(m)));
            XppStatus::Ok
        }
        Err(e) => fail(XppStatus::ModelParse, e),
    }
}

/// # Safety
/// `model` is null or a live handle from [`xpp_model_parse`].
#[no_mangle]
pub unsafe extern "C" fn xpp_model_free(model: *mut XppModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of dynamical variables.
///
/// # Safety
/// `model` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn xpp_model_dim(model: *const XppModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.dynamical_count())
}

/// Parse a continuation file against `model`. `with_labels` and
/// `with_orbits` are 0 or 1.
///
/// # Safety
/// `model` is a live handle, `source` a nul-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn xpp_repo_parse(
    model: *const XppModel,
    source: *const c_char,
    with_labels: i32,
    with_orbits: i32,
    out: *mut *mut XppRepo,
) -> XppStatus {
    nonnull!(model, out);
    let src = tri!(text(source));
    let opts = LoadOptions { labeled_points: with_labels != 0, trajectories: with_orbits != 0 };
    match parse_auto(&(*model).0, src, opts) {
        Ok((repo, report)) => {
            *out = Box::into_raw(Box::new(XppRepo { repo, warnings: report.warnings.len() }));
            XppStatus::Ok
        }
        Err(e) => fail(XppStatus::AutoParse, e),
    }
}

/// # Safety
/// `repo` is null or a live handle from [`xpp_repo_parse`].
#[no_mangle]
pub unsafe extern "C" fn xpp_repo_free(repo: *mut XppRepo) {
    if !repo.is_null() {
        drop(Box::from_raw(repo));
    }
}

/// # Safety
/// `repo` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn xpp_repo_diagram_count(repo: *const XppRepo) -> usize {
    repo.as_ref().map_or(0, |r| r.repo.diagrams.len())
}

/// Warnings raised while loading.
///
/// # Safety
/// `repo` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn xpp_repo_warning_count(repo: *const XppRepo) -> usize {
    repo.as_ref().map_or(0, |r| r.warnings)
}

/// Summary line of diagram `index` (0-based).
///
/// # Safety
/// `repo` is a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn xpp_repo_summary(repo: *const XppRepo, index: usize, out: *mut *mut c_char) -> XppStatus {
    nonnull!(repo, out);
    let bd = tri!(diagram(&*repo, index));
    give_string(bd.summary_line(), out)
}

/// Point, branch and labeled point counts of diagram `index`.
///
/// # Safety
/// `repo` is a live handle; the out pointers are writable.
#[no_mangle]
pub unsafe extern "C" fn xpp_repo_diagram_sizes(
    repo: *const XppRepo,
    index: usize,
    points: *mut usize,
    branches: *mut usize,
    labeled: *mut usize,
) -> XppStatus {
    nonnull!(repo, points, branches, labeled);
    let bd = tri!(diagram(&*repo, index));
    *points = bd.point_count();
    *branches = bd.branches.len();
    *labeled = bd.labeled().len();
    XppStatus::Ok
}

/// SVG of diagram `index` with its labeled points. `axes` is null for the
/// default axes or a comma list such as `i0,v`; `style_json` is null or a
/// partial style document.
///
/// # Safety
/// Handles are live; string arguments are null or nul-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn xpp_repo_plot_svg(
    model: *const XppModel,
    repo: *const XppRepo,
    index: usize,
    axes: *const c_char,
    style_json: *const c_char,
    out: *mut *mut c_char,
) -> XppStatus {
    nonnull!(model, repo, out);
    let model = &(*model).0;
    let bd = tri!(diagram(&*repo, index));
    let mut style = PlotStyle::default();
    if !style_json.is_null() {
        let doc = tri!(text(style_json));
        let v: serde_json::Value = tri!(serde_json::from_str(doc).map_err(|e| fail(XppStatus::Export, e)));
        tri!(style.patch_json(&v).map_err(|e| fail(XppStatus::Export, e)));
    }
    let axes: Option<Vec<&str>> =
        if axes.is_null() { None } else { Some(tri!(text(axes)).split(',').map(str::trim).collect()) };
    let mode = PeriodicBranchMode::Standard;
    let mut plot =
        tri!(emit_diagram_plot(model, bd, axes.as_deref(), mode, &style, None).map_err(|e| fail(XppStatus::Export, e)));
    let marks = tri!(emit_labeled_points_plot(model, bd, axes.as_deref(), mode, &style, None, None)
        .map_err(|e| fail(XppStatus::Export, e)));
    plot.overlay(marks);
    give_string(plot.to_svg(&style), out)
}

/// Freeze file text for one-parameter diagram `index`.
///
/// # Safety
/// Handles are live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn xpp_repo_freeze(
    model: *const XppModel,
    repo: *const XppRepo,
    index: usize,
    out: *mut *mut c_char,
) -> XppStatus {
    nonnull!(model, repo, out);
    let bd = tri!(diagram(&*repo, index));
    let s = tri!(write_points(&(*model).0, bd, None).map_err(|e| fail(XppStatus::Export, e)));
    give_string(s, out)
}

/// Average `expr` over every special trajectory of diagram `index`.
///
/// Model parameters that are not hot are visible to the expression. The
/// value of the main continuation parameter and the average of each
/// trajectory go to `c` and `j`, which hold `capacity` entries; `count`
/// receives the trajectory count and `best` the 0-based index of the
/// smallest `|J|`. With too small a buffer nothing is written except
/// `count`, and the call returns `BufferTooSmall`.
///
/// # Safety
/// Handles are live; `expr` is nul-terminated; `c` and `j` hold `capacity`
/// doubles or are null when `capacity` is 0.
#[no_mangle]
pub unsafe extern "C" fn xpp_repo_zero_average(
    model: *const XppModel,
    repo: *const XppRepo,
    index: usize,
    expr: *const c_char,
    c: *mut f64,
    j: *mut f64,
    capacity: usize,
    count: *mut usize,
    best: *mut usize,
) -> XppStatus {
    nonnull!(model, repo, count, best);
    let model = &(*model).0;
    let bd = tri!(diagram(&*repo, index));
    let e = tri!(parse_expr(tri!(text(expr))).map_err(|e| fail(XppStatus::Analysis, e)));
    let trj = tri!(get_trj(bd).map_err(|e| fail(XppStatus::Analysis, e)));
    *count = trj.len();
    if capacity < trj.len() {
        return fail(XppStatus::BufferTooSmall, format!("{} trajectories, capacity {}", trj.len(), capacity));
    }
    nonnull!(c, j);
    let env: HashMap<String, f64> =
        model.parameters.iter().filter(|(k, _)| bd.hot_index(k).is_none()).map(|(k, v)| (k.clone(), *v)).collect();
    let z = tri!(find_zero_average(&trj, &e, &env, &bd.params[0]).map_err(|e| fail(XppStatus::Analysis, e)));
    ptr::copy_nonoverlapping(z.c.as_ptr(), c, z.c.len());
    ptr::copy_nonoverlapping(z.j.as_ptr(), j, z.j.len());
    *best = z.index;
    XppStatus::Ok
}
