//! C interface to hilbertlab.
//!
//! Bodies, maps and scan reports cross the boundary as opaque handles that
//! the caller releases with the matching `_free` function. Fallible calls
//! return an [`HlStatus`] and write results through out-pointers; the text of
//! the most recent error on the calling thread is available from
//! [`hl_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use hilbertlab::benzecri::standardize;
use hilbertlab::body::{ConvexBody, MarkedBody};
use hilbertlab::hilbert::{displacement, distance_value};
use hilbertlab::scan::{run, Report, Scenario};
use hilbertlab::{HilbertError, ProjectiveMap, ProjectivePoint};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Schema = 3,
    DimensionMismatch = 4,
    PointOutsideBody = 5,
    NotAnAutomorphism = 6,
    BallCapExceeded = 7,
    InvalidMatrix = 8,
    DegenerateBody = 9,
    NonConvergence = 10,
    Other = 11,
}

impl From<&HilbertError> for HlStatus {
    fn from(e: &HilbertError) -> Self {
        match e {
            HilbertError::Schema(_) => HlStatus::Schema,
            HilbertError::DimensionMismatch { .. } => HlStatus::DimensionMismatch,
            HilbertError::PointOutsideBody | HilbertError::PointAtInfinity => {
                HlStatus::PointOutsideBody
            }
            HilbertError::NotAnAutomorphism => HlStatus::NotAnAutomorphism,
            HilbertError::BallCapExceeded(_) => HlStatus::BallCapExceeded,
            HilbertError::InvalidMatrix(_) => HlStatus::InvalidMatrix,
            HilbertError::DegenerateBody(_) | HilbertError::NotProperlyConvex => {
                HlStatus::DegenerateBody
            }
            HilbertError::NonConvergence(_) => HlStatus::NonConvergence,
            _ => HlStatus::Other,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: HlStatus, msg: impl Into<String>) -> HlStatus {
    set_error(msg.into());
    status
}

fn status_of<T>(r: hilbertlab::Result<T>, out: impl FnOnce(T)) -> HlStatus {
    match r {
        Ok(v) => {
            out(v);
            HlStatus::Ok
        }
        Err(e) => fail(HlStatus::from(&e), e.to_string()),
    }
}

/// Opaque convex body.
pub struct HlBody(ConvexBody);

/// Opaque projective map, stored with determinant of absolute value one.
pub struct HlMap(ProjectiveMap);

/// Opaque scan report.
pub struct HlReport(Report);

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, HlStatus> {
    if s.is_null() {
        return Err(fail(HlStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| fail(HlStatus::InvalidUtf8, e.to_string()))
}

unsafe fn coords<'a>(p: *const f64, len: usize) -> Result<&'a [f64], HlStatus> {
    if p.is_null() {
        return Err(fail(HlStatus::NullPointer, "null coordinate buffer"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Affine coordinates when `len == dim`, homogeneous when `len == dim + 1`.
fn point(dim: usize, v: &[f64]) -> hilbertlab::Result<ProjectivePoint> {
    match v.len() {
        k if k == dim => Ok(ProjectivePoint::from_affine(v)),
        k if k == dim + 1 => ProjectivePoint::from_slice(v),
        k => Err(HilbertError::DimensionMismatch {
            expected: dim + 1,
            got: k,
        }),
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Parses a body description in the JSON body format.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_body_from_json(json: *const c_char, out: *mut *mut HlBody) -> HlStatus {
    if out.is_null() {
        return fail(HlStatus::NullPointer, "null out-pointer");
    }
    let json = match text(json) {
        Ok(s) => s,
        Err(s) => return s,
    };
    status_of(ConvexBody::from_json(json), |b| {
        *out = Box::into_raw(Box::new(HlBody(b)))
    })
}

/// The round unit ball in dimension `n`, or NULL when `n == 0`.
#[no_mangle]
pub extern "C" fn hl_body_unit_ball(n: usize) -> *mut HlBody {
    if n == 0 {
        set_error("dimension must be positive".into());
        return ptr::null_mut();
    }
    Box::into_raw(Box::new(HlBody(ConvexBody::unit_ball(n))))
}

/// # Safety
/// `body` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_body_dim(body: *const HlBody) -> usize {
    body.as_ref().map_or(0, |b| b.0.dim())
}

/// JSON form of a body; release with [`hl_string_free`].
///
/// # Safety
/// `body` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_body_to_json(body: *const HlBody) -> *mut c_char {
    body.as_ref()
        .map_or(ptr::null_mut(), |b| into_c_string(b.0.to_json()))
}

/// # Safety
/// `body` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_body_free(body: *mut HlBody) {
    if !body.is_null() {
        drop(Box::from_raw(body));
    }
}

/// Builds a map from an `(n+1) x (n+1)` row-major matrix; `size` is `n + 1`.
///
/// # Safety
/// `rows` must point to `size * size` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hl_map_from_rows(
    rows: *const f64,
    size: usize,
    out: *mut *mut HlMap,
) -> HlStatus {
    if out.is_null() {
        return fail(HlStatus::NullPointer, "null out-pointer");
    }
    let data = match coords(rows, size * size) {
        Ok(d) => d,
        Err(s) => return s,
    };
    let rows: Vec<Vec<f64>> = data.chunks(size.max(1)).map(<[f64]>::to_vec).collect();
    status_of(ProjectiveMap::from_rows(&rows), |m| {
        *out = Box::into_raw(Box::new(HlMap(m)))
    })
}

/// Matrix size `n + 1` of a map.
///
/// # Safety
/// `map` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_map_size(map: *const HlMap) -> usize {
    map.as_ref().map_or(0, |m| m.0.dim() + 1)
}

/// Copies the normalized matrix, row-major, into `buf` of `len` doubles.
///
/// # Safety
/// `map` must be a live handle and `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hl_map_matrix(map: *const HlMap, buf: *mut f64, len: usize) -> HlStatus {
    let Some(m) = map.as_ref() else {
        return fail(HlStatus::NullPointer, "null map");
    };
    if buf.is_null() {
        return fail(HlStatus::NullPointer, "null buffer");
    }
    let rows = m.0.to_rows();
    let need = rows.len() * rows.len();
    if len < need {
        return fail(
            HlStatus::DimensionMismatch,
            format!("buffer holds {len}, need {need}"),
        );
    }
    for (k, x) in rows.iter().flatten().enumerate() {
        *buf.add(k) = *x;
    }
    HlStatus::Ok
}

/// # Safety
/// `map` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_map_free(map: *mut HlMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Hilbert distance between two points given by `len` coordinates each.
///
/// # Safety
/// `body` must be a live handle, `x` and `y` must hold `len` doubles and
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hl_distance(
    body: *const HlBody,
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> HlStatus {
    let Some(b) = body.as_ref() else {
        return fail(HlStatus::NullPointer, "null body");
    };
    if out.is_null() {
        return fail(HlStatus::NullPointer, "null out-pointer");
    }
    let (x, y) = match (coords(x, len), coords(y, len)) {
        (Ok(x), Ok(y)) => (x, y),
        (Err(s), _) | (_, Err(s)) => return s,
    };
    let d = point(b.0.dim(), x)
        .and_then(|x| point(b.0.dim(), y).and_then(|y| distance_value(&b.0, &x, &y)));
    status_of(d, |d| *out = d)
}

/// Displacement `d(x, g x)` of an automorphism.
///
/// # Safety
/// Handles must be live, `x` must hold `len` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn hl_displacement(
    body: *const HlBody,
    map: *const HlMap,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> HlStatus {
    let (Some(b), Some(g)) = (body.as_ref(), map.as_ref()) else {
        return fail(HlStatus::NullPointer, "null handle");
    };
    if out.is_null() {
        return fail(HlStatus::NullPointer, "null out-pointer");
    }
    let x = match coords(x, len) {
        Ok(x) => x,
        Err(s) => return s,
    };
    status_of(
        point(b.0.dim(), x).and_then(|x| displacement(&b.0, &g.0, &x)),
        |d| *out = d,
    )
}

/// Map carrying the marked body `(body, x)` to a standard pair. When
/// `standard_body` is not NULL it receives the image body.
///
/// # Safety
/// `body` must be live, `x` must hold `len` doubles, `out_map` must be valid
/// and `standard_body` NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn hl_standardize(
    body: *const HlBody,
    x: *const f64,
    len: usize,
    out_map: *mut *mut HlMap,
    standard_body: *mut *mut HlBody,
) -> HlStatus {
    let Some(b) = body.as_ref() else {
        return fail(HlStatus::NullPointer, "null body");
    };
    if out_map.is_null() {
        return fail(HlStatus::NullPointer, "null out-pointer");
    }
    let x = match coords(x, len) {
        Ok(x) => x,
        Err(s) => return s,
    };
    let r = point(b.0.dim(), x)
        .and_then(|x| MarkedBody::new(b.0.clone(), x))
        .and_then(|mb| standardize(&mb).and_then(|s| Ok((mb.transformed(&s.map)?, s.map))));
    status_of(r, |(mb, g)| {
        *out_map = Box::into_raw(Box::new(HlMap(g)));
        if !standard_body.is_null() {
            *standard_body = Box::into_raw(Box::new(HlBody(mb.body().clone())));
        }
    })
}

/// Runs a scenario given as JSON text. A nonzero `seed` overrides the
/// scenario's seed.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_scan(
    json: *const c_char,
    seed: u64,
    out: *mut *mut HlReport,
) -> HlStatus {
    if out.is_null() {
        return fail(HlStatus::NullPointer, "null out-pointer");
    }
    let json = match text(json) {
        Ok(s) => s,
        Err(s) => return s,
    };
    let r = Scenario::from_json(json).and_then(|mut sc| {
        if seed != 0 {
            sc.seed = seed;
        }
        run(&sc)
    });
    status_of(r, |rep| *out = Box::into_raw(Box::new(HlReport(rep))))
}

/// JSON report; release with [`hl_string_free`].
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_report_json(report: *const HlReport) -> *mut c_char {
    report
        .as_ref()
        .map_or(ptr::null_mut(), |r| into_c_string(r.0.to_json()))
}

/// CSV report; release with [`hl_string_free`].
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_report_csv(report: *const HlReport) -> *mut c_char {
    report
        .as_ref()
        .map_or(ptr::null_mut(), |r| into_c_string(r.0.to_csv()))
}

/// # Safety
/// `report` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_report_free(report: *mut HlReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
