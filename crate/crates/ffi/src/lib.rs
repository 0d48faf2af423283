//! C ABI for the geopersist pipeline: models, samples, diagrams and the
//! stability verifier behind opaque handles with status codes. Strings
//! returned by `*_to_json` and `gp_last_error` are heap-allocated and must
//! be released with [`gp_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::c_char;

use geopersist::analysis;
use geopersist::error::Error;
use geopersist::homology::{bottleneck, persist_h1, DecoratedDiagram, FieldP};
use geopersist::rips::build_filtration;
use geopersist::sampling::{
    enrich_with_critical_points, restrict_metric, sample_uniform, SampleSet,
};
use geopersist::spaces::GeodesicSpaceModel;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GpStatus {
    Ok = 0,
    /// Malformed input: bad JSON, bad arguments, foreign points.
    InputError = 1,
    /// A documented precondition does not hold.
    PreconditionError = 2,
    /// A required pointer was null.
    NullPointer = 3,
    /// Unexpected internal failure.
    Internal = 4,
}

/// Opaque handle to a geodesic space model.
pub struct GpModel {
    inner: GeodesicSpaceModel,
}

/// Opaque handle to a finite sample of a model.
pub struct GpSample {
    inner: SampleSet,
}

/// Opaque handle to a decorated H1 persistence diagram.
pub struct GpDiagram {
    inner: DecoratedDiagram,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> GpStatus {
    match e {
        Error::Invalid(_) | Error::Json(_) | Error::Io(_) | Error::Domain(_) | Error::Argument(_) => {
            GpStatus::InputError
        }
        _ => GpStatus::PreconditionError,
    }
}

fn guard<T>(
    out: *mut *mut T,
    f: impl FnOnce() -> Result<T, Error> + std::panic::UnwindSafe,
) -> GpStatus {
    if out.is_null() {
        return GpStatus::NullPointer;
    }
    match catch_unwind(f) {
        Ok(Ok(value)) => {
            unsafe { *out = Box::into_raw(Box::new(value)) };
            GpStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            GpStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, GpStatus> {
    if ptr.is_null() {
        return Err(GpStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string is not valid UTF-8".into());
        GpStatus::InputError
    })
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(std::ptr::null_mut())
}

/// Last error message of this thread, or null. Free with `gp_string_free`.
#[no_mangle]
pub extern "C" fn gp_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow().as_ref().map(|m| m.clone().into_raw()).unwrap_or(std::ptr::null_mut())
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must have been returned by a `gp_*` function and not freed yet.
#[no_mangle]
pub unsafe extern "C" fn gp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a model description (JSON) into a handle.
///
/// # Safety
/// `json` must point to a NUL-terminated string; `out` must be a valid
/// pointer slot.
#[no_mangle]
pub unsafe extern "C" fn gp_model_from_json(json: *const c_char, out: *mut *mut GpModel) -> GpStatus {
    let text = match read_str(json) {
        Ok(t) => t.to_owned(),
        Err(code) => return code,
    };
    guard(out, move || Ok(GpModel { inner: GeodesicSpaceModel::from_json(&text)? }))
}

/// # Safety
/// `model` must be a live handle from this library or null.
#[no_mangle]
pub unsafe extern "C" fn gp_model_free(model: *mut GpModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_model_to_json(model: *const GpModel) -> *mut c_char {
    if model.is_null() {
        return std::ptr::null_mut();
    }
    to_c_string((*model).inner.to_json())
}

/// Uniform s-dense sample of the model; index 0 is the basepoint.
///
/// # Safety
/// `model` must be a live handle; `out` must be a valid pointer slot.
#[no_mangle]
pub unsafe extern "C" fn gp_sample_uniform(
    model: *const GpModel,
    s: f64,
    seed: u64,
    jitter: bool,
    out: *mut *mut GpSample,
) -> GpStatus {
    if model.is_null() {
        return GpStatus::NullPointer;
    }
    let m = &(*model).inner;
    guard(out, AssertUnwindSafe(move || Ok(GpSample { inner: sample_uniform(m, s, seed, jitter)? })))
}

/// Add three equidistant points on every catalogue circle of the model.
///
/// # Safety
/// `model` and `sample` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gp_sample_enrich(
    model: *const GpModel,
    sample: *const GpSample,
    out: *mut *mut GpSample,
) -> GpStatus {
    if model.is_null() || sample.is_null() {
        return GpStatus::NullPointer;
    }
    let m = &(*model).inner;
    let s = &(*sample).inner;
    guard(out, AssertUnwindSafe(move || {
        let circles = m.critical_circles()?;
        Ok(GpSample { inner: enrich_with_critical_points(m, s, &circles)? })
    }))
}

/// # Safety
/// `sample` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_sample_len(sample: *const GpSample) -> usize {
    if sample.is_null() {
        return 0;
    }
    (*sample).inner.len()
}

/// # Safety
/// `sample` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_sample_to_json(sample: *const GpSample) -> *mut c_char {
    if sample.is_null() {
        return std::ptr::null_mut();
    }
    to_c_string((*sample).inner.to_json())
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gp_sample_from_json(json: *const c_char, out: *mut *mut GpSample) -> GpStatus {
    let text = match read_str(json) {
        Ok(t) => t.to_owned(),
        Err(code) => return code,
    };
    guard(out, move || Ok(GpSample { inner: SampleSet::from_json(&text)? }))
}

/// # Safety
/// `sample` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gp_sample_free(sample: *mut GpSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// H1 persistence of the open Rips filtration of the sample over F_p,
/// censored at `rmax`.
///
/// # Safety
/// `model` and `sample` must be live handles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gp_persist_h1(
    model: *const GpModel,
    sample: *const GpSample,
    field_p: u32,
    rmax: f64,
    out: *mut *mut GpDiagram,
) -> GpStatus {
    if model.is_null() || sample.is_null() {
        return GpStatus::NullPointer;
    }
    let m = &(*model).inner;
    let s = &(*sample).inner;
    guard(out, AssertUnwindSafe(move || {
        let field = FieldP::new(field_p)?;
        let dm = restrict_metric(m, s)?;
        let skel = build_filtration(&dm, rmax)?;
        Ok(GpDiagram { inner: persist_h1(&skel, field) })
    }))
}

/// # Safety
/// `diagram` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_diagram_len(diagram: *const GpDiagram) -> usize {
    if diagram.is_null() {
        return 0;
    }
    (*diagram).inner.intervals.len()
}

/// Read one interval; `death` equals `rmax` when `censored` is set.
///
/// # Safety
/// `diagram` must be a live handle; the out parameters must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn gp_diagram_interval(
    diagram: *const GpDiagram,
    index: usize,
    birth: *mut f64,
    death: *mut f64,
    censored: *mut bool,
) -> GpStatus {
    if diagram.is_null() {
        return GpStatus::NullPointer;
    }
    let intervals = &(*diagram).inner.intervals;
    let Some(iv) = intervals.get(index) else {
        set_error(format!("interval index {index} out of range"));
        return GpStatus::InputError;
    };
    if !birth.is_null() {
        *birth = iv.birth;
    }
    if !death.is_null() {
        *death = iv.death;
    }
    if !censored.is_null() {
        *censored = iv.censored;
    }
    GpStatus::Ok
}

/// # Safety
/// `diagram` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gp_diagram_to_json(diagram: *const GpDiagram) -> *mut c_char {
    if diagram.is_null() {
        return std::ptr::null_mut();
    }
    to_c_string((*diagram).inner.to_json())
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gp_diagram_from_json(json: *const c_char, out: *mut *mut GpDiagram) -> GpStatus {
    let text = match read_str(json) {
        Ok(t) => t.to_owned(),
        Err(code) => return code,
    };
    guard(out, move || Ok(GpDiagram { inner: DecoratedDiagram::from_json(&text)? }))
}

/// # Safety
/// `diagram` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn gp_diagram_free(diagram: *mut GpDiagram) {
    if !diagram.is_null() {
        drop(Box::from_raw(diagram));
    }
}

/// The known model diagram: one interval `(0, l/3]` per catalogue circle.
///
/// # Safety
/// `model` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gp_known_diagram(
    model: *const GpModel,
    field_p: u32,
    out: *mut *mut GpDiagram,
) -> GpStatus {
    if model.is_null() {
        return GpStatus::NullPointer;
    }
    let m = &(*model).inner;
    guard(out, AssertUnwindSafe(move || {
        Ok(GpDiagram { inner: m.known_diagram(FieldP::new(field_p)?)? })
    }))
}

/// Bottleneck distance between two diagrams.
///
/// # Safety
/// `a` and `b` must be live handles; `distance` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gp_bottleneck(
    a: *const GpDiagram,
    b: *const GpDiagram,
    distance: *mut f64,
) -> GpStatus {
    if a.is_null() || b.is_null() || distance.is_null() {
        return GpStatus::NullPointer;
    }
    match bottleneck(&(*a).inner, &(*b).inner) {
        Ok((d, _)) => {
            *distance = d;
            GpStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    }
}

/// Check the three intrinsic stability conditions of the sample diagram
/// against the model diagram; writes the verdict and a JSON report.
///
/// # Safety
/// The diagram handles must be live; `pass` must be valid; `report_json`
/// may be null to skip the report.
#[no_mangle]
pub unsafe extern "C" fn gp_verify_stability(
    model_diagram: *const GpDiagram,
    sample_diagram: *const GpDiagram,
    s: f64,
    pass: *mut bool,
    report_json: *mut *mut c_char,
) -> GpStatus {
    if model_diagram.is_null() || sample_diagram.is_null() || pass.is_null() {
        return GpStatus::NullPointer;
    }
    match analysis::verify_stability(&(*model_diagram).inner, &(*sample_diagram).inner, s) {
        Ok(report) => {
            *pass = report.verdict;
            if !report_json.is_null() {
                let json = serde_json_string(&report);
                *report_json = to_c_string(json);
            }
            GpStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            status_of(&e)
        }
    }
}

fn serde_json_string<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).unwrap_or_else(|e| format!("{{\"error\":\"{e}\"}}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    unsafe fn model(json: &str) -> *mut GpModel {
        let c = CString::new(json).unwrap();
        let mut out: *mut GpModel = std::ptr::null_mut();
        assert_eq!(gp_model_from_json(c.as_ptr(), &mut out), GpStatus::Ok);
        out
    }

    #[test]
    fn pipeline_through_the_c_abi() {
        unsafe {
            let m = model(r#"{"kind":"circle","circumference":1.0}"#);
            let mut sample: *mut GpSample = std::ptr::null_mut();
            assert_eq!(gp_sample_uniform(m, 0.05, 7, false, &mut sample), GpStatus::Ok);
            let mut enriched: *mut GpSample = std::ptr::null_mut();
            assert_eq!(gp_sample_enrich(m, sample, &mut enriched), GpStatus::Ok);
            assert!(gp_sample_len(enriched) >= gp_sample_len(sample));

            let mut diagram: *mut GpDiagram = std::ptr::null_mut();
            assert_eq!(gp_persist_h1(m, enriched, 2, 0.5, &mut diagram), GpStatus::Ok);
            assert!(gp_diagram_len(diagram) >= 1);
            let (mut birth, mut death, mut censored) = (0.0f64, 0.0f64, false);
            let mut found_exact = false;
            for i in 0..gp_diagram_len(diagram) {
                assert_eq!(
                    gp_diagram_interval(diagram, i, &mut birth, &mut death, &mut censored),
                    GpStatus::Ok
                );
                if (death - 1.0 / 3.0).abs() <= 1e-12 {
                    found_exact = true;
                }
            }
            assert!(found_exact, "the enriched sample realizes death 1/3");

            let mut known: *mut GpDiagram = std::ptr::null_mut();
            assert_eq!(gp_known_diagram(m, 2, &mut known), GpStatus::Ok);
            let mut dist = f64::NAN;
            assert_eq!(gp_bottleneck(known, diagram, &mut dist), GpStatus::Ok);
            assert!(dist <= 0.1, "bottleneck {dist}");

            let mut pass = false;
            let mut report: *mut c_char = std::ptr::null_mut();
            assert_eq!(gp_verify_stability(known, diagram, 0.05, &mut pass, &mut report), GpStatus::Ok);
            assert!(pass);
            let text = CStr::from_ptr(report).to_str().unwrap();
            assert!(text.contains("\"verdict\": true"));
            gp_string_free(report);

            let json = gp_diagram_to_json(diagram);
            let mut back: *mut GpDiagram = std::ptr::null_mut();
            assert_eq!(gp_diagram_from_json(json, &mut back), GpStatus::Ok);
            assert_eq!(gp_diagram_len(back), gp_diagram_len(diagram));
            gp_string_free(json);

            gp_diagram_free(back);
            gp_diagram_free(known);
            gp_diagram_free(diagram);
            gp_sample_free(enriched);
            gp_sample_free(sample);
            gp_model_free(m);
        }
    }

    #[test]
    fn error_paths_set_messages() {
        unsafe {
            let bad = CString::new(r#"{"kind":"circle","circumference":-1.0}"#).unwrap();
            let mut out: *mut GpModel = std::ptr::null_mut();
            assert_eq!(gp_model_from_json(bad.as_ptr(), &mut out), GpStatus::InputError);
            let msg = gp_last_error();
            assert!(!msg.is_null());
            assert!(CStr::from_ptr(msg).to_str().unwrap().contains("finite"));
            gp_string_free(msg);

            // null pointers are rejected, not dereferenced
            assert_eq!(gp_sample_uniform(std::ptr::null(), 0.1, 0, false, &mut std::ptr::null_mut()), GpStatus::NullPointer);
            assert_eq!(gp_bottleneck(std::ptr::null(), std::ptr::null(), std::ptr::null_mut()), GpStatus::NullPointer);

            // graph models have no catalogue: enrichment is a precondition error
            let g = model(
                r#"{"kind":"graph","vertices":3,"edges":[[0,1,1.0],[1,2,1.0],[2,0,1.0]],"basepoint":[0,0.0]}"#,
            );
            let mut sample: *mut GpSample = std::ptr::null_mut();
            assert_eq!(gp_sample_uniform(g, 0.2, 0, false, &mut sample), GpStatus::Ok);
            let mut enriched: *mut GpSample = std::ptr::null_mut();
            assert_eq!(gp_sample_enrich(g, sample, &mut enriched), GpStatus::PreconditionError);
            gp_sample_free(sample);
            gp_model_free(g);
        }
    }
}
