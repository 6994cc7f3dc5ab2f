//! C ABI over `sidewalk-access`.
//!
//! Inputs and outputs are UTF-8 JSON strings. Every function returns an
//! [`SaStatus`]; on failure the calling thread's last error holds the error
//! record (`{"error": {"module", "kind", "message"}}`) and can be read with
//! [`sa_last_error_message`]. Strings handed out through `char **` out
//! parameters belong to the caller and are released with [`sa_string_free`].
//! Handles are immutable once built and may be shared across threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sidewalk_access::analysis::AnalysisOptions;
use sidewalk_access::geo::GeoPoint;
use sidewalk_access::graph::SidewalkGraph;
use sidewalk_access::pipeline::{
    load_graph, route_graph, run_analyze, run_graph, score_graph, select_profile, ScoreLevel, ScoreRequest,
};
use sidewalk_access::profiles::{load_profiles, GroupProfile, LabelWeighting};
use sidewalk_access::routing::{RouteOptions, Search};
use sidewalk_access::Error;

/// Result code of every `sa_*` call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Survey document failed schema validation.
    InvalidSurvey = 3,
    /// Any other malformed input: geometry, labels, graph document,
    /// profiles, parameters.
    InvalidInput = 4,
    UnknownProfile = 5,
    Unsnappable = 6,
    Disconnected = 7,
    /// Analysis could not be completed on a valid survey.
    AnalysisFailed = 8,
    Panic = 99,
}

/// Built sidewalk graph with its labels.
pub struct SaGraph {
    graph: SidewalkGraph,
}

/// Set of group profiles; `shortest` is always available in addition.
pub struct SaProfiles {
    profiles: Vec<GroupProfile>,
}

/// Score granularity for [`sa_scores`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaLevel {
    Segment = 0,
    Neighborhood = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: SaStatus,
    record: serde_json::Value,
}

impl Failure {
    fn new(status: SaStatus, kind: &str, message: impl Into<String>) -> Failure {
        let record = serde_json::json!({
            "error": { "module": "ffi", "kind": kind, "message": message.into() }
        });
        Failure { status, record }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let status = match (e.module(), e.kind()) {
            (_, "unknown_profile") => SaStatus::UnknownProfile,
            (_, "unsnappable") => SaStatus::Unsnappable,
            (_, "disconnected") => SaStatus::Disconnected,
            ("survey-model", _) => SaStatus::InvalidSurvey,
            ("analysis", _) => SaStatus::AnalysisFailed,
            _ => SaStatus::InvalidInput,
        };
        Failure {
            status,
            record: e.to_record(),
        }
    }
}

fn set_last_error(record: Option<&serde_json::Value>) {
    let text = record.map(|r| CString::new(r.to_string()).unwrap_or_default());
    LAST_ERROR.with(|cell| *cell.borrow_mut() = text);
}

/// Runs `body`, records its failure (or panic) and maps it to a status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SaStatus {
    let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|payload| {
        let message = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into());
        Err(Failure::new(SaStatus::Panic, "panic", message))
    });
    match outcome {
        Ok(()) => {
            set_last_error(None);
            SaStatus::Ok
        }
        Err(f) => {
            set_last_error(Some(&f.record));
            f.status
        }
    }
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(
            SaStatus::NullArgument,
            "null_argument",
            format!("`{name}` is null"),
        ));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure::new(SaStatus::InvalidUtf8, "invalid_utf8", format!("`{name}`: {e}")))
}

unsafe fn opt_text<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, name).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(SaStatus::NullArgument, "null_argument", format!("`{name}` is null")))
}

fn check_out<T>(p: *mut T, name: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(
            SaStatus::NullArgument,
            "null_argument",
            format!("`{name}` is null"),
        ))
    } else {
        Ok(())
    }
}

fn into_c(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure::new(SaStatus::InvalidInput, "interior_nul", "output contains a NUL byte"))
}

fn point(lat: f64, lon: f64, name: &str) -> Result<GeoPoint, Failure> {
    GeoPoint::new(lat, lon).map_err(|e| Failure::new(SaStatus::InvalidInput, "invalid_point", format!("{name}: {e}")))
}

fn weighting(severity_scaled: bool) -> LabelWeighting {
    if severity_scaled {
        LabelWeighting::SeverityScaled
    } else {
        LabelWeighting::TypeLevel
    }
}

/// Error record of the last failed call on this thread, or NULL after a
/// successful one. Owned by the library; valid until the next `sa_*` call
/// on the same thread.
#[no_mangle]
pub extern "C" fn sa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|cell| cell.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned through an out parameter. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn sa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Validates and analyzes a survey document. Writes the profile document
/// and the analysis report.
///
/// # Safety
/// `survey_json` must be a NUL-terminated string; out pointers must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sa_analyze_survey(
    survey_json: *const c_char,
    include_other: bool,
    profiles_out: *mut *mut c_char,
    report_out: *mut *mut c_char,
) -> SaStatus {
    guard(|| {
        check_out(profiles_out, "profiles_out")?;
        check_out(report_out, "report_out")?;
        let out = run_analyze(text(survey_json, "survey_json")?, AnalysisOptions { include_other })?;
        let profiles = into_c(out.profiles_json)?;
        let report = into_c(out.report_json).inspect_err(|_| drop(CString::from_raw(profiles)))?;
        *profiles_out = profiles;
        *report_out = report;
        Ok(())
    })
}

/// Builds a graph from sidewalk GeoJSON and a label list.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sa_graph_build(
    sidewalks_geojson: *const c_char,
    labels_json: *const c_char,
    merge_eps_m: f64,
    snap_max_m: f64,
    out: *mut *mut SaGraph,
) -> SaStatus {
    guard(|| {
        check_out(out, "out")?;
        let doc = run_graph(
            text(sidewalks_geojson, "sidewalks_geojson")?,
            text(labels_json, "labels_json")?,
            merge_eps_m,
            snap_max_m,
        )?;
        let graph = load_graph(&doc)?;
        *out = Box::into_raw(Box::new(SaGraph { graph }));
        Ok(())
    })
}

/// Loads a graph document written by `sidewalk-access graph`.
///
/// # Safety
/// `graph_json` must be NUL-terminated; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sa_graph_load(graph_json: *const c_char, out: *mut *mut SaGraph) -> SaStatus {
    guard(|| {
        check_out(out, "out")?;
        let graph = load_graph(text(graph_json, "graph_json")?)?;
        *out = Box::into_raw(Box::new(SaGraph { graph }));
        Ok(())
    })
}

/// # Safety
/// `graph` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn sa_graph_free(graph: *mut SaGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Node and edge counts.
///
/// # Safety
/// `graph` must be a live handle; out pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sa_graph_size(graph: *const SaGraph, nodes: *mut usize, edges: *mut usize) -> SaStatus {
    guard(|| {
        check_out(nodes, "nodes")?;
        check_out(edges, "edges")?;
        let g = &handle(graph, "graph")?.graph;
        *nodes = g.nodes().len();
        *edges = g.edges().len();
        Ok(())
    })
}

/// Loads a profile document (the `profiles.json` output of analysis, or a
/// list of custom profiles).
///
/// # Safety
/// `profiles_json` must be NUL-terminated; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sa_profiles_load(profiles_json: *const c_char, out: *mut *mut SaProfiles) -> SaStatus {
    guard(|| {
        check_out(out, "out")?;
        let profiles = load_profiles(text(profiles_json, "profiles_json")?).map_err(Error::from)?;
        *out = Box::into_raw(Box::new(SaProfiles { profiles }));
        Ok(())
    })
}

/// # Safety
/// `profiles` must be NULL or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn sa_profiles_free(profiles: *mut SaProfiles) {
    if !profiles.is_null() {
        drop(Box::from_raw(profiles));
    }
}

/// Number of loaded profiles, not counting `shortest`.
///
/// # Safety
/// `profiles` must be a live handle; `count` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sa_profiles_count(profiles: *const SaProfiles, count: *mut usize) -> SaStatus {
    guard(|| {
        check_out(count, "count")?;
        *count = handle(profiles, "profiles")?.profiles.len();
        Ok(())
    })
}

/// Scores segments or neighborhoods for one profile as GeoJSON. `level`
/// is an [`SaLevel`] value; `neighborhoods_geojson` may be NULL for
/// segment scores.
///
/// # Safety
/// Handles must be live; strings NUL-terminated; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn sa_scores(
    graph: *const SaGraph,
    profiles: *const SaProfiles,
    profile_id: *const c_char,
    level: u32,
    neighborhoods_geojson: *const c_char,
    percentile: f64,
    severity_scaled: bool,
    out: *mut *mut c_char,
) -> SaStatus {
    guard(|| {
        check_out(out, "out")?;
        let g = &handle(graph, "graph")?.graph;
        let set = &handle(profiles, "profiles")?.profiles;
        let id = text(profile_id, "profile_id")?;
        let profile = select_profile(set, id)?;
        let req = ScoreRequest {
            profile_id: id,
            level: match level {
                l if l == SaLevel::Segment as u32 => ScoreLevel::Segment,
                l if l == SaLevel::Neighborhood as u32 => ScoreLevel::Neighborhood,
                other => {
                    return Err(Failure::new(
                        SaStatus::InvalidInput,
                        "invalid_parameter",
                        format!("unknown level {other}"),
                    ))
                }
            },
            neighborhoods_geojson: opt_text(neighborhoods_geojson, "neighborhoods_geojson")?,
            percentile,
            weighting: weighting(severity_scaled),
        };
        *out = into_c(score_graph(g, &profile, &req)?)?;
        Ok(())
    })
}

/// Routes between two WGS84 points for one profile; writes a GeoJSON
/// FeatureCollection with a single route feature.
///
/// # Safety
/// Handles must be live; `profile_id` NUL-terminated; `out` valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn sa_route(
    graph: *const SaGraph,
    profiles: *const SaProfiles,
    profile_id: *const c_char,
    from_lat: f64,
    from_lon: f64,
    to_lat: f64,
    to_lon: f64,
    max_snap_m: f64,
    severity_scaled: bool,
    out: *mut *mut c_char,
) -> SaStatus {
    guard(|| {
        check_out(out, "out")?;
        let g = &handle(graph, "graph")?.graph;
        let set = &handle(profiles, "profiles")?.profiles;
        let profile = select_profile(set, text(profile_id, "profile_id")?)?;
        let options = RouteOptions {
            max_snap_m,
            search: Search::AStar,
            weighting: weighting(severity_scaled),
        };
        let from = point(from_lat, from_lon, "from")?;
        let to = point(to_lat, to_lon, "to")?;
        *out = into_c(route_graph(g, &profile, from, to, &options)?)?;
        Ok(())
    })
}
