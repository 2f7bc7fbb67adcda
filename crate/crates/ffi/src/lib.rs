//! C ABI over the `seaplan` planner.
//!
//! Every function returns a [`SeaplanStatus`] (or a nullable pointer) and
//! never unwinds across the boundary. On failure a message is available from
//! [`seaplan_last_error`] on the calling thread. Handles are opaque and must be
//! released with their matching `_free` function.

use std::cell::RefCell;
use std::collections::HashMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::time::Duration;

use serde::Deserialize;

use seaplan::circle_cover::{convexify, CircleCover, CircleCoverError, CoverConfig};
use seaplan::colregs::{classify, ColregsConfig, EncounterKind};
use seaplan::geometry::{Disc, HalfPlane, Polygon, Vec2};
use seaplan::risk::{dcpa, is_active_threat, tcpa, RelativeKinematics, RiskThresholds};
use seaplan::safe_velocity::{plan_step, project, speed_polygon, PlanRequest, PlannerParams, TrackedTarget};
use seaplan::scenario::{parse_json, PlannerConfig, Scenario};
use seaplan::simulator::{run, SimError};
use seaplan::velocity_obstacle::UncertaintyBounds;
use seaplan::vessel::VesselState;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeaplanStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The constraint set admits no velocity; a stop command was returned.
    Infeasible = 3,
    /// The ego already overlaps an inflated obstacle.
    Conflict = 4,
    Uncoverable = 5,
    /// The solver stopped early; the best cover found is still returned.
    TimeLimit = 6,
    ParseError = 7,
    Panic = 8,
}

/// North/East vector.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SeaplanVec2 {
    pub n: f64,
    pub e: f64,
}

/// `{v : normal · (v − anchor) >= 0}`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SeaplanHalfPlane {
    pub normal: SeaplanVec2,
    pub anchor: SeaplanVec2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SeaplanDisc {
    pub center: SeaplanVec2,
    pub radius: f64,
}

/// Vessel kinematics. Heading in degrees clockwise from North.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SeaplanVessel {
    pub position: SeaplanVec2,
    pub heading_deg: f64,
    pub speed_mps: f64,
    pub radius_m: f64,
}

/// A tracked target. `id` keys the encounter role kept between steps.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SeaplanTarget {
    pub id: u64,
    pub vessel: SeaplanVessel,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SeaplanStepResult {
    pub v_ref: SeaplanVec2,
    pub v_star: SeaplanVec2,
    /// Command after the acceleration limit.
    pub v_next: SeaplanVec2,
    pub feasible: bool,
    /// Target and grounding constraints in force this step.
    pub n_active_constraints: usize,
    /// Wall-clock time of the projection (s).
    pub solve_time_s: f64,
}

/// Opaque planner state.
pub struct SeaplanPlanner {
    params: PlannerParams,
    risk: RiskThresholds,
    uncertainty: UncertaintyBounds,
    colregs: ColregsConfig,
    goal: Vec2,
    grounding: Vec<Disc>,
    latched: HashMap<u64, EncounterKind>,
}

/// Opaque circle cover.
pub struct SeaplanCover {
    cover: CircleCover,
}

impl From<Vec2> for SeaplanVec2 {
    fn from(v: Vec2) -> Self {
        SeaplanVec2 { n: v.n, e: v.e }
    }
}

impl From<SeaplanVec2> for Vec2 {
    fn from(v: SeaplanVec2) -> Self {
        Vec2::new(v.n, v.e)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: SeaplanStatus, msg: impl Into<String>) -> SeaplanStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning a panic into `SEAPLAN_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> SeaplanStatus) -> SeaplanStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(SeaplanStatus::Panic, format!("panic: {msg}"))
        }
    }
}

/// Reads an optional NUL-terminated UTF-8 string.
unsafe fn opt_str<'a>(s: *const c_char) -> Result<Option<&'a str>, SeaplanStatus> {
    if s.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(s)
        .to_str()
        .map(Some)
        .map_err(|_| fail(SeaplanStatus::InvalidArgument, "string is not valid UTF-8"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], SeaplanStatus> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(fail(SeaplanStatus::NullPointer, "array pointer is null"))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

fn finite(v: SeaplanVec2) -> bool {
    v.n.is_finite() && v.e.is_finite()
}

fn vessel_state(id: String, v: &SeaplanVessel) -> Result<VesselState, SeaplanStatus> {
    let s = VesselState::from_heading(id, v.position.into(), v.heading_deg, v.speed_mps, v.radius_m);
    s.validate().map_err(|m| fail(SeaplanStatus::InvalidArgument, m))?;
    Ok(s)
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn seaplan_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn seaplan_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn seaplan_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Time and distance at closest approach of B relative to A.
///
/// # Safety
/// Output pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn seaplan_tcpa_dcpa(
    p_a: SeaplanVec2,
    v_a: SeaplanVec2,
    p_b: SeaplanVec2,
    v_b: SeaplanVec2,
    out_tcpa_s: *mut f64,
    out_dcpa_m: *mut f64,
) -> SeaplanStatus {
    guard(|| {
        if out_tcpa_s.is_null() || out_dcpa_m.is_null() {
            return fail(SeaplanStatus::NullPointer, "output pointer is null");
        }
        if ![p_a, v_a, p_b, v_b].into_iter().all(finite) {
            return fail(SeaplanStatus::InvalidArgument, "non-finite input");
        }
        let rk = RelativeKinematics::new(p_a.into(), v_a.into(), p_b.into(), v_b.into());
        *out_tcpa_s = tcpa(&rk);
        *out_dcpa_m = dcpa(&rk);
        SeaplanStatus::Ok
    })
}

/// Inscribed `n`-gon of the speed circle. Writes up to `cap` half-planes and
/// stores `n` in `out_len`; pass `cap = 0` to query the size.
///
/// # Safety
/// `out` must be valid for `cap` writes; `out_len` for one.
#[no_mangle]
pub unsafe extern "C" fn seaplan_speed_polygon(
    v_max: f64,
    n: usize,
    out: *mut SeaplanHalfPlane,
    cap: usize,
    out_len: *mut usize,
) -> SeaplanStatus {
    guard(|| {
        if out_len.is_null() || (cap > 0 && out.is_null()) {
            return fail(SeaplanStatus::NullPointer, "output pointer is null");
        }
        if !(v_max > 0.0 && v_max.is_finite()) || n < 3 {
            return fail(SeaplanStatus::InvalidArgument, "need v_max > 0 and n >= 3");
        }
        let planes = speed_polygon(v_max, n);
        *out_len = planes.len();
        for (i, h) in planes.iter().take(cap).enumerate() {
            *out.add(i) = SeaplanHalfPlane {
                normal: h.normal.into(),
                anchor: h.anchor.into(),
            };
        }
        SeaplanStatus::Ok
    })
}

/// Closest point to `v_ref` inside every half-plane. Infeasible sets give
/// `SEAPLAN_STATUS_INFEASIBLE` and a zero vector.
///
/// # Safety
/// `planes` must hold `n` elements; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn seaplan_solve_projection(
    planes: *const SeaplanHalfPlane,
    n: usize,
    v_ref: SeaplanVec2,
    out: *mut SeaplanVec2,
) -> SeaplanStatus {
    guard(|| {
        if out.is_null() {
            return fail(SeaplanStatus::NullPointer, "output pointer is null");
        }
        let raw = match slice(planes, n) {
            Ok(s) => s,
            Err(s) => return s,
        };
        if !finite(v_ref) {
            return fail(SeaplanStatus::InvalidArgument, "non-finite v_ref");
        }
        let mut hs = Vec::with_capacity(raw.len());
        for (i, h) in raw.iter().enumerate() {
            if !finite(h.anchor) {
                return fail(SeaplanStatus::InvalidArgument, format!("half-plane {i}: non-finite anchor"));
            }
            match HalfPlane::new(h.normal.into(), h.anchor.into()) {
                Ok(h) => hs.push(h),
                Err(e) => return fail(SeaplanStatus::InvalidArgument, format!("half-plane {i}: {e}")),
            }
        }
        match project(&hs, v_ref.into()) {
            Ok(v) => {
                *out = v.into();
                SeaplanStatus::Ok
            }
            Err(_) => {
                *out = SeaplanVec2::default();
                fail(SeaplanStatus::Infeasible, "constraint set is empty")
            }
        }
    })
}

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PlannerSettings {
    planner: PlannerConfig,
    risk: RiskThresholds,
    uncertainty: UncertaintyBounds,
    colregs: ColregsConfig,
}

/// Creates a planner. `config_json` may be null for defaults, or an object
/// with optional `planner`, `risk`, `uncertainty` and `colregs` members using
/// the scenario file layout. Returns null on error.
///
/// # Safety
/// `config_json` must be null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn seaplan_planner_new(config_json: *const c_char) -> *mut SeaplanPlanner {
    let mut handle = ptr::null_mut();
    guard(|| {
        let settings = match opt_str(config_json) {
            Ok(None) => PlannerSettings::default(),
            Ok(Some(text)) => match parse_json::<PlannerSettings>(text) {
                Ok(s) => s,
                Err(e) => return fail(SeaplanStatus::ParseError, e.to_string()),
            },
            Err(s) => return s,
        };
        let params = settings.planner.params();
        let checks = [
            params.validate(),
            settings.risk.validate(),
            settings.uncertainty.validate(),
        ];
        if let Some(Err(m)) = checks.into_iter().find(Result::is_err) {
            return fail(SeaplanStatus::InvalidArgument, m);
        }
        handle = Box::into_raw(Box::new(SeaplanPlanner {
            params,
            risk: settings.risk,
            uncertainty: settings.uncertainty,
            colregs: settings.colregs,
            goal: settings.planner.goal_ne.unwrap_or(Vec2::ZERO),
            grounding: Vec::new(),
            latched: HashMap::new(),
        }));
        SeaplanStatus::Ok
    });
    handle
}

/// # Safety
/// `p` must be null or a live planner handle.
#[no_mangle]
pub unsafe extern "C" fn seaplan_planner_free(p: *mut SeaplanPlanner) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// # Safety
/// `p` must be a live planner handle.
#[no_mangle]
pub unsafe extern "C" fn seaplan_planner_set_goal(p: *mut SeaplanPlanner, goal: SeaplanVec2) -> SeaplanStatus {
    guard(|| {
        let Some(p) = p.as_mut() else {
            return fail(SeaplanStatus::NullPointer, "planner is null");
        };
        if !finite(goal) {
            return fail(SeaplanStatus::InvalidArgument, "non-finite goal");
        }
        p.goal = goal.into();
        SeaplanStatus::Ok
    })
}

/// Replaces the shallow-water discs.
///
/// # Safety
/// `p` must be a live planner handle and `discs` hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn seaplan_planner_set_grounding(
    p: *mut SeaplanPlanner,
    discs: *const SeaplanDisc,
    n: usize,
) -> SeaplanStatus {
    guard(|| {
        let Some(p) = p.as_mut() else {
            return fail(SeaplanStatus::NullPointer, "planner is null");
        };
        let raw = match slice(discs, n) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let mut out = Vec::with_capacity(raw.len());
        for (i, d) in raw.iter().enumerate() {
            if !finite(d.center) {
                return fail(SeaplanStatus::InvalidArgument, format!("disc {i}: non-finite center"));
            }
            match Disc::new(d.center.into(), d.radius) {
                Ok(d) => out.push(d),
                Err(e) => return fail(SeaplanStatus::InvalidArgument, format!("disc {i}: {e}")),
            }
        }
        p.grounding = out;
        SeaplanStatus::Ok
    })
}

/// One planning step. Encounter roles are held per target id from the step a
/// target becomes a threat until it stops being one.
///
/// Returns `SEAPLAN_STATUS_CONFLICT` when the ego overlaps an inflated
/// obstacle and `SEAPLAN_STATUS_INFEASIBLE` when no safe velocity exists; in
/// both cases `out` holds the braking command.
///
/// # Safety
/// `p` must be a live planner handle, `ego` and `out` valid, `targets` hold
/// `n_targets` elements.
#[no_mangle]
pub unsafe extern "C" fn seaplan_planner_step(
    p: *mut SeaplanPlanner,
    ego: *const SeaplanVessel,
    targets: *const SeaplanTarget,
    n_targets: usize,
    out: *mut SeaplanStepResult,
) -> SeaplanStatus {
    guard(|| {
        let Some(p) = p.as_mut() else {
            return fail(SeaplanStatus::NullPointer, "planner is null");
        };
        let (Some(ego), Some(out)) = (ego.as_ref(), out.as_mut()) else {
            return fail(SeaplanStatus::NullPointer, "ego or output pointer is null");
        };
        let raw = match slice(targets, n_targets) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let ego = match vessel_state("ego".into(), ego) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let mut tracked = Vec::with_capacity(raw.len());
        let mut latched = HashMap::with_capacity(raw.len());
        for t in raw {
            let state = match vessel_state(t.id.to_string(), &t.vessel) {
                Ok(s) => s,
                Err(s) => return s,
            };
            if latched.contains_key(&t.id) {
                return fail(SeaplanStatus::InvalidArgument, format!("duplicate target id {}", t.id));
            }
            let rk = RelativeKinematics::new(ego.position, ego.velocity, state.position, state.velocity);
            let role = if is_active_threat(&rk, &p.risk) {
                Some(
                    p.latched
                        .get(&t.id)
                        .copied()
                        .unwrap_or_else(|| classify(&ego, &state, &p.colregs)),
                )
            } else {
                None
            };
            latched.insert(t.id, role);
            tracked.push(TrackedTarget {
                state,
                uncertainty: p.uncertainty,
                latched: role,
            });
        }

        let outcome = plan_step(&PlanRequest {
            ego: &ego,
            targets: &tracked,
            grounding: &p.grounding,
            grounding_eps_p: p.uncertainty.eps_p,
            goal: p.goal,
            params: &p.params,
            thresholds: &p.risk,
            colregs: &p.colregs,
        });
        p.latched = latched.into_iter().filter_map(|(id, r)| r.map(|r| (id, r))).collect();
        *out = SeaplanStepResult {
            v_ref: outcome.v_ref.into(),
            v_star: outcome.v_star.into(),
            v_next: outcome.v_next.into(),
            feasible: outcome.feasible,
            n_active_constraints: outcome.active_constraints.len(),
            solve_time_s: outcome.solve_time,
        };
        if let Some((tag, err)) = outcome.conflict {
            fail(SeaplanStatus::Conflict, format!("{tag}: {err}"))
        } else if !outcome.feasible {
            fail(SeaplanStatus::Infeasible, "no velocity satisfies all constraints")
        } else {
            SeaplanStatus::Ok
        }
    })
}

/// Covers a polygon with circles. `config_json` may be null for defaults.
/// On `SEAPLAN_STATUS_OK` or `SEAPLAN_STATUS_TIME_LIMIT`, `*out` receives a
/// cover handle; otherwise it is set to null.
///
/// # Safety
/// `vertices` must hold `n` elements; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn seaplan_convexify(
    vertices: *const SeaplanVec2,
    n: usize,
    config_json: *const c_char,
    time_limit_s: f64,
    out: *mut *mut SeaplanCover,
) -> SeaplanStatus {
    guard(|| {
        if out.is_null() {
            return fail(SeaplanStatus::NullPointer, "output pointer is null");
        }
        *out = ptr::null_mut();
        let raw = match slice(vertices, n) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let poly = match Polygon::new(raw.iter().map(|&v| v.into()).collect()) {
            Ok(p) => p,
            Err(e) => return fail(SeaplanStatus::InvalidArgument, e.to_string()),
        };
        let cfg = match opt_str(config_json) {
            Ok(None) => CoverConfig::default(),
            Ok(Some(text)) => match parse_json::<CoverConfig>(text) {
                Ok(c) => c,
                Err(e) => return fail(SeaplanStatus::ParseError, e.to_string()),
            },
            Err(s) => return s,
        };
        if !(time_limit_s >= 0.0 && time_limit_s.is_finite()) {
            return fail(SeaplanStatus::InvalidArgument, "time limit must be >= 0");
        }
        let (cover, status) = match convexify(&poly, &cfg, Duration::from_secs_f64(time_limit_s)) {
            Ok(c) => (c, SeaplanStatus::Ok),
            Err(CircleCoverError::TimeLimit(c)) => {
                set_error("time limit reached; returning the best cover found");
                (*c, SeaplanStatus::TimeLimit)
            }
            Err(e @ (CircleCoverError::UncoverableRegion { .. } | CircleCoverError::DegeneratePolygon)) => {
                return fail(SeaplanStatus::Uncoverable, e.to_string())
            }
            Err(e @ CircleCoverError::InvalidConfig(_)) => return fail(SeaplanStatus::InvalidArgument, e.to_string()),
            Err(e) => return fail(SeaplanStatus::Infeasible, e.to_string()),
        };
        *out = Box::into_raw(Box::new(SeaplanCover { cover }));
        status
    })
}

/// # Safety
/// `c` must be null or a live cover handle.
#[no_mangle]
pub unsafe extern "C" fn seaplan_cover_free(c: *mut SeaplanCover) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Number of circles; 0 for null.
///
/// # Safety
/// `c` must be null or a live cover handle.
#[no_mangle]
pub unsafe extern "C" fn seaplan_cover_len(c: *const SeaplanCover) -> usize {
    c.as_ref().map_or(0, |c| c.cover.circles.len())
}

/// # Safety
/// `c` must be a live cover handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn seaplan_cover_circle(c: *const SeaplanCover, i: usize, out: *mut SeaplanDisc) -> SeaplanStatus {
    guard(|| {
        let (Some(c), Some(out)) = (c.as_ref(), out.as_mut()) else {
            return fail(SeaplanStatus::NullPointer, "cover or output pointer is null");
        };
        match c.cover.circles.get(i) {
            Some(d) => {
                *out = SeaplanDisc {
                    center: d.center.into(),
                    radius: d.radius,
                };
                SeaplanStatus::Ok
            }
            None => fail(SeaplanStatus::InvalidArgument, format!("index {i} out of range")),
        }
    })
}

/// Share of covered area lying outside the polygon; NaN for null.
///
/// # Safety
/// `c` must be null or a live cover handle.
#[no_mangle]
pub unsafe extern "C" fn seaplan_cover_spill_ratio(c: *const SeaplanCover) -> f64 {
    c.as_ref().map_or(f64::NAN, |c| c.cover.spill_ratio)
}

/// # Safety
/// `c` must be null or a live cover handle.
#[no_mangle]
pub unsafe extern "C" fn seaplan_cover_proven_optimal(c: *const SeaplanCover) -> bool {
    c.as_ref().is_some_and(|c| c.cover.solver.proven_optimal)
}

/// Cover as JSON, without timing. Free with [`seaplan_string_free`].
///
/// # Safety
/// `c` must be null or a live cover handle.
#[no_mangle]
pub unsafe extern "C" fn seaplan_cover_to_json(c: *const SeaplanCover) -> *mut c_char {
    let mut s = ptr::null_mut();
    guard(|| {
        let Some(c) = c.as_ref() else {
            return fail(SeaplanStatus::NullPointer, "cover is null");
        };
        match serde_json::to_string(&c.cover.clone().without_timing()) {
            Ok(text) => {
                s = owned_string(text);
                SeaplanStatus::Ok
            }
            Err(e) => fail(SeaplanStatus::Panic, e.to_string()),
        }
    });
    s
}

/// Runs a scenario given as JSON and stores its metrics (without timing) as a
/// JSON string in `*out_metrics_json`. Relative `cover_file` paths resolve
/// against the working directory.
///
/// # Safety
/// `scenario_json` must be a NUL-terminated string and `out_metrics_json`
/// valid for writes. Free the result with [`seaplan_string_free`].
#[no_mangle]
pub unsafe extern "C" fn seaplan_simulate_json(
    scenario_json: *const c_char,
    out_metrics_json: *mut *mut c_char,
) -> SeaplanStatus {
    guard(|| {
        if out_metrics_json.is_null() {
            return fail(SeaplanStatus::NullPointer, "output pointer is null");
        }
        *out_metrics_json = ptr::null_mut();
        let text = match opt_str(scenario_json) {
            Ok(Some(t)) => t,
            Ok(None) => return fail(SeaplanStatus::NullPointer, "scenario is null"),
            Err(s) => return s,
        };
        let scn = match Scenario::from_json(text) {
            Ok(s) => s,
            Err(e) => return fail(SeaplanStatus::ParseError, e.to_string()),
        };
        let out = match run(&scn) {
            Ok(o) => o,
            Err(e @ SimError::ScenarioInvalid(_)) => return fail(SeaplanStatus::Conflict, e.to_string()),
            Err(e) => return fail(SeaplanStatus::InvalidArgument, e.to_string()),
        };
        match serde_json::to_string(&out.metrics.without_timing()) {
            Ok(json) => {
                *out_metrics_json = owned_string(json);
                SeaplanStatus::Ok
            }
            Err(e) => fail(SeaplanStatus::Panic, e.to_string()),
        }
    })
}
