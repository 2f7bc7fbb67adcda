use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use seaplan_ffi::*;

fn v(n: f64, e: f64) -> SeaplanVec2 {
    SeaplanVec2 { n, e }
}

fn vessel(n: f64, e: f64, heading_deg: f64, speed_mps: f64) -> SeaplanVessel {
    SeaplanVessel {
        position: v(n, e),
        heading_deg,
        speed_mps,
        radius_m: 250.0,
    }
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { seaplan_string_free(p) };
    s
}

/// Drives the head-on encounter through the handle API and checks that the
/// ego passes the target to starboard without contact.
#[test]
fn planner_head_on_pass() {
    let p = unsafe { seaplan_planner_new(ptr::null()) };
    assert!(!p.is_null());
    assert_eq!(unsafe { seaplan_planner_set_goal(p, v(7000.0, 0.0)) }, SeaplanStatus::Ok);

    let dt = 0.1;
    let mut ego_pos = (0.0_f64, 0.0_f64);
    let mut ego_vel = (10.0_f64, 0.0_f64);
    let mut min_sep = f64::INFINITY;
    let mut max_east = 0.0_f64;
    for k in 0..7000 {
        let t = k as f64 * dt;
        let target = SeaplanTarget {
            id: 7,
            vessel: vessel(6000.0 - 10.0 * t, 0.0, 180.0, 10.0),
        };
        let speed = (ego_vel.0 * ego_vel.0 + ego_vel.1 * ego_vel.1).sqrt();
        let heading = ego_vel.1.atan2(ego_vel.0).to_degrees();
        let ego = vessel(ego_pos.0, ego_pos.1, heading, speed);
        let mut out = SeaplanStepResult::default();
        let s = unsafe { seaplan_planner_step(p, &ego, &target, 1, &mut out) };
        assert_eq!(s, SeaplanStatus::Ok, "step {k}");
        ego_vel = (out.v_next.n, out.v_next.e);
        ego_pos = (ego_pos.0 + ego_vel.0 * dt, ego_pos.1 + ego_vel.1 * dt);
        let tn = 6000.0 - 10.0 * (t + dt);
        min_sep = min_sep.min(((ego_pos.0 - tn).powi(2) + ego_pos.1.powi(2)).sqrt());
        max_east = max_east.max(ego_pos.1);
        if ((ego_pos.0 - 7000.0).powi(2) + ego_pos.1.powi(2)).sqrt() < 100.0 {
            break;
        }
    }
    unsafe { seaplan_planner_free(p) };
    assert!(min_sep > 550.0, "min separation {min_sep}");
    assert!(max_east > 100.0, "ego should turn to starboard, max east {max_east}");
}

#[test]
fn planner_reports_conflict_and_bad_config() {
    let p = unsafe { seaplan_planner_new(ptr::null()) };
    let ego = vessel(0.0, 0.0, 0.0, 5.0);
    let target = SeaplanTarget {
        id: 1,
        vessel: vessel(100.0, 0.0, 180.0, 5.0),
    };
    let mut out = SeaplanStepResult::default();
    let s = unsafe { seaplan_planner_step(p, &ego, &target, 1, &mut out) };
    assert_eq!(s, SeaplanStatus::Conflict);
    assert!(!out.feasible);
    assert_eq!(out.v_star, v(0.0, 0.0));
    let msg = unsafe { CStr::from_ptr(seaplan_last_error()) }.to_string_lossy().into_owned();
    assert!(msg.contains("target:1"), "{msg}");

    let far = [
        SeaplanTarget { id: 3, vessel: vessel(5000.0, 0.0, 180.0, 5.0) },
        SeaplanTarget { id: 3, vessel: vessel(5000.0, 900.0, 180.0, 5.0) },
    ];
    assert_eq!(unsafe { seaplan_planner_step(p, &ego, far.as_ptr(), 2, &mut out) }, SeaplanStatus::InvalidArgument);
    assert_eq!(unsafe { seaplan_planner_step(p, &ego, ptr::null(), 1, &mut out) }, SeaplanStatus::NullPointer);
    assert_eq!(unsafe { seaplan_planner_step(ptr::null_mut(), &ego, ptr::null(), 0, &mut out) }, SeaplanStatus::NullPointer);
    unsafe { seaplan_planner_free(p) };

    let bad = CString::new(r#"{"risk": {"tcpa": 5}}"#).unwrap();
    assert!(unsafe { seaplan_planner_new(bad.as_ptr()) }.is_null());
    let msg = unsafe { CStr::from_ptr(seaplan_last_error()) }.to_string_lossy().into_owned();
    assert!(msg.contains("risk"), "{msg}");

    let ok = CString::new(r#"{"planner": {"v_max_mps": 8, "cruise_mps": 6, "goal_ne": [100, 0]}}"#).unwrap();
    let p = unsafe { seaplan_planner_new(ok.as_ptr()) };
    assert!(!p.is_null());
    let ego = vessel(0.0, 0.0, 0.0, 6.0);
    let s = unsafe { seaplan_planner_step(p, &ego, ptr::null(), 0, &mut out) };
    assert_eq!(s, SeaplanStatus::Ok);
    assert!((out.v_ref.n - 6.0).abs() < 1e-9);
    unsafe { seaplan_planner_free(p) };
}

#[test]
fn grounding_disc_bends_the_command() {
    let p = unsafe { seaplan_planner_new(ptr::null()) };
    unsafe { seaplan_planner_set_goal(p, v(5000.0, 0.0)) };
    let discs = [SeaplanDisc { center: v(1500.0, 0.0), radius: 300.0 }];
    assert_eq!(unsafe { seaplan_planner_set_grounding(p, discs.as_ptr(), 1) }, SeaplanStatus::Ok);
    let ego = vessel(0.0, 0.0, 0.0, 10.0);
    let mut out = SeaplanStepResult::default();
    assert_eq!(unsafe { seaplan_planner_step(p, &ego, ptr::null(), 0, &mut out) }, SeaplanStatus::Ok);
    assert!(out.n_active_constraints >= 1);
    assert!(out.v_star.e.abs() > 1e-6, "{:?}", out.v_star);

    let bad = [SeaplanDisc { center: v(0.0, 0.0), radius: -1.0 }];
    assert_eq!(unsafe { seaplan_planner_set_grounding(p, bad.as_ptr(), 1) }, SeaplanStatus::InvalidArgument);
    unsafe { seaplan_planner_free(p) };
}

#[test]
fn convexify_square() {
    let sq = [v(0.0, 0.0), v(0.0, 400.0), v(400.0, 400.0), v(400.0, 0.0)];
    let mut cover: *mut SeaplanCover = ptr::null_mut();
    let s = unsafe { seaplan_convexify(sq.as_ptr(), sq.len(), ptr::null(), 30.0, &mut cover) };
    assert_eq!(s, SeaplanStatus::Ok);
    let n = unsafe { seaplan_cover_len(cover) };
    assert!(n >= 1);
    let mut d = SeaplanDisc::default();
    for i in 0..n {
        assert_eq!(unsafe { seaplan_cover_circle(cover, i, &mut d) }, SeaplanStatus::Ok);
        assert!(d.radius >= 100.0);
    }
    assert_eq!(unsafe { seaplan_cover_circle(cover, n, &mut d) }, SeaplanStatus::InvalidArgument);
    let spill = unsafe { seaplan_cover_spill_ratio(cover) };
    assert!((0.0..1.0).contains(&spill));
    assert!(unsafe { seaplan_cover_proven_optimal(cover) });
    let json = take_string(unsafe { seaplan_cover_to_json(cover) });
    assert!(json.contains("\"circles\"") && !json.contains("solve_time_s\":0."), "{json}");
    unsafe { seaplan_cover_free(cover) };

    let line = [v(0.0, 0.0), v(1.0, 1.0), v(2.0, 2.0)];
    let s = unsafe { seaplan_convexify(line.as_ptr(), 3, ptr::null(), 1.0, &mut cover) };
    assert_eq!(s, SeaplanStatus::InvalidArgument);
    assert!(cover.is_null());
    let cfg = CString::new(r#"{"fine_res": 5}"#).unwrap();
    let s = unsafe { seaplan_convexify(sq.as_ptr(), 4, cfg.as_ptr(), 1.0, &mut cover) };
    assert_eq!(s, SeaplanStatus::ParseError);
    assert_eq!(unsafe { seaplan_cover_len(ptr::null()) }, 0);
    assert!(unsafe { seaplan_cover_spill_ratio(ptr::null()) }.is_nan());
}

#[test]
fn simulate_json_matches_library_run() {
    let scn = seaplan::scenario::case_a();
    let text = CString::new(serde_json::to_string(&scn).unwrap()).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { seaplan_simulate_json(text.as_ptr(), &mut out) }, SeaplanStatus::Ok);
    let json = take_string(out);
    let expected = serde_json::to_string(&seaplan::simulator::run(&scn).unwrap().metrics.without_timing()).unwrap();
    assert_eq!(json, expected);

    let bad = CString::new("{\"ego\": 3}").unwrap();
    assert_eq!(unsafe { seaplan_simulate_json(bad.as_ptr(), &mut out) }, SeaplanStatus::ParseError);
    assert!(out.is_null());
    assert_eq!(unsafe { seaplan_simulate_json(ptr::null(), &mut out) }, SeaplanStatus::NullPointer);
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

/// Compiles a small C program against the generated header and, when the
/// static library is present, links and runs it.
#[test]
fn c_header_compiles_and_links() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("seaplan.h").exists());
    let Some(cc) = ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
    else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "seaplan.h"
int main(void) {
    SeaplanPlanner *p = seaplan_planner_new(NULL);
    if (!p) return 10;
    SeaplanVec2 goal = {7000.0, 0.0};
    if (seaplan_planner_set_goal(p, goal) != SEAPLAN_STATUS_OK) return 11;
    SeaplanVessel ego = {{0.0, 0.0}, 0.0, 10.0, 250.0};
    SeaplanTarget t = {1, {{6000.0, 0.0}, 180.0, 10.0, 250.0}};
    SeaplanStepResult r;
    if (seaplan_planner_step(p, &ego, &t, 1, &r) != SEAPLAN_STATUS_OK) return 12;
    seaplan_planner_free(p);
    if (seaplan_planner_step(NULL, &ego, &t, 1, &r) != SEAPLAN_STATUS_NULL_POINTER) return 13;
    if (!seaplan_last_error()) return 14;
    printf("%s %.3f %.3f\n", seaplan_version(), r.v_next.n, r.v_next.e);
    return 0;
}
"#,
    )
    .unwrap();

    let lib = target_dir().join("libseaplan_ffi.a");
    let exe = tmp.path().join("smoke");
    let mut cmd = Command::new(cc);
    cmd.arg("-std=c99").arg("-Wall").arg("-Werror").arg("-I").arg(&header_dir).arg(&src);
    if lib.exists() {
        cmd.arg(&lib).args(["-lpthread", "-ldl", "-lm"]).arg("-o").arg(&exe);
    } else {
        eprintln!("{} not built; compiling only", lib.display());
        cmd.arg("-c").arg("-o").arg(tmp.path().join("smoke.o"));
    }
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    if lib.exists() {
        let run = Command::new(&exe).output().unwrap();
        assert!(run.status.success(), "exit {:?}", run.status.code());
        let stdout = String::from_utf8_lossy(&run.stdout);
        assert!(stdout.starts_with(env!("CARGO_PKG_VERSION")), "{stdout}");
    }
}
