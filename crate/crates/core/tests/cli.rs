use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn seaplan() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_seaplan"));
    c.env_clear();
    c
}

fn run(args: &[&str]) -> Output {
    seaplan().args(args).output().expect("spawn seaplan")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_json(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_schema(schema: &str, instance: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{schema}.schema.json"));
    let schema = read_json(&path);
    let validator = jsonschema::validator_for(&schema).expect("valid schema");
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{schema} schema violations: {errors:?}");
}

fn disc_polygon(center: (f64, f64), r: f64, n: usize) -> Value {
    let pts: Vec<[f64; 2]> = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            [center.0 + r * t.cos(), center.1 + r * t.sin()]
        })
        .collect();
    json!(pts)
}

#[test]
fn convexify_disc_fixture_single_circle() {
    let tmp = TempDir::new().unwrap();
    let region = write_json(tmp.path(), "disc.json", &disc_polygon((10.0, 10.0), 290.0, 96));
    let cfg = write_json(tmp.path(), "cfg.json", &json!({"margin_m": 1210.0}));
    let out = tmp.path().join("cover.json");
    let o = run(&["convexify", "--region", p(&region), "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let summary = String::from_utf8_lossy(&o.stdout);
    assert!(summary.contains("circles 1") && summary.contains("proven_optimal true"), "{summary}");
    let cover = read_json(&out);
    assert_schema("cover", &cover);
    assert_eq!(cover["circles"].as_array().unwrap().len(), 1);
    assert_eq!(cover["circles"][0]["radius_m"], json!(300.0));
    assert!(cover["solver"].get("solve_time_s").is_none());

    let again = tmp.path().join("cover2.json");
    run(&["convexify", "--region", p(&region), "--config", p(&cfg), "--out", p(&again)]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());

    let timed = tmp.path().join("timed.json");
    run(&["convexify", "--region", p(&region), "--config", p(&cfg), "--out", p(&timed), "--timing"]);
    assert!(read_json(&timed)["solver"]["solve_time_s"].is_number());
}

#[test]
fn convexify_uncoverable_and_degenerate_exit_2() {
    let tmp = TempDir::new().unwrap();
    let square = write_json(tmp.path(), "square.json", &json!([[0, 0], [0, 400], [400, 400], [400, 0]]));
    let tiny = write_json(tmp.path(), "tiny.json", &json!({"radii_m": [1.0]}));
    let out = tmp.path().join("out.json");
    let o = run(&["convexify", "--region", p(&square), "--config", p(&tiny), "--out", p(&out)]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("not reachable"));
    assert!(!out.exists());

    let sliver = write_json(tmp.path(), "sliver.json", &json!({"polygon": [[10, 20], [12, 10], [11, 22]]}));
    let o = run(&["convexify", "--region", p(&sliver), "--out", p(&out)]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn convexify_time_limit_exit_3_writes_incumbent() {
    let tmp = TempDir::new().unwrap();
    let region = write_json(
        tmp.path(),
        "gen.json",
        &json!({"generated": {"seed": 19, "r0_m": 800.0, "center_ne": [0, 0]}}),
    );
    let out = tmp.path().join("out.json");
    let o = run(&["convexify", "--region", p(&region), "--out", p(&out), "--time-limit", "0.001"]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let cover = read_json(&out);
    assert_schema("cover", &cover);
    assert_eq!(cover["solver"]["proven_optimal"], json!(false));
    assert!(!cover["circles"].as_array().unwrap().is_empty());
}

#[test]
fn convexify_input_errors_exit_1() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out.json");
    let o = run(&["convexify", "--region", "/nonexistent/region.json", "--out", p(&out)]);
    assert_eq!(code(&o), 1);

    let region = write_json(tmp.path(), "r.json", &json!([[0, 0], [0, 400], [400, 400], [400, 0]]));
    let cfg = write_json(tmp.path(), "cfg.json", &json!({"fine_res_m": "fine"}));
    let o = run(&["convexify", "--region", p(&region), "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("fine_res_m"), "{}", stderr(&o));

    let cfg = write_json(tmp.path(), "cfg2.json", &json!({"radii_m": [300, 200]}));
    let o = run(&["convexify", "--region", p(&region), "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("radii"), "{}", stderr(&o));
}

fn emit(dir: &Path) -> (PathBuf, PathBuf) {
    let o = run(&["scenarios", "--emit", p(dir)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    (dir.join("case_a.json"), dir.join("case_b.json"))
}

#[test]
fn emitted_scenarios_follow_the_encounter_table() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = emit(tmp.path());
    let a = read_json(&a);
    let b = read_json(&b);
    assert_schema("scenario", &a);
    assert_schema("scenario", &b);
    assert_eq!(a["targets"][0]["start_ne"], json!([6000.0, 0.0]));
    assert_eq!(a["targets"][0]["heading_deg"], json!(180.0));
    assert_eq!(a["targets"][0]["speed_mps"], json!(10.0));
    let headings: Vec<f64> = b["targets"].as_array().unwrap().iter().map(|t| t["heading_deg"].as_f64().unwrap()).collect();
    assert_eq!(headings, vec![270.0, 180.0]);
}

#[test]
fn simulate_case_a_then_plot_and_report() {
    let tmp = TempDir::new().unwrap();
    let (a, _) = emit(tmp.path());
    let out = tmp.path().join("run_a");
    let o = run(&["simulate", "--scenario", p(&a), "--out-dir", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("goal_reached true"));

    let metrics = read_json(&out.join("metrics.json"));
    assert_schema("metrics", &metrics);
    assert_eq!(metrics["goal_reached"], json!(true));
    assert_eq!(metrics["collision_free"], json!(true));
    assert!(metrics.get("timing").is_none());
    assert_schema("cover", &read_json(&out.join("covers.json")));

    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "t,ego_n,ego_e,ego_vn,ego_ve,V1_n,V1_e,feasible,qp_ms,tags");
    let second = csv.lines().nth(1).unwrap();
    assert!(second.starts_with("0,0,0,10,0,6000,0,1,,"), "{second}");

    let svg = tmp.path().join("a.svg");
    let o = run(&["plot", "--log", p(&out.join("trajectory.csv")), "--out", p(&svg), "--goal", "7000,0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let plain = fs::read_to_string(&svg).unwrap();
    assert_eq!(plain.matches("<polyline").count(), 2);
    assert_eq!(plain.matches("<circle").count(), 0);

    let svg2 = tmp.path().join("a_cover.svg");
    let (log, covers) = (out.join("trajectory.csv"), out.join("covers.json"));
    let args = ["plot", "--log", p(&log), "--cover", p(&covers), "--out", p(&svg2)];
    assert_eq!(code(&run(&args)), 0);
    let covered = fs::read_to_string(&svg2).unwrap();
    assert_eq!(covered.matches("<polyline").count(), 2);
    assert!(covered.matches("<circle").count() >= 1);
    assert_eq!(covered.matches("class=\"region\"").count(), 1);
    assert_eq!(code(&run(&args)), 0);
    assert_eq!(covered, fs::read_to_string(&svg2).unwrap());

    let o = run(&["report", p(&out)]);
    assert_eq!(code(&o), 0);
    let table = String::from_utf8_lossy(&o.stdout);
    assert_eq!(table.lines().count(), 3);
    assert!(table.contains("| 6997 | true | 699.7 | 550.3 |"), "{table}");
}

#[test]
fn simulate_timing_flag_adds_timing() {
    let tmp = TempDir::new().unwrap();
    let (a, _) = emit(tmp.path());
    let out = tmp.path().join("timed");
    let o = run(&["simulate", "--scenario", p(&a), "--out-dir", p(&out), "--timing"]);
    assert_eq!(code(&o), 0);
    let metrics = read_json(&out.join("metrics.json"));
    assert_schema("metrics", &metrics);
    assert!(metrics["timing"]["mean_plan_ms"].is_number());
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let qp = csv.lines().nth(1).unwrap().split(',').nth(8).unwrap().to_string();
    assert!(qp.parse::<f64>().is_ok(), "{qp}");
}

fn head_on(target_start: [f64; 2]) -> Value {
    json!({
        "ego": {"id": "ego", "start_ne": [0, 0], "heading_deg": 0, "speed_mps": 10},
        "goal_ne": [7000, 0],
        "targets": [{"id": "T", "start_ne": target_start, "heading_deg": 180, "speed_mps": 10}],
        "horizon_s": 120
    })
}

#[test]
fn overlapping_start_is_invalid_scenario() {
    let tmp = TempDir::new().unwrap();
    let scn = write_json(tmp.path(), "clash.json", &head_on([300.0, 0.0]));
    let out = tmp.path().join("out");
    let o = run(&["simulate", "--scenario", p(&scn), "--out-dir", p(&out)]);
    assert_eq!(code(&o), 1);
    let err = stderr(&o);
    assert!(err.contains("scenario invalid") && err.contains("already in conflict"), "{err}");
    assert!(!out.join("metrics.json").exists());
}

#[test]
fn unavoidable_contact_exits_4_with_outputs() {
    let tmp = TempDir::new().unwrap();
    let scn = write_json(tmp.path(), "late.json", &head_on([600.0, 0.0]));
    let out = tmp.path().join("out");
    let o = run(&["simulate", "--scenario", p(&scn), "--out-dir", p(&out)]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    let metrics = read_json(&out.join("metrics.json"));
    assert_schema("metrics", &metrics);
    assert_eq!(metrics["collision_free"], json!(false));
    assert!(metrics["min_separation_m"].as_f64().unwrap() < 500.0);
}

#[test]
fn schema_errors_name_the_field() {
    let tmp = TempDir::new().unwrap();
    let mut bad = head_on([5000.0, 0.0]);
    bad["targets"][0]["speed_mps"] = json!("fast");
    let scn = write_json(tmp.path(), "bad.json", &bad);
    let o = run(&["simulate", "--scenario", p(&scn), "--out-dir", p(&tmp.path().join("o"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("targets[0].speed_mps"), "{}", stderr(&o));

    let mut unknown = head_on([5000.0, 0.0]);
    unknown["risk"] = json!({"tcpa": 5});
    let scn = write_json(tmp.path(), "unknown.json", &unknown);
    let o = run(&["simulate", "--scenario", p(&scn), "--out-dir", p(&tmp.path().join("o"))]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("risk"), "{}", stderr(&o));
}

#[test]
fn plot_rejects_empty_and_malformed_logs() {
    let tmp = TempDir::new().unwrap();
    let svg = tmp.path().join("x.svg");
    let empty = tmp.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    assert_eq!(code(&run(&["plot", "--log", p(&empty), "--out", p(&svg)])), 1);
    let header_only = tmp.path().join("header.csv");
    fs::write(&header_only, "t,ego_n,ego_e,ego_vn,ego_ve,feasible,qp_ms,tags\n").unwrap();
    assert_eq!(code(&run(&["plot", "--log", p(&header_only), "--out", p(&svg)])), 1);
    let garbage = tmp.path().join("garbage.csv");
    fs::write(&garbage, "t,ego_n,ego_e,ego_vn,ego_ve,feasible,qp_ms,tags\n0,x,0,0,0,1,,\n").unwrap();
    assert_eq!(code(&run(&["plot", "--log", p(&garbage), "--out", p(&svg)])), 1);
    assert!(!svg.exists());
}

#[test]
fn flags_fall_back_to_environment() {
    let tmp = TempDir::new().unwrap();
    let scn = write_json(tmp.path(), "open.json", &json!({
        "ego": {"id": "ego", "start_ne": [0, 0], "heading_deg": 0, "speed_mps": 10},
        "goal_ne": [1000, 0]
    }));
    let env_dir = tmp.path().join("from_env");
    let flag_dir = tmp.path().join("from_flag");
    let o = seaplan()
        .arg("simulate")
        .env("SEAPLAN_SCENARIO", &scn)
        .env("SEAPLAN_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(env_dir.join("metrics.json").exists());
    let o = seaplan()
        .args(["simulate", "--out-dir", p(&flag_dir)])
        .env("SEAPLAN_SCENARIO", &scn)
        .env("SEAPLAN_OUT_DIR", env_dir.join("unused"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(flag_dir.join("metrics.json").exists());
    assert!(!env_dir.join("unused").exists());
    let m = read_json(&flag_dir.join("metrics.json"));
    assert_eq!(m["min_separation_m"], Value::Null);
    assert!((m["path_length_m"].as_f64().unwrap() - 900.0).abs() <= 1.0, "{m}");
}

#[test]
fn simulate_with_cover_file() {
    let tmp = TempDir::new().unwrap();
    let region = write_json(tmp.path(), "disc.json", &disc_polygon((3000.0, -600.0), 290.0, 96));
    let cover = tmp.path().join("cover.json");
    assert_eq!(code(&run(&["convexify", "--region", p(&region), "--out", p(&cover)])), 0);
    let scn = write_json(tmp.path(), "scn.json", &json!({
        "ego": {"id": "ego", "start_ne": [0, 0], "heading_deg": 0, "speed_mps": 10},
        "goal_ne": [6000, 0],
        "cover_file": "cover.json"
    }));
    let out = tmp.path().join("out");
    let o = run(&["simulate", "--scenario", p(&scn), "--out-dir", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = read_json(&out.join("metrics.json"));
    assert_eq!(m["goal_reached"], json!(true));
    assert_eq!(m["grounding_violations"], json!(0));
}
