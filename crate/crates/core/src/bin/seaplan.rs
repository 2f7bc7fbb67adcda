use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use seaplan::circle_cover::{convexify, CircleCover, CircleCoverError, CoverConfig};
use seaplan::geometry::{Polygon, Vec2};
use seaplan::plot::{read_tracks, render_svg};
use seaplan::scenario::{case_a, case_b, parse_json, read_json, CoverFile, RegionSpec, Scenario, ScenarioError};
use seaplan::simulator::{run, Metrics, SimError};

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_UNCOVERABLE: u8 = 2;
const EXIT_TIME_LIMIT: u8 = 3;
const EXIT_UNSAFE: u8 = 4;

/// Velocity planning for surface vessels among traffic and shallow water.
#[derive(Parser)]
#[command(name = "seaplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cover a shallow-water polygon with a minimum-cost set of circles.
    Convexify(ConvexifyArgs),
    /// Run a scenario and write trajectory.csv, metrics.json and covers.json.
    Simulate(SimulateArgs),
    /// Render a trajectory log (and optionally covers) as SVG.
    Plot(PlotArgs),
    /// Write the bundled scenarios.
    Scenarios(ScenariosArgs),
    /// Tabulate metrics.json files from one or more run directories.
    Report(ReportArgs),
}

#[derive(Args)]
struct ConvexifyArgs {
    /// Region file: a polygon `[[n, e], ...]`, `{"polygon": ...}` or `{"generated": {...}}`.
    #[arg(long, env = "SEAPLAN_REGION")]
    region: PathBuf,
    /// Cover configuration; defaults apply when omitted.
    #[arg(long, env = "SEAPLAN_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "SEAPLAN_OUT")]
    out: PathBuf,
    /// Solver time limit in seconds.
    #[arg(long, env = "SEAPLAN_TIME_LIMIT", default_value_t = 60.0)]
    time_limit: f64,
    /// Keep the solve time in the output file.
    #[arg(long, env = "SEAPLAN_TIMING")]
    timing: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, env = "SEAPLAN_SCENARIO")]
    scenario: PathBuf,
    #[arg(long, env = "SEAPLAN_OUT_DIR")]
    out_dir: PathBuf,
    /// Record wall-clock solve times in the outputs.
    #[arg(long, env = "SEAPLAN_TIMING")]
    timing: bool,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long, env = "SEAPLAN_LOG")]
    log: PathBuf,
    /// Cover file written by `convexify` or `simulate`.
    #[arg(long, env = "SEAPLAN_COVER")]
    cover: Option<PathBuf>,
    #[arg(long, env = "SEAPLAN_OUT")]
    out: PathBuf,
    /// Goal position as `N,E`; the last ego position is marked otherwise.
    #[arg(long, env = "SEAPLAN_GOAL", value_parser = parse_point)]
    goal: Option<Vec2>,
}

#[derive(Args)]
struct ScenariosArgs {
    #[arg(long, env = "SEAPLAN_EMIT")]
    emit: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Run directories containing metrics.json.
    #[arg(required = true)]
    runs: Vec<PathBuf>,
    /// Write the table here instead of stdout.
    #[arg(long, env = "SEAPLAN_OUT")]
    out: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<Vec2, String> {
    let (n, e) = s.split_once(',').ok_or("expected N,E")?;
    let n: f64 = n.trim().parse().map_err(|e| format!("{e}"))?;
    let e: f64 = e.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(Vec2::new(n, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Convexify(a) => cmd_convexify(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Scenarios(a) => cmd_scenarios(a),
        Command::Report(a) => cmd_report(a),
    };
    ExitCode::from(code)
}

fn fail(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    EXIT_INPUT
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    text.push('\n');
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn read_region(path: &Path) -> Result<Polygon, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if text.trim_start().starts_with('[') {
        parse_json::<Polygon>(&text)
    } else {
        parse_json::<RegionSpec>(&text)?
            .polygon()
            .map_err(|e| ScenarioError::Invalid(e.to_string()))
    }
}

fn cmd_convexify(a: ConvexifyArgs) -> u8 {
    let poly = match read_region(&a.region) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let cfg = match &a.config {
        Some(p) => match read_json::<CoverConfig>(p) {
            Ok(c) => c,
            Err(e) => return fail(e),
        },
        None => CoverConfig::default(),
    };
    if let Err(e) = cfg.validate() {
        return fail(e);
    }
    if !(a.time_limit >= 0.0 && a.time_limit.is_finite()) {
        return fail("--time-limit must be >= 0");
    }
    let (cover, code) = match convexify(&poly, &cfg, Duration::from_secs_f64(a.time_limit)) {
        Ok(c) => (c, EXIT_OK),
        Err(CircleCoverError::TimeLimit(c)) => (*c, EXIT_TIME_LIMIT),
        Err(e @ (CircleCoverError::UncoverableRegion { .. } | CircleCoverError::DegeneratePolygon)) => {
            eprintln!("error: {e}");
            return EXIT_UNCOVERABLE;
        }
        Err(e) => return fail(e),
    };
    println!(
        "circles {} cost {:.3} spill_ratio {:.4} time {:.3}s proven_optimal {}{}",
        cover.circles.len(),
        cover.solver.total_cost,
        cover.spill_ratio,
        cover.solver.solve_time_s.unwrap_or(0.0),
        cover.solver.proven_optimal,
        if code == EXIT_TIME_LIMIT { " (time limit)" } else { "" }
    );
    let cover = if a.timing { cover } else { cover.without_timing() };
    if let Err(e) = write_json(&a.out, &cover) {
        return fail(e);
    }
    code
}

fn cmd_simulate(a: SimulateArgs) -> u8 {
    let scn = match Scenario::from_path(&a.scenario) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    let out = match run(&scn) {
        Ok(o) => o,
        Err(SimError::ScenarioInvalid(m)) => return fail(format!("scenario invalid: {m}")),
        Err(e) => return fail(e),
    };
    if let Err(e) = fs::create_dir_all(&a.out_dir) {
        return fail(format!("cannot create {}: {e}", a.out_dir.display()));
    }
    let csv_path = a.out_dir.join("trajectory.csv");
    let written = fs::File::create(&csv_path)
        .map_err(|e| e.to_string())
        .and_then(|f| out.log.write_csv(std::io::BufWriter::new(f), a.timing).map_err(|e| e.to_string()));
    if let Err(e) = written {
        return fail(format!("cannot write {}: {e}", csv_path.display()));
    }

    let m = &out.metrics;
    let timing = m.timing;
    let metrics = if a.timing { m.clone() } else { m.clone().without_timing() };
    if let Err(e) = write_json(&a.out_dir.join("metrics.json"), &metrics) {
        return fail(e);
    }
    let covers: Vec<CircleCover> = out
        .bathymetry
        .covers
        .iter()
        .map(|c| if a.timing { c.clone() } else { c.clone().without_timing() })
        .collect();
    if let Err(e) = write_json(&a.out_dir.join("covers.json"), &covers) {
        return fail(e);
    }

    println!(
        "steps {} goal_reached {} min_separation {} path_length {:.1} m grounding_violations {} collision_free {} mean_qp {:.4} ms max_qp {:.4} ms",
        m.steps,
        m.goal_reached,
        m.min_separation_m.map_or("none".to_string(), |d| format!("{d:.1} m")),
        m.path_length_m,
        m.grounding_violations,
        m.collision_free,
        timing.map_or(0.0, |t| t.mean_qp_ms),
        timing.map_or(0.0, |t| t.max_qp_ms),
    );
    if m.collision_free {
        EXIT_OK
    } else {
        EXIT_UNSAFE
    }
}

fn cmd_plot(a: PlotArgs) -> u8 {
    let tracks = match fs::File::open(&a.log) {
        Ok(f) => match read_tracks(f) {
            Ok(t) => t,
            Err(e) => return fail(format!("{}: {e}", a.log.display())),
        },
        Err(e) => return fail(format!("cannot read {}: {e}", a.log.display())),
    };
    let covers = match &a.cover {
        Some(p) => match read_json::<CoverFile>(p) {
            Ok(c) => c.into_vec(),
            Err(e) => return fail(e),
        },
        None => Vec::new(),
    };
    let svg = render_svg(&tracks, &covers, a.goal);
    if let Err(e) = fs::write(&a.out, svg) {
        return fail(format!("cannot write {}: {e}", a.out.display()));
    }
    EXIT_OK
}

fn cmd_scenarios(a: ScenariosArgs) -> u8 {
    if let Err(e) = fs::create_dir_all(&a.emit) {
        return fail(format!("cannot create {}: {e}", a.emit.display()));
    }
    for (name, scn) in [("case_a.json", case_a()), ("case_b.json", case_b())] {
        let path = a.emit.join(name);
        if let Err(e) = write_json(&path, &scn) {
            return fail(e);
        }
        println!("wrote {}", path.display());
    }
    EXIT_OK
}

fn cmd_report(a: ReportArgs) -> u8 {
    let mut table = String::from(
        "| run | steps | goal reached | goal time (s) | min separation (m) | path length (m) | grounding violations | infeasible steps | collision free | mean QP (ms) | max QP (ms) |\n\
         |---|---|---|---|---|---|---|---|---|---|---|\n",
    );
    for dir in &a.runs {
        let m: Metrics = match read_json(&dir.join("metrics.json")) {
            Ok(m) => m,
            Err(e) => return fail(e),
        };
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.1}"));
        table.push_str(&format!(
            "| {} | {} | {} | {} | {} | {:.1} | {} | {} | {} | {} | {} |\n",
            dir.display(),
            m.steps,
            m.goal_reached,
            opt(m.goal_time_s),
            opt(m.min_separation_m),
            m.path_length_m,
            m.grounding_violations,
            m.infeasible_steps,
            m.collision_free,
            m.timing.map_or("-".into(), |t| format!("{:.4}", t.mean_qp_ms)),
            m.timing.map_or("-".into(), |t| format!("{:.4}", t.max_qp_ms)),
        ));
    }
    match &a.out {
        Some(p) => {
            if let Err(e) = fs::write(p, &table) {
                return fail(format!("cannot write {}: {e}", p.display()));
            }
        }
        None => print!("{table}"),
    }
    EXIT_OK
}
