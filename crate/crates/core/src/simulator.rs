//! Fixed-step kinematic simulation of a planner-driven ego among
//! constant-velocity targets.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colregs::{classify, EncounterKind, Side};
use crate::geometry::{point_segment_distance, segments_intersect, Polygon, Vec2};
use crate::risk::{is_active_threat, RelativeKinematics};
use crate::safe_velocity::{plan_step, PlanRequest, TrackedTarget};
use crate::scenario::{Bathymetry, Scenario, ScenarioError};
use crate::vessel::VesselState;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("scenario invalid: {0}")]
    ScenarioInvalid(String),
}

/// State of the ego and all targets at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldState {
    pub t: f64,
    pub ego: VesselState,
    pub targets: Vec<VesselState>,
}

/// Advances every vessel by one Euler step; the ego first adopts `ego_velocity`.
pub fn step(state: &WorldState, ego_velocity: Vec2, dt: f64) -> WorldState {
    WorldState {
        t: state.t + dt,
        ego: state.ego.with_velocity(ego_velocity).advanced(dt),
        targets: state.targets.iter().map(|t| t.advanced(dt)).collect(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub ego_position: Vec2,
    pub ego_velocity: Vec2,
    pub target_positions: Vec<Vec2>,
    pub v_ref: Vec2,
    pub v_star: Vec2,
    pub v_next: Vec2,
    pub feasible: bool,
    pub tags: Vec<String>,
    pub qp_time_s: f64,
    pub plan_time_s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryLog {
    pub dt: f64,
    pub ego_radius: f64,
    pub target_ids: Vec<String>,
    pub target_radii: Vec<f64>,
    /// One record per planning step, holding the state before the step.
    pub records: Vec<StepRecord>,
    /// Positions after the last step.
    pub final_ego: Vec2,
    pub final_targets: Vec<Vec2>,
}

impl TrajectoryLog {
    /// Ego positions including the final one.
    pub fn ego_track(&self) -> Vec<Vec2> {
        let mut v: Vec<Vec2> = self.records.iter().map(|r| r.ego_position).collect();
        v.push(self.final_ego);
        v
    }

    pub fn target_track(&self, k: usize) -> Vec<Vec2> {
        let mut v: Vec<Vec2> = self.records.iter().map(|r| r.target_positions[k]).collect();
        v.push(self.final_targets[k]);
        v
    }

    /// Writes the log as CSV. `qp_ms` stays empty unless `timing` is set,
    /// so that repeated runs produce identical files.
    pub fn write_csv<W: Write>(&self, out: W, timing: bool) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "ego_n".into(), "ego_e".into(), "ego_vn".into(), "ego_ve".into()];
        for id in &self.target_ids {
            header.push(format!("{id}_n"));
            header.push(format!("{id}_e"));
        }
        header.extend(["feasible".to_string(), "qp_ms".into(), "tags".into()]);
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![
                fmt_num(r.t),
                fmt_num(r.ego_position.n),
                fmt_num(r.ego_position.e),
                fmt_num(r.ego_velocity.n),
                fmt_num(r.ego_velocity.e),
            ];
            for p in &r.target_positions {
                row.push(fmt_num(p.n));
                row.push(fmt_num(p.e));
            }
            row.push(if r.feasible { "1".into() } else { "0".into() });
            row.push(if timing { format!("{:.6}", r.qp_time_s * 1e3) } else { String::new() });
            row.push(r.tags.join(";"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn fmt_num(x: f64) -> String {
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColregsEvent {
    pub t_s: f64,
    pub target: String,
    pub kind: EncounterKind,
    pub side: Side,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub mean_qp_ms: f64,
    pub max_qp_ms: f64,
    pub mean_plan_ms: f64,
    pub max_plan_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub steps: usize,
    /// Smallest center distance to any target; `None` without targets.
    pub min_separation_m: Option<f64>,
    pub min_separation_target: Option<String>,
    pub path_length_m: f64,
    pub goal_reached: bool,
    pub goal_time_s: Option<f64>,
    pub grounding_violations: usize,
    pub infeasible_steps: usize,
    pub max_speed_mps: f64,
    pub collision_free: bool,
    pub colregs_events: Vec<ColregsEvent>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingStats>,
}

impl Metrics {
    pub fn without_timing(mut self) -> Self {
        self.timing = None;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub log: TrajectoryLog,
    pub metrics: Metrics,
    pub bathymetry: Bathymetry,
}

/// Convexifies the scenario's regions and runs it.
pub fn run(scn: &Scenario) -> Result<RunOutput, SimError> {
    scn.validate()?;
    let bathymetry = scn.bathymetry()?;
    run_with_bathymetry(scn, bathymetry)
}

pub fn run_with_bathymetry(scn: &Scenario, bathymetry: Bathymetry) -> Result<RunOutput, SimError> {
    scn.validate()?;
    let goal = scn.goal()?;
    let n_steps = scn.step_count()?;
    let params = scn.planner.params();
    let discs = bathymetry.discs();
    let dt = scn.dt_s;

    let mut world = WorldState {
        t: 0.0,
        ego: scn.ego.state(),
        targets: scn.targets.iter().map(|t| t.state()).collect(),
    };
    if let Some(p) = bathymetry.polygons.iter().position(|p| p.contains(world.ego.position)) {
        return Err(SimError::ScenarioInvalid(format!("ego starts inside shallow region {p}")));
    }
    let mut latched: Vec<Option<EncounterKind>> = vec![None; world.targets.len()];
    let mut last_decision: Vec<Option<(EncounterKind, Side)>> = vec![None; world.targets.len()];
    let mut records = Vec::with_capacity(n_steps);
    let mut events = Vec::new();
    let mut goal_time = None;

    for k in 0..n_steps {
        let t = k as f64 * dt;
        world.t = t;

        // Roles hold from activation until the target stops being a threat.
        for (i, target) in world.targets.iter().enumerate() {
            let rk = RelativeKinematics::new(world.ego.position, world.ego.velocity, target.position, target.velocity);
            if is_active_threat(&rk, &scn.risk) {
                if latched[i].is_none() {
                    latched[i] = Some(classify(&world.ego, target, &scn.colregs));
                }
            } else {
                latched[i] = None;
            }
        }
        let tracked: Vec<TrackedTarget> = world
            .targets
            .iter()
            .zip(&latched)
            .map(|(s, l)| TrackedTarget {
                state: s.clone(),
                uncertainty: scn.uncertainty,
                latched: *l,
            })
            .collect();
        let req = PlanRequest {
            ego: &world.ego,
            targets: &tracked,
            grounding: &discs,
            grounding_eps_p: scn.uncertainty.eps_p,
            goal,
            params: &params,
            thresholds: &scn.risk,
            colregs: &scn.colregs,
        };
        let started = Instant::now();
        let outcome = plan_step(&req);
        let plan_time = started.elapsed().as_secs_f64();

        if k == 0 {
            if let Some((tag, err)) = &outcome.conflict {
                return Err(SimError::ScenarioInvalid(format!("{tag} at t=0: {err}")));
            }
        }

        for (i, target) in world.targets.iter().enumerate() {
            let now = outcome
                .encounters
                .iter()
                .find(|d| d.target_id == target.id)
                .map(|d| (d.kind, d.side));
            if let Some((kind, side)) = now.filter(|_| now != last_decision[i]) {
                events.push(ColregsEvent {
                    t_s: round_time(t),
                    target: target.id.clone(),
                    kind,
                    side,
                });
            }
            last_decision[i] = now;
        }

        records.push(StepRecord {
            t: round_time(t),
            ego_position: world.ego.position,
            ego_velocity: world.ego.velocity,
            target_positions: world.targets.iter().map(|v| v.position).collect(),
            v_ref: outcome.v_ref,
            v_star: outcome.v_star,
            v_next: outcome.v_next,
            feasible: outcome.feasible,
            tags: outcome.active_constraints.iter().map(|t| t.to_string()).collect(),
            qp_time_s: outcome.solve_time,
            plan_time_s: plan_time,
        });

        world = step(&world, outcome.v_next, dt);
        if goal_time.is_none() && world.ego.position.distance(goal) <= params.goal_radius {
            goal_time = Some(round_time((k + 1) as f64 * dt));
            if scn.stop_at_goal {
                break;
            }
        }
    }

    let log = TrajectoryLog {
        dt,
        ego_radius: scn.ego.radius_m,
        target_ids: scn.targets.iter().map(|t| t.id.clone()).collect(),
        target_radii: scn.targets.iter().map(|t| t.radius_m).collect(),
        records,
        final_ego: world.ego.position,
        final_targets: world.targets.iter().map(|t| t.position).collect(),
    };
    let metrics = compute_metrics(&log, &bathymetry.polygons, goal_time, events, scn.seed);
    Ok(RunOutput {
        log,
        metrics,
        bathymetry,
    })
}

fn round_time(t: f64) -> f64 {
    (t * 1e9).round() / 1e9
}

fn compute_metrics(
    log: &TrajectoryLog,
    polygons: &[Polygon],
    goal_time: Option<f64>,
    colregs_events: Vec<ColregsEvent>,
    seed: u64,
) -> Metrics {
    let mut min_sep: Option<(f64, usize)> = None;
    let mut consider = |d: f64, k: usize| {
        if min_sep.is_none_or(|(m, _)| d < m) {
            min_sep = Some((d, k));
        }
    };
    for r in &log.records {
        for (k, p) in r.target_positions.iter().enumerate() {
            consider(r.ego_position.distance(*p), k);
        }
    }
    for (k, p) in log.final_targets.iter().enumerate() {
        consider(log.final_ego.distance(*p), k);
    }

    let track = log.ego_track();
    let path_length = track.windows(2).map(|w| w[0].distance(w[1])).sum();
    let grounding_violations = track
        .iter()
        .filter(|p| polygons.iter().any(|poly| poly.contains(**p)))
        .count();

    let n = log.records.len().max(1) as f64;
    let timing = (!log.records.is_empty()).then(|| TimingStats {
        mean_qp_ms: log.records.iter().map(|r| r.qp_time_s).sum::<f64>() / n * 1e3,
        max_qp_ms: log.records.iter().map(|r| r.qp_time_s).fold(0.0, f64::max) * 1e3,
        mean_plan_ms: log.records.iter().map(|r| r.plan_time_s).sum::<f64>() / n * 1e3,
        max_plan_ms: log.records.iter().map(|r| r.plan_time_s).fold(0.0, f64::max) * 1e3,
    });

    let radii = log.target_radii.clone();
    Metrics {
        steps: log.records.len(),
        min_separation_m: min_sep.map(|(d, _)| d),
        min_separation_target: min_sep.map(|(_, k)| log.target_ids[k].clone()),
        path_length_m: path_length,
        goal_reached: goal_time.is_some(),
        goal_time_s: goal_time,
        grounding_violations,
        infeasible_steps: log.records.iter().filter(|r| !r.feasible).count(),
        max_speed_mps: log.records.iter().map(|r| r.ego_velocity.norm()).fold(0.0, f64::max),
        collision_free: check_collision_free(log, polygons, |k| log.ego_radius + radii[k]),
        colregs_events,
        seed,
        timing,
    }
}

/// Audits a log: every target stays farther than `combined_radius(k)` from
/// the ego and the ego never touches a shallow polygon, including between
/// samples under linear interpolation.
pub fn check_collision_free(log: &TrajectoryLog, polygons: &[Polygon], combined_radius: impl Fn(usize) -> f64) -> bool {
    let ego = log.ego_track();
    for k in 0..log.target_ids.len() {
        let target = log.target_track(k);
        let limit = combined_radius(k);
        for i in 0..ego.len() {
            let rel0 = target[i] - ego[i];
            let d = if i + 1 < ego.len() {
                point_segment_distance(Vec2::ZERO, rel0, target[i + 1] - ego[i + 1])
            } else {
                rel0.norm()
            };
            if d <= limit {
                return false;
            }
        }
    }
    for poly in polygons {
        if ego.iter().any(|p| poly.contains(*p)) {
            return false;
        }
        for w in ego.windows(2) {
            if poly.edges().any(|(a, b)| segments_intersect(w[0], w[1], a, b)) {
                return false;
            }
        }
    }
    true
}
