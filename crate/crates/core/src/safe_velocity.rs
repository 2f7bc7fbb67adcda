//! Safe-velocity selection.
//!
//! Every constraint is a closed half-plane in velocity space. The planner
//! stacks the inscribed speed polygon, one side-selected velocity-obstacle
//! tangent per active vessel and one per threatening shallow-water circle,
//! then projects the reference velocity onto their intersection. Infeasible
//! or conflicting situations command a stop, and the applied velocity moves
//! toward the optimum by at most `d_max` per step.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colregs::{argmax_side, classify, select_side, ColregsConfig, EncounterKind, Side};
use crate::geometry::{Disc, HalfPlane, Vec2};
use crate::risk::{is_active_threat, RelativeKinematics, RiskThresholds};
use crate::velocity_obstacle::{
    build_collision_cone, grounding_obstacle, UncertaintyBounds, VelocityObstacleRegion, VoError,
};
use crate::vessel::VesselState;

/// Feasibility tolerance applied to projection candidates.
pub const FEASIBILITY_TOL: f64 = 1e-7;

/// Where a constraint came from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ConstraintTag {
    Target(String),
    Grounding(usize),
    Speed(usize),
    Other(usize),
}

impl fmt::Display for ConstraintTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintTag::Target(id) => write!(f, "target:{id}"),
            ConstraintTag::Grounding(i) => write!(f, "ground:{i}"),
            ConstraintTag::Speed(k) => write!(f, "speed:{k}"),
            ConstraintTag::Other(k) => write!(f, "other:{k}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub plane: HalfPlane,
    pub tag: ConstraintTag,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintSet {
    pub constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, plane: HalfPlane, tag: ConstraintTag) {
        self.constraints.push(Constraint { plane, tag });
    }

    pub fn planes(&self) -> Vec<HalfPlane> {
        self.constraints.iter().map(|c| c.plane).collect()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn is_feasible(&self, v: Vec2, tol: f64) -> bool {
        self.constraints.iter().all(|c| c.plane.margin(v) >= -tol)
    }
}

impl FromIterator<HalfPlane> for ConstraintSet {
    fn from_iter<I: IntoIterator<Item = HalfPlane>>(iter: I) -> Self {
        ConstraintSet {
            constraints: iter
                .into_iter()
                .enumerate()
                .map(|(k, plane)| Constraint {
                    plane,
                    tag: ConstraintTag::Other(k),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("constraint set is empty (no feasible velocity)")]
pub struct Infeasible;

/// Half-planes whose intersection is the regular `n_poly`-gon inscribed in
/// the circle of radius `v_max`. Edge `k` has outward direction at angle
/// `2πk/n_poly` and apothem `v_max·cos(π/n_poly)`.
pub fn speed_polygon(v_max: f64, n_poly: usize) -> Vec<HalfPlane> {
    assert!(n_poly >= 3, "speed polygon needs at least 3 sides");
    let apothem = v_max * (PI / n_poly as f64).cos();
    (0..n_poly)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n_poly as f64;
            let outward = Vec2::new(theta.cos(), theta.sin());
            // outward·v ≤ apothem  ⇔  (−outward)·(v − apothem·outward) ≥ 0
            HalfPlane {
                normal: -outward,
                anchor: outward * apothem,
            }
        })
        .collect()
}

/// Euclidean projection of `v_ref` onto the intersection of `planes`.
///
/// Exact in 2D: the optimum is `v_ref` itself, the projection onto one
/// boundary line, or the intersection of two boundary lines. All such
/// candidates are enumerated and the nearest feasible one returned.
pub fn project(planes: &[HalfPlane], v_ref: Vec2) -> Result<Vec2, Infeasible> {
    let feasible = |v: Vec2| planes.iter().all(|h| h.margin(v) >= -FEASIBILITY_TOL);
    if feasible(v_ref) {
        return Ok(v_ref);
    }
    let mut best: Option<(f64, Vec2)> = None;
    let mut consider = |v: Vec2| {
        if !v.is_finite() {
            return;
        }
        let d = (v - v_ref).norm_sq();
        if best.is_none_or(|(bd, _)| d < bd) && feasible(v) {
            best = Some((d, v));
        }
    };
    for h in planes {
        consider(h.project_onto_boundary(v_ref));
    }
    for (i, a) in planes.iter().enumerate() {
        for b in &planes[i + 1..] {
            if let Some(p) = a.boundary_intersection(b) {
                consider(p);
            }
        }
    }
    best.map(|(_, v)| v).ok_or(Infeasible)
}

pub fn solve_projection(constraints: &ConstraintSet, v_ref: Vec2) -> Result<Vec2, Infeasible> {
    project(&constraints.planes(), v_ref)
}

/// Moves from `v_curr` toward `v_star` by at most `d_max`.
pub fn limit_acceleration(v_curr: Vec2, v_star: Vec2, d_max: f64) -> Vec2 {
    let delta = v_star - v_curr;
    let dist = delta.norm();
    if dist <= d_max {
        v_star
    } else {
        v_curr + delta * (d_max / dist)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefPolicy {
    /// Head for the goal at cruise speed.
    TowardGoalAtCruise,
    /// Hold a fixed velocity vector.
    FixedProfile(Vec2),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlannerParams {
    pub v_max: f64,
    pub n_poly: usize,
    /// Maximum velocity change per planning step (m/s).
    pub d_max: f64,
    pub cruise_speed: f64,
    pub v_ref_policy: RefPolicy,
    /// Distance at which the goal counts as reached (m).
    pub goal_radius: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            v_max: 12.0,
            n_poly: 16,
            d_max: 0.05,
            cruise_speed: 10.0,
            v_ref_policy: RefPolicy::TowardGoalAtCruise,
            goal_radius: 100.0,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return Err(format!("v_max_mps must be > 0, got {}", self.v_max));
        }
        if self.n_poly < 8 {
            return Err(format!("n_poly must be >= 8, got {}", self.n_poly));
        }
        if !(self.d_max > 0.0 && self.d_max <= self.v_max) {
            return Err(format!(
                "d_max_mps must satisfy 0 < d_max <= v_max, got {}",
                self.d_max
            ));
        }
        if !(self.cruise_speed >= 0.0 && self.cruise_speed <= self.v_max) {
            return Err(format!(
                "cruise_mps must be within [0, v_max], got {}",
                self.cruise_speed
            ));
        }
        if !(self.goal_radius >= 0.0 && self.goal_radius.is_finite()) {
            return Err(format!("goal_radius_m must be >= 0, got {}", self.goal_radius));
        }
        Ok(())
    }

    pub fn reference_velocity(&self, position: Vec2, goal: Vec2) -> Vec2 {
        match self.v_ref_policy {
            RefPolicy::FixedProfile(v) => v,
            RefPolicy::TowardGoalAtCruise => match (goal - position).normalized() {
                Some(dir) => dir * self.cruise_speed,
                None => Vec2::ZERO,
            },
        }
    }
}

/// A tracked target: its estimated state, the uncertainty of that estimate
/// and, optionally, an encounter classification held over from earlier steps.
#[derive(Clone, Debug, PartialEq)]
pub struct TrackedTarget {
    pub state: VesselState,
    pub uncertainty: UncertaintyBounds,
    pub latched: Option<EncounterKind>,
}

impl TrackedTarget {
    pub fn new(state: VesselState, uncertainty: UncertaintyBounds) -> Self {
        TrackedTarget {
            state,
            uncertainty,
            latched: None,
        }
    }
}

/// Everything a single planning step depends on.
#[derive(Clone, Copy, Debug)]
pub struct PlanRequest<'a> {
    pub ego: &'a VesselState,
    pub targets: &'a [TrackedTarget],
    pub grounding: &'a [Disc],
    /// Position uncertainty applied to shallow-water circles (m).
    pub grounding_eps_p: f64,
    pub goal: Vec2,
    pub params: &'a PlannerParams,
    pub thresholds: &'a RiskThresholds,
    pub colregs: &'a ColregsConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncounterDecision {
    pub target_id: String,
    pub kind: EncounterKind,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanOutcome {
    pub v_ref: Vec2,
    pub v_star: Vec2,
    pub v_next: Vec2,
    pub feasible: bool,
    /// Tags of the collision and grounding constraints in force this step.
    pub active_constraints: Vec<ConstraintTag>,
    pub encounters: Vec<EncounterDecision>,
    /// Set when a cone could not be built because the ego already overlaps
    /// an inflated obstacle.
    pub conflict: Option<(ConstraintTag, VoError)>,
    /// Wall time of the projection solve (s).
    pub solve_time: f64,
}

impl PlanOutcome {
    /// Equality ignoring the measured solve time.
    pub fn same_decision(&self, other: &PlanOutcome) -> bool {
        PlanOutcome {
            solve_time: 0.0,
            ..self.clone()
        } == PlanOutcome {
            solve_time: 0.0,
            ..other.clone()
        }
    }
}

/// Assembles the constraint set for one step. Returns the tag and error of
/// the first obstacle that is already in conflict.
pub fn build_constraints(
    req: &PlanRequest<'_>,
) -> Result<(ConstraintSet, Vec<EncounterDecision>), (ConstraintTag, VoError)> {
    let ego = req.ego;
    let mut set = ConstraintSet::new();
    for (k, plane) in speed_polygon(req.params.v_max, req.params.n_poly)
        .into_iter()
        .enumerate()
    {
        set.push(plane, ConstraintTag::Speed(k));
    }

    let mut encounters = Vec::new();
    for target in req.targets {
        let t = &target.state;
        let rk = RelativeKinematics::new(ego.position, ego.velocity, t.position, t.velocity);
        if !is_active_threat(&rk, req.thresholds) {
            continue;
        }
        let tag = ConstraintTag::Target(t.id.clone());
        let cone = build_collision_cone(
            ego.position,
            t.position,
            ego.radius,
            t.radius,
            target.uncertainty.eps_p,
        )
        .map_err(|e| (tag.clone(), e))?;
        let vo = VelocityObstacleRegion::new(cone, t.velocity, target.uncertainty.eps_v);
        let kind = target
            .latched
            .unwrap_or_else(|| classify(ego, t, req.colregs));
        let side = select_side(kind, &vo, ego.velocity).side;
        set.push(vo.half_plane(side), tag);
        encounters.push(EncounterDecision {
            target_id: t.id.clone(),
            kind,
            side,
        });
    }

    for (i, disc) in req.grounding.iter().enumerate() {
        let rk = RelativeKinematics::new(ego.position, ego.velocity, disc.center, Vec2::ZERO);
        // The distance gate is measured from the circle's edge.
        let th = RiskThresholds {
            tcpa_max: req.thresholds.tcpa_max,
            dcpa_max: req.thresholds.dcpa_max + disc.radius,
        };
        if !is_active_threat(&rk, &th) {
            continue;
        }
        let tag = ConstraintTag::Grounding(i);
        let vo = grounding_obstacle(disc, ego.position, ego.radius, req.grounding_eps_p)
            .and_then(|obs| obs.velocity_obstacle(ego.position, ego.radius, req.grounding_eps_p))
            .map_err(|e| (tag.clone(), e))?;
        set.push(vo.half_plane(argmax_side(&vo, ego.velocity)), tag);
    }
    Ok((set, encounters))
}

/// Result of projecting onto a constraint set and applying the rate limit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocitySelection {
    pub v_star: Vec2,
    pub v_next: Vec2,
    pub feasible: bool,
    pub solve_time: f64,
}

/// Projects `v_ref` onto `set`; an empty set commands a stop. The applied
/// velocity moves from `v_curr` toward the result by at most `d_max`.
pub fn select_velocity(set: &ConstraintSet, v_ref: Vec2, v_curr: Vec2, d_max: f64) -> VelocitySelection {
    let started = Instant::now();
    let solved = solve_projection(set, v_ref);
    let solve_time = started.elapsed().as_secs_f64();
    let (v_star, feasible) = match solved {
        Ok(v) => (v, true),
        Err(Infeasible) => (Vec2::ZERO, false),
    };
    VelocitySelection {
        v_star,
        v_next: limit_acceleration(v_curr, v_star, d_max),
        feasible,
        solve_time,
    }
}

pub fn plan_step(req: &PlanRequest<'_>) -> PlanOutcome {
    let ego = req.ego;
    let v_ref = req.params.reference_velocity(ego.position, req.goal);

    let (set, encounters) = match build_constraints(req) {
        Ok(built) => built,
        Err((tag, err)) => {
            return PlanOutcome {
                v_ref,
                v_star: Vec2::ZERO,
                v_next: limit_acceleration(ego.velocity, Vec2::ZERO, req.params.d_max),
                feasible: false,
                active_constraints: vec![tag.clone()],
                encounters: Vec::new(),
                conflict: Some((tag, err)),
                solve_time: 0.0,
            }
        }
    };
    let active_constraints = set
        .constraints
        .iter()
        .filter(|c| !matches!(c.tag, ConstraintTag::Speed(_)))
        .map(|c| c.tag.clone())
        .collect();

    let sel = select_velocity(&set, v_ref, ego.velocity, req.params.d_max);
    PlanOutcome {
        v_ref,
        v_star: sel.v_star,
        v_next: sel.v_next,
        feasible: sel.feasible,
        active_constraints,
        encounters,
        conflict: None,
        solve_time: sel.solve_time,
    }
}
