//! Encounter classification and the choice of which velocity-obstacle
//! tangent a constraint follows.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{wrap_deg, HalfPlane, Vec2};
use crate::velocity_obstacle::VelocityObstacleRegion;
use crate::vessel::VesselState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncounterKind {
    HeadOn,
    CrossingGiveWay,
    CrossingStandOn,
    Overtaking,
    Overtaken,
    NoRule,
}

impl EncounterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EncounterKind::HeadOn => "HeadOn",
            EncounterKind::CrossingGiveWay => "CrossingGiveWay",
            EncounterKind::CrossingStandOn => "CrossingStandOn",
            EncounterKind::Overtaking => "Overtaking",
            EncounterKind::Overtaken => "Overtaken",
            EncounterKind::NoRule => "NoRule",
        }
    }

    /// Maneuver the ego owes under this encounter.
    pub fn requirement(self) -> Maneuver {
        match self {
            EncounterKind::HeadOn | EncounterKind::CrossingGiveWay | EncounterKind::Overtaking => {
                Maneuver::Starboard
            }
            EncounterKind::CrossingStandOn | EncounterKind::Overtaken | EncounterKind::NoRule => {
                Maneuver::Free
            }
        }
    }
}

impl fmt::Display for EncounterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Maneuver {
    Starboard,
    Port,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    L,
    R,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::L => "L",
            Side::R => "R",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SideSelection {
    pub side: Side,
    pub reason: EncounterKind,
}

/// Angular thresholds of the decision table, all in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColregsConfig {
    /// Allowed deviation of the heading difference from reciprocal courses.
    pub headon_band_deg: f64,
    /// Maximum |relative bearing| of a head-on target.
    pub headon_bearing_deg: f64,
    /// Bearings within this of dead ahead are not crossing situations.
    pub crossing_min_bearing_deg: f64,
    /// Abaft-the-beam limit (22.5° abaft the beam).
    pub beam_limit_deg: f64,
    pub overtaking_bearing_deg: f64,
    pub overtaking_heading_deg: f64,
}

impl Default for ColregsConfig {
    fn default() -> Self {
        ColregsConfig {
            headon_band_deg: 5.0,
            headon_bearing_deg: 22.5,
            crossing_min_bearing_deg: 5.0,
            beam_limit_deg: 112.5,
            overtaking_bearing_deg: 67.5,
            overtaking_heading_deg: 22.5,
        }
    }
}

/// Bearing of `target` relative to the ego heading, clockwise positive, in
/// `(-180, 180]` degrees.
pub fn relative_bearing_deg(ego: &VesselState, target: &VesselState) -> f64 {
    let los = target.position - ego.position;
    wrap_deg(los.heading_deg() - ego.heading_deg)
}

pub fn classify(ego: &VesselState, target: &VesselState, cfg: &ColregsConfig) -> EncounterKind {
    let beta = relative_bearing_deg(ego, target);
    let dh = wrap_deg(target.heading_deg - ego.heading_deg);

    if beta.abs() <= cfg.headon_bearing_deg && wrap_deg(dh - 180.0).abs() <= cfg.headon_band_deg {
        return EncounterKind::HeadOn;
    }
    if beta.abs() <= cfg.overtaking_bearing_deg
        && dh.abs() <= cfg.overtaking_heading_deg
        && ego.speed > target.speed
    {
        return EncounterKind::Overtaking;
    }
    if beta > cfg.crossing_min_bearing_deg && beta <= cfg.beam_limit_deg {
        return EncounterKind::CrossingGiveWay;
    }
    if beta < -cfg.crossing_min_bearing_deg && beta >= -cfg.beam_limit_deg {
        return EncounterKind::CrossingStandOn;
    }
    if beta.abs() > cfg.beam_limit_deg && target.speed > ego.speed {
        return EncounterKind::Overtaken;
    }
    EncounterKind::NoRule
}

fn slack(h: &HalfPlane, v: Vec2) -> f64 {
    h.margin(v)
}

pub fn select_side(kind: EncounterKind, vo: &VelocityObstacleRegion, v_curr: Vec2) -> SideSelection {
    let side = match kind.requirement() {
        Maneuver::Starboard => Side::R,
        Maneuver::Port => Side::L,
        Maneuver::Free => argmax_side(vo, v_curr),
    };
    SideSelection { side, reason: kind }
}

/// Side whose half-plane the current velocity violates least; ties go to R.
pub fn argmax_side(vo: &VelocityObstacleRegion, v_curr: Vec2) -> Side {
    if slack(&vo.left, v_curr) > slack(&vo.right, v_curr) {
        Side::L
    } else {
        Side::R
    }
}

impl VelocityObstacleRegion {
    pub fn half_plane(&self, side: Side) -> HalfPlane {
        match side {
            Side::L => self.left,
            Side::R => self.right,
        }
    }
}
