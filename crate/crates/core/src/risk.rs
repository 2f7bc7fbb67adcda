//! Closest-point-of-approach risk screening.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

/// Relative speeds below this are treated as no relative motion.
pub const DEGENERATE_REL_SPEED: f64 = 1e-6;

/// Relative kinematics of a target with respect to the ego vessel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativeKinematics {
    /// Target position minus ego position (m).
    pub p_ab: Vec2,
    /// Ego velocity minus target velocity (m/s).
    pub v_ab: Vec2,
}

impl RelativeKinematics {
    pub fn new(p_a: Vec2, v_a: Vec2, p_b: Vec2, v_b: Vec2) -> Self {
        RelativeKinematics {
            p_ab: p_b - p_a,
            v_ab: v_a - v_b,
        }
    }

    /// Center distance after `t` seconds of constant relative motion.
    pub fn distance_at(&self, t: f64) -> f64 {
        (self.p_ab - self.v_ab * t).norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RiskThresholds {
    #[serde(rename = "tcpa_max_s")]
    pub tcpa_max: f64,
    #[serde(rename = "dcpa_max_m")]
    pub dcpa_max: f64,
}

impl Default for RiskThresholds {
    fn default() -> Self {
        RiskThresholds {
            tcpa_max: 600.0,
            dcpa_max: 1000.0,
        }
    }
}

impl RiskThresholds {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tcpa_max > 0.0 && self.tcpa_max.is_finite()) {
            return Err(format!("tcpa_max_s must be > 0, got {}", self.tcpa_max));
        }
        if !(self.dcpa_max > 0.0 && self.dcpa_max.is_finite()) {
            return Err(format!("dcpa_max_m must be > 0, got {}", self.dcpa_max));
        }
        Ok(())
    }
}

/// Time to closest point of approach. Zero when there is no relative
/// motion; negative when the vessels are already diverging.
pub fn tcpa(rk: &RelativeKinematics) -> f64 {
    let speed_sq = rk.v_ab.norm_sq();
    if speed_sq.sqrt() < DEGENERATE_REL_SPEED {
        return 0.0;
    }
    rk.p_ab.dot(rk.v_ab) / speed_sq
}

/// Distance at closest point of approach; the current distance when the
/// closest approach lies in the past or there is no relative motion.
pub fn dcpa(rk: &RelativeKinematics) -> f64 {
    rk.distance_at(tcpa(rk).max(0.0))
}

pub fn is_active_threat(rk: &RelativeKinematics, th: &RiskThresholds) -> bool {
    if rk.p_ab.norm() <= th.dcpa_max {
        return true;
    }
    let t = tcpa(rk);
    (0.0..=th.tcpa_max).contains(&t) && dcpa(rk) <= th.dcpa_max
}
