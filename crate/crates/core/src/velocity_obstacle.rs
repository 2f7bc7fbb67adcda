//! Collision cones and velocity obstacles robust to bounded position and
//! velocity uncertainty.
//!
//! A collision cone lives in relative-velocity space with its apex at the
//! origin. Translating it by the estimated target velocity gives the velocity
//! obstacle in the ego's absolute velocity space. Position uncertainty widens
//! the cone (the target disc is inflated by `eps_p`); velocity uncertainty
//! is a Minkowski sum with a disc of radius `eps_v`, which the linear
//! relaxation realises as an outward shift of each supporting half-plane.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Disc, HalfPlane, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UncertaintyBounds {
    /// Radius of the position-uncertainty disc (m).
    #[serde(rename = "eps_p_m")]
    pub eps_p: f64,
    /// Radius of the velocity-uncertainty disc (m/s).
    #[serde(rename = "eps_v_mps")]
    pub eps_v: f64,
}

impl Default for UncertaintyBounds {
    fn default() -> Self {
        UncertaintyBounds { eps_p: 50.0, eps_v: 0.5 }
    }
}

impl UncertaintyBounds {
    pub fn new(eps_p: f64, eps_v: f64) -> Self {
        UncertaintyBounds { eps_p, eps_v }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.eps_p >= 0.0 && self.eps_p.is_finite()) {
            return Err(format!("eps_p_m must be >= 0, got {}", self.eps_p));
        }
        if !(self.eps_v >= 0.0 && self.eps_v.is_finite()) {
            return Err(format!("eps_v_mps must be >= 0, got {}", self.eps_v));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Error, PartialEq)]
pub enum VoError {
    /// The ego already overlaps the inflated target; no velocity is safe.
    #[error("already in conflict: separation {separation:.3} m <= inflated radius {inflated_radius:.3} m")]
    AlreadyInConflict {
        separation: f64,
        inflated_radius: f64,
    },
}

/// Cone of relative velocities `v_a − v_b` that lead to contact. The apex is
/// always the origin of relative-velocity space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollisionCone {
    /// Unit vector from ego toward the (estimated) target position.
    pub axis: Vec2,
    /// Half opening angle in radians, strictly inside `(0, π/2)`.
    pub half_angle: f64,
}

impl CollisionCone {
    /// Whether the relative velocity `w` is inside the closed cone.
    pub fn contains(&self, w: Vec2) -> bool {
        self.distance(w) <= 0.0
    }

    /// Euclidean distance from `w` to the closed cone.
    pub fn distance(&self, w: Vec2) -> f64 {
        let len = w.norm();
        if len == 0.0 {
            return 0.0;
        }
        let angle = self.axis.angle_to(w);
        if angle <= self.half_angle {
            0.0
        } else if angle >= self.half_angle + FRAC_PI_2 {
            len
        } else {
            len * (angle - self.half_angle).sin()
        }
    }
}

pub fn build_collision_cone(
    p_a: Vec2,
    p_b_hat: Vec2,
    r_a: f64,
    r_b: f64,
    eps_p: f64,
) -> Result<CollisionCone, VoError> {
    let p_ab = p_b_hat - p_a;
    let separation = p_ab.norm();
    let inflated_radius = r_a + r_b + eps_p;
    if separation <= inflated_radius {
        return Err(VoError::AlreadyInConflict {
            separation,
            inflated_radius,
        });
    }
    Ok(CollisionCone {
        axis: p_ab / separation,
        half_angle: (inflated_radius / separation).asin(),
    })
}

/// Velocity obstacle in the ego's absolute velocity space together with its
/// two supporting half-planes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityObstacleRegion {
    /// Estimated target velocity; the translated cone apex.
    pub apex: Vec2,
    pub cone: CollisionCone,
    pub eps_v: f64,
    /// Feasible side admits velocities turning the relative motion to port.
    pub left: HalfPlane,
    /// Feasible side admits velocities turning the relative motion to starboard.
    pub right: HalfPlane,
}

impl VelocityObstacleRegion {
    pub fn new(cone: CollisionCone, v_b_hat: Vec2, eps_v: f64) -> Self {
        let (left, right) = supporting_half_planes(&cone, v_b_hat, eps_v);
        VelocityObstacleRegion {
            apex: v_b_hat,
            cone,
            eps_v,
            left,
            right,
        }
    }

    pub fn contains(&self, v_a: Vec2) -> bool {
        vo_contains(self, v_a)
    }
}

/// Exact membership in the cone translated to `apex` and grown by `eps_v`.
pub fn vo_contains(vo: &VelocityObstacleRegion, v_a: Vec2) -> bool {
    vo.cone.distance(v_a - vo.apex) <= vo.eps_v
}

/// Left and right supporting half-planes of the velocity obstacle, each shifted
/// outward by `eps_v` along its normal.
pub fn supporting_half_planes(
    cone: &CollisionCone,
    v_b_hat: Vec2,
    eps_v: f64,
) -> (HalfPlane, HalfPlane) {
    let turn = cone.half_angle + FRAC_PI_2;
    let left_n = cone.axis.rotate(-turn);
    let right_n = cone.axis.rotate(turn);
    let left = HalfPlane {
        normal: left_n,
        anchor: v_b_hat + left_n * eps_v,
    };
    let right = HalfPlane {
        normal: right_n,
        anchor: v_b_hat + right_n * eps_v,
    };
    (left, right)
}

/// A stationary obstacle expressed in the same terms as a tracked vessel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StaticObstacle {
    pub position: Vec2,
    pub radius: f64,
    pub velocity: Vec2,
}

impl StaticObstacle {
    pub fn collision_cone(
        &self,
        ego_position: Vec2,
        ego_radius: f64,
        eps_p: f64,
    ) -> Result<CollisionCone, VoError> {
        build_collision_cone(ego_position, self.position, ego_radius, self.radius, eps_p)
    }

    /// Velocity obstacle of the obstacle; velocity uncertainty does not apply.
    pub fn velocity_obstacle(
        &self,
        ego_position: Vec2,
        ego_radius: f64,
        eps_p: f64,
    ) -> Result<VelocityObstacleRegion, VoError> {
        let cone = self.collision_cone(ego_position, ego_radius, eps_p)?;
        Ok(VelocityObstacleRegion::new(cone, self.velocity, 0.0))
    }
}

/// Turns a shallow-water circle into a zero-velocity obstacle, rejecting
/// configurations where the ego already overlaps it.
pub fn grounding_obstacle(
    circle: &Disc,
    ego_position: Vec2,
    ego_radius: f64,
    eps_p: f64,
) -> Result<StaticObstacle, VoError> {
    let separation = ego_position.distance(circle.center);
    let inflated_radius = circle.radius + ego_radius + eps_p;
    if separation <= inflated_radius {
        return Err(VoError::AlreadyInConflict {
            separation,
            inflated_radius,
        });
    }
    Ok(StaticObstacle {
        position: circle.center,
        radius: circle.radius,
        velocity: Vec2::ZERO,
    })
}
