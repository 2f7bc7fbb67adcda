use crate::geometry::Vec2;

/// Kinematic state of one vessel.
#[derive(Clone, Debug, PartialEq)]
pub struct VesselState {
    pub id: String,
    pub position: Vec2,
    pub velocity: Vec2,
    /// Degrees clockwise from North, in `[0, 360)`.
    pub heading_deg: f64,
    pub speed: f64,
    pub radius: f64,
}

impl VesselState {
    pub fn from_heading(
        id: impl Into<String>,
        position: Vec2,
        heading_deg: f64,
        speed: f64,
        radius: f64,
    ) -> Self {
        let heading_deg = heading_deg.rem_euclid(360.0);
        VesselState {
            id: id.into(),
            position,
            velocity: Vec2::from_heading_deg(heading_deg) * speed,
            heading_deg,
            speed,
            radius,
        }
    }

    /// Re-derives heading and speed from `velocity`. A stopped vessel keeps
    /// its previous heading.
    pub fn with_velocity(&self, velocity: Vec2) -> Self {
        let speed = velocity.norm();
        let heading_deg = if speed > 1e-9 {
            velocity.heading_deg()
        } else {
            self.heading_deg
        };
        VesselState {
            velocity,
            speed,
            heading_deg,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(format!("vessel {}: radius must be > 0", self.id));
        }
        if !self.position.is_finite() || !self.velocity.is_finite() {
            return Err(format!("vessel {}: non-finite state", self.id));
        }
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return Err(format!("vessel {}: speed must be >= 0", self.id));
        }
        let expected = Vec2::from_heading_deg(self.heading_deg) * self.speed;
        if (expected - self.velocity).norm() > 1e-6 {
            return Err(format!(
                "vessel {}: velocity inconsistent with heading/speed",
                self.id
            ));
        }
        Ok(())
    }

    /// Advances the position by one explicit Euler step.
    pub fn advanced(&self, dt: f64) -> Self {
        VesselState {
            position: self.position + self.velocity * dt,
            ..self.clone()
        }
    }
}
