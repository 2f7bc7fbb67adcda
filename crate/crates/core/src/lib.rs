//! Collision and grounding avoidance for surface vessels.
//!
//! Velocity obstacles with position and velocity uncertainty, COLREGs side
//! selection, convexified shallow-water regions and an exact projection onto
//! the resulting convex set of admissible velocities.

pub mod circle_cover;
pub mod colregs;
pub mod geometry;
pub mod ilp_solver;
pub mod plot;
pub mod risk;
pub mod safe_velocity;
pub mod scenario;
pub mod simulator;
pub mod velocity_obstacle;
pub mod vessel;

pub use geometry::{Disc, HalfPlane, Polygon, Vec2};
