//! Planar primitives in a North-East frame.
//!
//! Every vector is stored as `(north, east)`. Headings are measured in degrees
//! clockwise from North, so a positive rotation turns North toward East.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance used for boundary classification.
pub const BOUNDARY_EPS: f64 = 1e-9;

/// A 2D vector in the North-East frame. Used for positions (m) and
/// velocities (m/s) alike.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub n: f64,
    pub e: f64,
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.n, v.e]
    }
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { n: 0.0, e: 0.0 };

    pub const fn new(n: f64, e: f64) -> Self {
        Vec2 { n, e }
    }

    /// Unit vector for a compass heading in degrees (clockwise from North).
    pub fn from_heading_deg(heading_deg: f64) -> Self {
        let h = heading_deg.to_radians();
        Vec2::new(h.cos(), h.sin())
    }

    /// Compass heading of this vector in degrees, in `[0, 360)`.
    pub fn heading_deg(self) -> f64 {
        let h = self.e.atan2(self.n).to_degrees();
        if h < 0.0 {
            h + 360.0
        } else {
            h
        }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.n * o.n + self.e * o.e
    }

    /// Scalar cross product `self.n * o.e - self.e * o.n`; positive when `o`
    /// lies clockwise (starboard) of `self` in compass terms.
    pub fn cross(self, o: Vec2) -> f64 {
        self.n * o.e - self.e * o.n
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.n.hypot(self.e)
    }

    /// Unit vector in the same direction, or `None` for a (near-)zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let len = self.norm();
        if len > f64::MIN_POSITIVE && len.is_finite() {
            Some(self / len)
        } else {
            None
        }
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn is_finite(self) -> bool {
        self.n.is_finite() && self.e.is_finite()
    }

    /// Rotate by `theta` radians; `(1, 0)` rotated by `+π/2` is `(0, 1)`.
    pub fn rotate(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(self.n * c - self.e * s, self.n * s + self.e * c)
    }

    /// Unsigned angle between two vectors in `[0, π]`.
    pub fn angle_to(self, o: Vec2) -> f64 {
        self.cross(o).atan2(self.dot(o)).abs()
    }
}

/// Free-function form of [`Vec2::rotate`].
pub fn rotate(v: Vec2, theta: f64) -> Vec2 {
    v.rotate(theta)
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.n + o.n, self.e + o.e)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.n += o.n;
        self.e += o.e;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.n - o.n, self.e - o.e)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.n -= o.n;
        self.e -= o.e;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.n * k, self.e * k)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, k: f64) -> Vec2 {
        Vec2::new(self.n / k, self.e / k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.n, -self.e)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("half-plane normal must be nonzero and finite")]
    BadNormal,
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon repeats its first vertex at the end")]
    RepeatedClosingVertex,
    #[error("polygon has zero signed area")]
    ZeroArea,
    #[error("polygon vertex {0} is not finite")]
    NonFiniteVertex(usize),
}

/// A closed disc.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    #[serde(rename = "center_ne")]
    pub center: Vec2,
    #[serde(rename = "radius_m")]
    pub radius: f64,
}

impl Disc {
    pub fn new(center: Vec2, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::BadRadius(radius));
        }
        Ok(Disc { center, radius })
    }

    /// Closed membership: `‖p − center‖² ≤ radius²`.
    pub fn contains(&self, p: Vec2) -> bool {
        (p - self.center).norm_sq() <= self.radius * self.radius
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }
}

/// The closed half-plane `{ v : normal · (v − anchor) ≥ 0 }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlane {
    pub normal: Vec2,
    pub anchor: Vec2,
}

impl HalfPlane {
    /// Builds a half-plane, normalising `normal` to unit length.
    pub fn new(normal: Vec2, anchor: Vec2) -> Result<Self, GeometryError> {
        let normal = normal.normalized().ok_or(GeometryError::BadNormal)?;
        Ok(HalfPlane { normal, anchor })
    }

    /// Signed slack of `p`; nonnegative on the feasible side.
    pub fn margin(&self, p: Vec2) -> f64 {
        self.normal.dot(p - self.anchor)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        self.margin(p) >= -BOUNDARY_EPS
    }

    /// Right-hand side `c` of the equivalent `normal · v ≥ c` form.
    pub fn offset(&self) -> f64 {
        self.normal.dot(self.anchor)
    }

    /// Orthogonal projection of `p` onto the boundary line.
    pub fn project_onto_boundary(&self, p: Vec2) -> Vec2 {
        p - self.normal * self.margin(p)
    }

    /// Intersection point of the two boundary lines, if they are not parallel.
    pub fn boundary_intersection(&self, other: &HalfPlane) -> Option<Vec2> {
        let det = self.normal.cross(other.normal);
        if det.abs() < 1e-12 {
            return None;
        }
        let (c1, c2) = (self.offset(), other.offset());
        // Cramer's rule on [n1; n2] v = [c1; c2].
        let n = (c1 * other.normal.e - c2 * self.normal.e) / det;
        let e = (self.normal.n * c2 - other.normal.n * c1) / det;
        Some(Vec2::new(n, e))
    }
}

pub fn half_plane_contains(h: &HalfPlane, p: Vec2) -> bool {
    h.contains(p)
}

/// A simple closed polygon given by its vertices, without a repeated closing
/// vertex. Serialises as an array of `[north_m, east_m]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec2>", into = "Vec<Vec2>")]
pub struct Polygon {
    vertices: Vec<Vec2>,
}

impl TryFrom<Vec<Vec2>> for Polygon {
    type Error = GeometryError;
    fn try_from(v: Vec<Vec2>) -> Result<Self, Self::Error> {
        Polygon::new(v)
    }
}

impl From<Polygon> for Vec<Vec2> {
    fn from(p: Polygon) -> Self {
        p.vertices
    }
}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec2,
    pub max: Vec2,
}

impl Aabb {
    pub fn expanded(&self, margin: f64) -> Aabb {
        Aabb {
            min: self.min - Vec2::new(margin, margin),
            max: self.max + Vec2::new(margin, margin),
        }
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb {
            min: Vec2::new(self.min.n.min(o.min.n), self.min.e.min(o.min.e)),
            max: Vec2::new(self.max.n.max(o.max.n), self.max.e.max(o.max.e)),
        }
    }

    pub fn of_disc(d: &Disc) -> Aabb {
        let r = Vec2::new(d.radius, d.radius);
        Aabb {
            min: d.center - r,
            max: d.center + r,
        }
    }
}

impl Polygon {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFiniteVertex(i));
        }
        if vertices.first() == vertices.last() {
            return Err(GeometryError::RepeatedClosingVertex);
        }
        let poly = Polygon { vertices };
        if poly.signed_area() == 0.0 {
            return Err(GeometryError::ZeroArea);
        }
        Ok(poly)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Iterator over the closed edge list `(v_i, v_{i+1})`.
    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace sum; positive for counter-clockwise order in the (n, e) plane.
    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn bounding_box(&self) -> Aabb {
        let mut min = self.vertices[0];
        let mut max = self.vertices[0];
        for v in &self.vertices[1..] {
            min = Vec2::new(min.n.min(v.n), min.e.min(v.e));
            max = Vec2::new(max.n.max(v.n), max.e.max(v.e));
        }
        Aabb { min, max }
    }

    /// Even-odd membership with boundary points counted as inside.
    pub fn contains(&self, p: Vec2) -> bool {
        if self.on_boundary(p) {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            // Half-open rule on the east coordinate avoids double counting
            // vertices that sit exactly on the ray.
            if (a.e > p.e) != (b.e > p.e) {
                let t = (p.e - a.e) / (b.e - a.e);
                let n_cross = a.n + t * (b.n - a.n);
                if n_cross > p.n {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub fn on_boundary(&self, p: Vec2) -> bool {
        self.edges()
            .any(|(a, b)| point_segment_distance(p, a, b) <= BOUNDARY_EPS)
    }

    /// True when no two non-adjacent edges touch and adjacent edges only
    /// share their common vertex.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        let edges: Vec<(Vec2, Vec2)> = self.edges().collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (a, b) = edges[i];
                let (c, d) = edges[j];
                if adjacent {
                    // Adjacent edges must not fold back onto each other.
                    let shared = if j == i + 1 { b } else { a };
                    let (u, w) = if j == i + 1 { (a, d) } else { (b, c) };
                    let (du, dw) = (u - shared, w - shared);
                    if du.cross(dw).abs() <= BOUNDARY_EPS && du.dot(dw) > 0.0 {
                        return false;
                    }
                } else if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        let mut sign = 0.0f64;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            let z = (b - a).cross(c - b);
            if z.abs() <= BOUNDARY_EPS {
                continue;
            }
            if sign == 0.0 {
                sign = z.signum();
            } else if z.signum() != sign {
                return false;
            }
        }
        true
    }
}

pub fn polygon_contains(poly: &Polygon, p: Vec2) -> bool {
    poly.contains(p)
}

pub fn polygon_area(poly: &Polygon) -> f64 {
    poly.area()
}

pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len_sq).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Closed segment intersection test (touching counts).
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    let s = |x: f64| {
        if x.abs() <= BOUNDARY_EPS {
            0
        } else if x > 0.0 {
            1
        } else {
            -1
        }
    };
    let (s1, s2, s3, s4) = (s(o1), s(o2), s(o3), s(o4));
    if s1 * s2 < 0 && s3 * s4 < 0 {
        return true;
    }
    (s1 == 0 && point_segment_distance(c, a, b) <= BOUNDARY_EPS)
        || (s2 == 0 && point_segment_distance(d, a, b) <= BOUNDARY_EPS)
        || (s3 == 0 && point_segment_distance(a, c, d) <= BOUNDARY_EPS)
        || (s4 == 0 && point_segment_distance(b, c, d) <= BOUNDARY_EPS)
}

/// Wraps an angle in degrees to `(-180, 180]`.
pub fn wrap_deg(a: f64) -> f64 {
    let mut w = a.rem_euclid(360.0);
    if w > 180.0 {
        w -= 360.0;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn square() -> Polygon {
        Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    fn l_shape() -> Polygon {
        Polygon::new(
            [(0., 0.), (2., 0.), (2., 1.), (1., 1.), (1., 2.), (0., 2.)]
                .iter()
                .map(|&(n, e)| Vec2::new(n, e))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rotate_examples() {
        let r = rotate(Vec2::new(1.0, 0.0), PI / 2.0);
        assert_abs_diff_eq!(r.n, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.e, 1.0, epsilon = 1e-12);
        assert_eq!(rotate(Vec2::new(3.0, 4.0), 0.0), Vec2::new(3.0, 4.0));
        let r = rotate(Vec2::new(1.0, 0.0), PI / 6.0);
        assert_abs_diff_eq!(r.n, 0.8660, epsilon = 1e-4);
        assert_abs_diff_eq!(r.e, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn heading_convention() {
        let south = Vec2::from_heading_deg(180.0);
        assert_abs_diff_eq!(south.n, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(south.e, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(Vec2::new(0.0, 1.0).heading_deg(), 90.0);
        assert_abs_diff_eq!(Vec2::new(0.0, -1.0).heading_deg(), 270.0);
    }

    #[test]
    fn half_plane_examples() {
        let h = HalfPlane::new(Vec2::new(0.0, 1.0), Vec2::new(0.0, 2.0)).unwrap();
        assert!(half_plane_contains(&h, Vec2::new(10.0, 3.0)));
        assert!(half_plane_contains(&h, Vec2::new(10.0, 2.0)));
        assert!(!half_plane_contains(&h, Vec2::new(10.0, 1.9)));
        assert!(HalfPlane::new(Vec2::ZERO, Vec2::ZERO).is_err());
    }

    #[test]
    fn boundary_intersection_solves_both_lines() {
        let a = HalfPlane::new(Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)).unwrap();
        let b = HalfPlane::new(Vec2::new(1.0, 1.0), Vec2::new(0.0, 5.0)).unwrap();
        let p = a.boundary_intersection(&b).unwrap();
        assert_abs_diff_eq!(a.margin(p), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.margin(p), 0.0, epsilon = 1e-12);
        let c = HalfPlane::new(Vec2::new(-1.0, 0.0), Vec2::new(5.0, 0.0)).unwrap();
        assert!(a.boundary_intersection(&c).is_none());
    }

    #[test]
    fn polygon_contains_examples() {
        assert!(polygon_contains(&square(), Vec2::new(0.5, 0.5)));
        assert!(!polygon_contains(&square(), Vec2::new(2.0, 0.0)));
        assert!(!polygon_contains(&l_shape(), Vec2::new(1.5, 1.5)));
        assert!(polygon_contains(&l_shape(), Vec2::new(0.5, 1.5)));
        // Boundary points and vertices are inside.
        assert!(polygon_contains(&square(), Vec2::new(1.0, 0.5)));
        assert!(polygon_contains(&square(), Vec2::new(0.0, 0.0)));
        assert!(polygon_contains(&l_shape(), Vec2::new(1.0, 1.5)));
    }

    #[test]
    fn polygon_area_examples() {
        assert_abs_diff_eq!(polygon_area(&square()), 1.0);
        let tri = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(0.0, 3.0),
        ])
        .unwrap();
        assert_abs_diff_eq!(polygon_area(&tri), 6.0);
        assert_abs_diff_eq!(polygon_area(&l_shape()), 3.0);
    }

    #[test]
    fn polygon_validation() {
        assert_eq!(
            Polygon::new(vec![Vec2::ZERO, Vec2::new(1.0, 0.0)]),
            Err(GeometryError::TooFewVertices(2))
        );
        assert_eq!(
            Polygon::new(vec![
                Vec2::ZERO,
                Vec2::new(1.0, 0.0),
                Vec2::new(1.0, 1.0),
                Vec2::ZERO
            ]),
            Err(GeometryError::RepeatedClosingVertex)
        );
        assert_eq!(
            Polygon::new(vec![Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)]),
            Err(GeometryError::ZeroArea)
        );
    }

    #[test]
    fn simplicity_and_convexity() {
        assert!(square().is_simple());
        assert!(square().is_convex());
        assert!(l_shape().is_simple());
        assert!(!l_shape().is_convex());
        let bowtie = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(0.0, 1.0),
        ])
        .unwrap();
        assert!(!bowtie.is_simple());
    }

    #[test]
    fn polygon_json_is_pair_array() {
        let json = serde_json::to_string(&square()).unwrap();
        assert_eq!(json, "[[0.0,0.0],[1.0,0.0],[1.0,1.0],[0.0,1.0]]");
        let back: Polygon = serde_json::from_str(&json).unwrap();
        assert_eq!(back, square());
        assert!(serde_json::from_str::<Polygon>("[[0,0],[1,0]]").is_err());
    }

    #[test]
    fn monte_carlo_area_agrees_with_shoelace() {
        use rand::{Rng, SeedableRng};
        let poly = l_shape();
        let bb = poly.bounding_box();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let samples = 1_000_000;
        let hits = (0..samples)
            .filter(|_| {
                let p = Vec2::new(
                    rng.gen_range(bb.min.n..bb.max.n),
                    rng.gen_range(bb.min.e..bb.max.e),
                );
                poly.contains(p)
            })
            .count();
        let box_area = (bb.max.n - bb.min.n) * (bb.max.e - bb.min.e);
        let estimate = box_area * hits as f64 / samples as f64;
        assert!((estimate - poly.area()).abs() / poly.area() < 0.02);
    }

    proptest! {
        #[test]
        fn rotation_preserves_norm(n in -1e3..1e3f64, e in -1e3..1e3f64, th in -10.0..10.0f64) {
            let v = Vec2::new(n, e);
            let r = v.rotate(th);
            prop_assert!((r.norm() - v.norm()).abs() <= 1e-9 * v.norm().max(1.0));
        }

        #[test]
        fn rotation_composes(n in -10.0..10.0f64, e in -10.0..10.0f64, a in -5.0..5.0f64, b in -5.0..5.0f64) {
            let v = Vec2::new(n, e);
            let lhs = v.rotate(a).rotate(b);
            let rhs = v.rotate(a + b);
            prop_assert!((lhs - rhs).norm() < 1e-9);
        }

        #[test]
        fn half_plane_reflection_separates(
            th in 0.0..(2.0 * PI), an in -5.0..5.0f64, ae in -5.0..5.0f64,
            pn in -10.0..10.0f64, pe in -10.0..10.0f64,
        ) {
            let h = HalfPlane::new(Vec2::from_heading_deg(th.to_degrees()), Vec2::new(an, ae)).unwrap();
            let p = Vec2::new(pn, pe);
            let m = h.margin(p);
            prop_assume!(m.abs() > 1e-6);
            let reflected = p - h.normal * (2.0 * m);
            prop_assert!(h.contains(p) != h.contains(reflected));
        }
    }
}
