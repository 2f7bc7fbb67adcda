//! Convex over-approximation of shallow-water polygons by a union of discs.
//!
//! The polygon is sampled on a fine grid, candidate discs are drawn from a
//! coarse grid of centers and a finite radius set, and the cheapest set of
//! discs covering every interior sample is found with [`solve_bnb`].

use std::f64::consts::TAU;
use std::time::Duration;

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Aabb, Disc, Polygon, Vec2};
use crate::ilp_solver::{solve_bnb, CoverCandidate, CoverError, CoverSolution, SetCoverInstance};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoverConfig {
    pub fine_res_m: f64,
    pub coarse_res_m: f64,
    pub radii_m: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// Bounding-box expansion for exterior sampling; the largest radius when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin_m: Option<f64>,
}

impl Default for CoverConfig {
    fn default() -> Self {
        CoverConfig {
            fine_res_m: 25.0,
            coarse_res_m: 100.0,
            radii_m: (1..=12).map(|k| 100.0 * k as f64).collect(),
            alpha: 10.0,
            beta: 0.1,
            margin_m: None,
        }
    }
}

impl CoverConfig {
    pub fn validate(&self) -> Result<(), CircleCoverError> {
        let bad = |m: &str| Err(CircleCoverError::InvalidConfig(m.to_string()));
        if !(self.fine_res_m > 0.0 && self.fine_res_m.is_finite()) {
            return bad("fine_res_m must be > 0");
        }
        if !(self.coarse_res_m >= self.fine_res_m && self.coarse_res_m.is_finite()) {
            return bad("coarse_res_m must be >= fine_res_m");
        }
        if self.radii_m.is_empty() {
            return bad("radii_m must be nonempty");
        }
        if self.radii_m.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return bad("radii_m must all be > 0");
        }
        if self.radii_m.windows(2).any(|w| w[1] <= w[0]) {
            return bad("radii_m must be strictly increasing");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite() && self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("alpha and beta must be >= 0");
        }
        if let Some(m) = self.margin_m {
            if !(m >= 0.0 && m.is_finite()) {
                return bad("margin_m must be >= 0");
            }
        }
        Ok(())
    }

    pub fn margin(&self) -> f64 {
        self.margin_m
            .unwrap_or_else(|| self.radii_m.last().copied().unwrap_or(0.0))
    }
}

#[derive(Debug, Error)]
pub enum CircleCoverError {
    #[error("invalid cover config: {0}")]
    InvalidConfig(String),
    #[error("no grid sample falls inside the polygon at this resolution")]
    DegeneratePolygon,
    #[error("interior sample ({}, {}) is not reachable by any candidate disc", .point.n, .point.e)]
    UncoverableRegion { point: Vec2 },
    #[error("time limit reached; returning the best cover found")]
    TimeLimit(Box<CircleCover>),
    #[error(transparent)]
    Solver(CoverError),
}

/// Axis-aligned lattice `origin + (i·step, j·step)`, `i < rows`, `j < cols`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub origin: Vec2,
    pub step: f64,
    pub rows: usize,
    pub cols: usize,
}

impl Grid {
    fn over(bbox: &Aabb, step: f64) -> Grid {
        let count = |span: f64| (span / step + 1e-9).floor() as usize + 1;
        Grid {
            origin: bbox.min,
            step,
            rows: count(bbox.max.n - bbox.min.n),
            cols: count(bbox.max.e - bbox.min.e),
        }
    }

    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.origin.n + i as f64 * self.step,
            self.origin.e + j as f64 * self.step,
        )
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points(&self) -> impl Iterator<Item = Vec2> + '_ {
        (0..self.rows).flat_map(move |i| (0..self.cols).map(move |j| self.point(i, j)))
    }

    /// Rows whose coordinate may lie within `r` of `c.n`, clamped to the grid.
    fn row_range(&self, c: Vec2, r: f64) -> Option<(usize, usize)> {
        let lo = ((c.n - r - self.origin.n) / self.step).floor() - 1.0;
        let hi = ((c.n + r - self.origin.n) / self.step).ceil() + 1.0;
        clamp_range(lo, hi, self.rows)
    }

    /// Column span of row `i` inside the closed disc, exact under
    /// [`Disc::contains`].
    fn col_span(&self, i: usize, disc: &Disc) -> Option<(usize, usize)> {
        let dn = self.point(i, 0).n - disc.center.n;
        let rem = disc.radius * disc.radius - dn * dn;
        if rem < -1e-6 * disc.radius * disc.radius {
            return None;
        }
        let half = rem.max(0.0).sqrt();
        let lo = ((disc.center.e - half - self.origin.e) / self.step).floor() - 1.0;
        let hi = ((disc.center.e + half - self.origin.e) / self.step).ceil() + 1.0;
        let (mut a, mut b) = clamp_range(lo, hi, self.cols)?;
        while a <= b && !disc.contains(self.point(i, a)) {
            a += 1;
        }
        while b > a && !disc.contains(self.point(i, b)) {
            b -= 1;
        }
        if a > b || !disc.contains(self.point(i, a)) {
            return None;
        }
        Some((a, b))
    }
}

fn clamp_range(lo: f64, hi: f64, n: usize) -> Option<(usize, usize)> {
    if n == 0 || hi < 0.0 || lo > (n - 1) as f64 {
        return None;
    }
    Some((lo.max(0.0) as usize, (hi as usize).min(n - 1)))
}

#[derive(Clone, Debug)]
pub struct SampledDomain {
    pub x_in: Vec<Vec2>,
    pub x_out: Vec<Vec2>,
    pub centers: Vec<Vec2>,
    pub fine: Grid,
    pub coarse: Grid,
    /// Per fine-grid row: `(column, index into x_in)` of interior samples.
    interior_rows: Vec<Vec<(usize, usize)>>,
}

pub fn sample_domain(poly: &Polygon, cfg: &CoverConfig) -> Result<SampledDomain, CircleCoverError> {
    cfg.validate()?;
    let bbox = poly.bounding_box().expanded(cfg.margin());
    let fine = Grid::over(&bbox, cfg.fine_res_m);
    let coarse = Grid::over(&bbox, cfg.coarse_res_m);
    let mut x_in = Vec::new();
    let mut x_out = Vec::new();
    let mut interior_rows = vec![Vec::new(); fine.rows];
    for (i, row) in interior_rows.iter_mut().enumerate() {
        for j in 0..fine.cols {
            let p = fine.point(i, j);
            if poly.contains(p) {
                row.push((j, x_in.len()));
                x_in.push(p);
            } else {
                x_out.push(p);
            }
        }
    }
    if x_in.is_empty() {
        return Err(CircleCoverError::DegeneratePolygon);
    }
    Ok(SampledDomain {
        x_in,
        x_out,
        centers: coarse.points().collect(),
        fine,
        coarse,
        interior_rows,
    })
}

/// Coverage of one candidate disc: interior samples as a bitset over `x_in`,
/// exterior samples as a count.
#[derive(Clone, Debug)]
pub struct CandidateCoverage {
    pub center_index: usize,
    pub radius_index: usize,
    pub disc: Disc,
    pub interior: FixedBitSet,
    pub exterior_count: usize,
}

impl CandidateCoverage {
    /// Exterior sample indices into `dom.x_out` covered by this disc.
    pub fn exterior_points<'a>(&'a self, dom: &'a SampledDomain) -> impl Iterator<Item = usize> + 'a {
        dom.x_out
            .iter()
            .enumerate()
            .filter(move |(_, p)| self.disc.contains(**p))
            .map(|(k, _)| k)
    }
}

/// Candidates indexed by `center_index · radii.len() + radius_index`.
/// Candidates covering no interior sample are kept with an empty bitset.
pub fn coverage_matrices(dom: &SampledDomain, radii: &[f64]) -> Vec<CandidateCoverage> {
    let mut out = Vec::with_capacity(dom.centers.len() * radii.len());
    for (ci, &c) in dom.centers.iter().enumerate() {
        for (ri, &r) in radii.iter().enumerate() {
            let disc = Disc { center: c, radius: r };
            let mut interior = FixedBitSet::with_capacity(dom.x_in.len());
            let mut total = 0usize;
            if let Some((r0, r1)) = dom.fine.row_range(c, r) {
                for i in r0..=r1 {
                    let Some((a, b)) = dom.fine.col_span(i, &disc) else {
                        continue;
                    };
                    total += b - a + 1;
                    let row = &dom.interior_rows[i];
                    let start = row.partition_point(|&(j, _)| j < a);
                    for &(j, k) in &row[start..] {
                        if j > b {
                            break;
                        }
                        interior.insert(k);
                    }
                }
            }
            let exterior_count = total - interior.count_ones(..);
            out.push(CandidateCoverage {
                center_index: ci,
                radius_index: ri,
                disc,
                interior,
                exterior_count,
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub total_cost: f64,
    pub proven_optimal: bool,
    pub iterations: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve_time_s: Option<f64>,
    pub n_candidates: usize,
    pub n_interior: usize,
    pub n_exterior: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleCover {
    pub circles: Vec<Disc>,
    pub spill_ratio: f64,
    pub solver: SolverReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Polygon>,
}

impl CircleCover {
    /// Drops wall-clock fields so that serialized output is reproducible.
    pub fn without_timing(mut self) -> Self {
        self.solver.solve_time_s = None;
        self
    }
}

pub fn convexify(poly: &Polygon, cfg: &CoverConfig, time_limit: Duration) -> Result<CircleCover, CircleCoverError> {
    let dom = sample_domain(poly, cfg)?;
    let coverage = coverage_matrices(&dom, &cfg.radii_m);

    let mut reach = FixedBitSet::with_capacity(dom.x_in.len());
    for c in &coverage {
        reach.union_with(&c.interior);
    }
    if let Some(k) = reach.zeroes().next() {
        return Err(CircleCoverError::UncoverableRegion { point: dom.x_in[k] });
    }

    let k = cfg.radii_m.len();
    let candidates: Vec<CoverCandidate> = coverage
        .iter()
        .filter(|c| !c.interior.is_clear())
        .map(|c| CoverCandidate {
            id: c.center_index * k + c.radius_index,
            points: c.interior.clone(),
            cost: cfg.alpha + cfg.beta * c.exterior_count as f64,
        })
        .collect();
    let n_candidates = candidates.len();
    let inst = SetCoverInstance::new(dom.x_in.len(), candidates);

    let (sol, timed_out) = match solve_bnb(&inst, time_limit) {
        Ok(s) => (s, false),
        Err(CoverError::TimeLimit(s)) => (*s, true),
        Err(CoverError::InfeasibleInstance { point }) => {
            return Err(CircleCoverError::UncoverableRegion { point: dom.x_in[point] })
        }
        Err(e) => return Err(CircleCoverError::Solver(e)),
    };
    let cover = assemble(poly, cfg, &dom, &coverage, &sol, n_candidates);
    if timed_out {
        Err(CircleCoverError::TimeLimit(Box::new(cover)))
    } else {
        Ok(cover)
    }
}

fn assemble(
    poly: &Polygon,
    cfg: &CoverConfig,
    dom: &SampledDomain,
    coverage: &[CandidateCoverage],
    sol: &CoverSolution,
    n_candidates: usize,
) -> CircleCover {
    let circles: Vec<Disc> = sol.selected.iter().map(|&id| coverage[id].disc).collect();
    CircleCover {
        spill_ratio: spill_ratio(&circles, poly, cfg.fine_res_m),
        circles,
        solver: SolverReport {
            total_cost: sol.total_cost,
            proven_optimal: sol.proven_optimal,
            iterations: sol.iterations,
            solve_time_s: Some(sol.solve_time),
            n_candidates,
            n_interior: dom.x_in.len(),
            n_exterior: dom.x_out.len(),
        },
        region: Some(poly.clone()),
    }
}

/// Extra area of `poly ∪ circles` over `poly`, relative to `poly`, counted on
/// cell centers of a `res` grid over the joint bounding box.
pub fn spill_ratio(circles: &[Disc], poly: &Polygon, res: f64) -> f64 {
    let bbox = circles
        .iter()
        .fold(poly.bounding_box(), |b, d| b.union(&Aabb::of_disc(d)));
    let rows = ((bbox.max.n - bbox.min.n) / res).ceil() as usize;
    let cols = ((bbox.max.e - bbox.min.e) / res).ceil() as usize;
    let mut in_poly = 0usize;
    let mut in_union = 0usize;
    for i in 0..rows {
        for j in 0..cols {
            let p = Vec2::new(
                bbox.min.n + (i as f64 + 0.5) * res,
                bbox.min.e + (j as f64 + 0.5) * res,
            );
            if poly.contains(p) {
                in_poly += 1;
                in_union += 1;
            } else if circles.iter().any(|d| d.contains(p)) {
                in_union += 1;
            }
        }
    }
    if in_poly == 0 {
        return f64::INFINITY;
    }
    (in_union - in_poly) as f64 / in_poly as f64
}

/// Parameters of the Fourier-perturbed radial region model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionParams {
    pub seed: u64,
    pub r0_m: f64,
    #[serde(default = "default_harmonics")]
    pub n_harmonics: usize,
    #[serde(default = "default_amp")]
    pub amp_max: f64,
    pub center_ne: Vec2,
    #[serde(default = "default_vertices")]
    pub n_vertices: usize,
}

fn default_harmonics() -> usize {
    5
}
fn default_amp() -> f64 {
    0.45
}
fn default_vertices() -> usize {
    72
}

impl RegionParams {
    pub fn generate(&self) -> Result<Polygon, CircleCoverError> {
        generate_region(self.seed, self.r0_m, self.n_harmonics, self.amp_max, self.center_ne, self.n_vertices)
    }
}

/// Radial polygon `r(θ) = r0·(1 + Σ a_n cos(nθ + φ_n))`, `n = 2..=n_harmonics+1`,
/// with `θ` measured clockwise from North. A seed whose polygon is not
/// simple is replaced by the next seed.
pub fn generate_region(
    seed: u64,
    r0: f64,
    n_harmonics: usize,
    amp_max: f64,
    center: Vec2,
    n_vertices: usize,
) -> Result<Polygon, CircleCoverError> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(CircleCoverError::InvalidConfig("r0 must be > 0".into()));
    }
    if !(0.0..0.9).contains(&amp_max) {
        return Err(CircleCoverError::InvalidConfig("amp_max must be in [0, 0.9)".into()));
    }
    if n_vertices < 24 {
        return Err(CircleCoverError::InvalidConfig("n_vertices must be >= 24".into()));
    }
    for attempt in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let terms: Vec<(f64, f64, f64)> = (2..n_harmonics + 2)
            .map(|n| {
                let bound = amp_max / n as f64;
                let a = rng.gen_range(-bound..=bound);
                let phi = rng.gen_range(0.0..TAU);
                (n as f64, a, phi)
            })
            .collect();
        let vertices: Vec<Vec2> = (0..n_vertices)
            .map(|j| {
                let theta = TAU * j as f64 / n_vertices as f64;
                let s: f64 = terms.iter().map(|(n, a, phi)| a * (n * theta + phi).cos()).sum();
                let r = (r0 * (1.0 + s)).max(0.1 * r0);
                center + Vec2::new(r * theta.cos(), r * theta.sin())
            })
            .collect();
        if let Ok(poly) = Polygon::new(vertices) {
            if poly.is_simple() {
                return Ok(poly);
            }
        }
    }
    Err(CircleCoverError::InvalidConfig("no simple polygon within 1000 seeds".into()))
}
