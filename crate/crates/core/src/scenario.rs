//! Declarative scenario files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle_cover::{convexify, CircleCover, CircleCoverError, CoverConfig, RegionParams};
use crate::colregs::ColregsConfig;
use crate::geometry::{Disc, Polygon, Vec2};
use crate::risk::RiskThresholds;
use crate::safe_velocity::{PlannerParams, RefPolicy};
use crate::velocity_obstacle::UncertaintyBounds;
use crate::vessel::VesselState;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("convexifying region {index}: {source}")]
    Cover {
        index: usize,
        #[source]
        source: CircleCoverError,
    },
}

/// Parses JSON into `T`, reporting the path of the offending field.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ScenarioError::Schema {
            path: if path.is_empty() { ".".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_json(&text)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VesselSpec {
    pub id: String,
    pub start_ne: Vec2,
    pub heading_deg: f64,
    pub speed_mps: f64,
    #[serde(default = "default_radius")]
    pub radius_m: f64,
}

fn default_radius() -> f64 {
    250.0
}

impl VesselSpec {
    pub fn new(id: &str, start_ne: Vec2, heading_deg: f64, speed_mps: f64) -> Self {
        VesselSpec {
            id: id.to_string(),
            start_ne,
            heading_deg,
            speed_mps,
            radius_m: default_radius(),
        }
    }

    pub fn state(&self) -> VesselState {
        VesselState::from_heading(
            self.id.clone(),
            self.start_ne,
            self.heading_deg,
            self.speed_mps,
            self.radius_m,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    pub v_max_mps: f64,
    pub n_poly: usize,
    pub d_max_mps: f64,
    pub cruise_mps: f64,
    pub goal_radius_m: f64,
    pub v_ref_policy: RefPolicy,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub goal_ne: Option<Vec2>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        let p = PlannerParams::default();
        PlannerConfig {
            v_max_mps: p.v_max,
            n_poly: p.n_poly,
            d_max_mps: p.d_max,
            cruise_mps: p.cruise_speed,
            goal_radius_m: p.goal_radius,
            v_ref_policy: p.v_ref_policy,
            goal_ne: None,
        }
    }
}

impl PlannerConfig {
    pub fn params(&self) -> PlannerParams {
        PlannerParams {
            v_max: self.v_max_mps,
            n_poly: self.n_poly,
            d_max: self.d_max_mps,
            cruise_speed: self.cruise_mps,
            v_ref_policy: self.v_ref_policy,
            goal_radius: self.goal_radius_m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    Polygon(Polygon),
    Generated(RegionParams),
}

impl RegionSpec {
    pub fn polygon(&self) -> Result<Polygon, CircleCoverError> {
        match self {
            RegionSpec::Polygon(p) => Ok(p.clone()),
            RegionSpec::Generated(g) => g.generate(),
        }
    }
}

/// A cover file holds one cover or a list of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoverFile {
    One(CircleCover),
    Many(Vec<CircleCover>),
}

impl CoverFile {
    pub fn into_vec(self) -> Vec<CircleCover> {
        match self {
            CoverFile::One(c) => vec![c],
            CoverFile::Many(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub ego: VesselSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_ne: Option<Vec2>,
    #[serde(default)]
    pub targets: Vec<VesselSpec>,
    #[serde(default)]
    pub regions: Vec<RegionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover_file: Option<PathBuf>,
    #[serde(default)]
    pub cover: CoverConfig,
    #[serde(default = "default_cover_time_limit")]
    pub cover_time_limit_s: f64,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    #[serde(default = "default_horizon")]
    pub horizon_s: f64,
    /// End the run once the goal radius is reached.
    #[serde(default = "default_true")]
    pub stop_at_goal: bool,
    #[serde(default)]
    pub planner: PlannerConfig,
    #[serde(default)]
    pub risk: RiskThresholds,
    #[serde(default)]
    pub uncertainty: UncertaintyBounds,
    #[serde(default)]
    pub colregs: ColregsConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_cover_time_limit() -> f64 {
    60.0
}
fn default_dt() -> f64 {
    0.1
}
fn default_horizon() -> f64 {
    1000.0
}
fn default_true() -> bool {
    true
}

impl Scenario {
    /// Scenario with defaults everywhere except vessels and goal.
    pub fn new(ego: VesselSpec, goal: Vec2, targets: Vec<VesselSpec>) -> Self {
        Scenario {
            name: None,
            ego,
            goal_ne: Some(goal),
            targets,
            regions: Vec::new(),
            cover_file: None,
            cover: CoverConfig::default(),
            cover_time_limit_s: default_cover_time_limit(),
            dt_s: default_dt(),
            horizon_s: default_horizon(),
            stop_at_goal: true,
            planner: PlannerConfig::default(),
            risk: RiskThresholds::default(),
            uncertainty: UncertaintyBounds::default(),
            colregs: ColregsConfig::default(),
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let scn: Scenario = parse_json(text)?;
        scn.validate()?;
        Ok(scn)
    }

    /// Loads a scenario file; a relative `cover_file` is resolved against
    /// the scenario's directory.
    pub fn from_path(path: &Path) -> Result<Self, ScenarioError> {
        let mut scn: Scenario = read_json(path)?;
        if let Some(cf) = &scn.cover_file {
            if cf.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                scn.cover_file = Some(base.join(cf));
            }
        }
        scn.validate()?;
        Ok(scn)
    }

    pub fn goal(&self) -> Result<Vec2, ScenarioError> {
        match (self.goal_ne, self.planner.goal_ne) {
            (Some(a), Some(b)) if a != b => Err(ScenarioError::Invalid(
                "goal_ne and planner.goal_ne disagree".into(),
            )),
            (Some(g), _) | (None, Some(g)) => Ok(g),
            (None, None) => Err(ScenarioError::Invalid("goal_ne is required".into())),
        }
    }

    pub fn step_count(&self) -> Result<usize, ScenarioError> {
        let steps = self.horizon_s / self.dt_s;
        let rounded = steps.round();
        if (steps - rounded).abs() > 1e-6 * rounded.max(1.0) {
            return Err(ScenarioError::Invalid(format!(
                "horizon_s / dt_s = {steps} is not an integer"
            )));
        }
        Ok(rounded as usize)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |m: String| Err(ScenarioError::Invalid(m));
        if !(self.dt_s > 0.0 && self.dt_s.is_finite()) {
            return invalid(format!("dt_s must be > 0, got {}", self.dt_s));
        }
        if !(self.horizon_s > 0.0 && self.horizon_s.is_finite()) {
            return invalid(format!("horizon_s must be > 0, got {}", self.horizon_s));
        }
        self.step_count()?;
        self.goal()?;
        if self.cover_time_limit_s.is_nan() || self.cover_time_limit_s < 0.0 {
            return invalid("cover_time_limit_s must be >= 0".into());
        }
        if self.cover_file.is_some() && !self.regions.is_empty() {
            return invalid("give either regions or cover_file, not both".into());
        }
        self.planner.params().validate().map_err(ScenarioError::Invalid)?;
        self.risk.validate().map_err(ScenarioError::Invalid)?;
        self.uncertainty.validate().map_err(ScenarioError::Invalid)?;
        let mut ids = vec![self.ego.id.as_str()];
        for v in std::iter::once(&self.ego).chain(&self.targets) {
            v.state().validate().map_err(ScenarioError::Invalid)?;
        }
        for t in &self.targets {
            if ids.contains(&t.id.as_str()) {
                return invalid(format!("duplicate vessel id {}", t.id));
            }
            if t.id.is_empty() || t.id.contains([',', ';', '"', '\n']) {
                return invalid(format!("vessel id {:?} must be nonempty without , ; or quotes", t.id));
            }
            ids.push(&t.id);
        }
        if !self.regions.is_empty() {
            self.cover
                .validate()
                .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        }
        Ok(())
    }

    /// Shallow-water polygons and their circle covers, convexifying
    /// `regions` or loading `cover_file`.
    pub fn bathymetry(&self) -> Result<Bathymetry, ScenarioError> {
        if let Some(path) = &self.cover_file {
            let covers = read_json::<CoverFile>(path)?.into_vec();
            let polygons = covers.iter().filter_map(|c| c.region.clone()).collect();
            return Ok(Bathymetry { polygons, covers });
        }
        let limit = Duration::from_secs_f64(self.cover_time_limit_s);
        let mut polygons = Vec::with_capacity(self.regions.len());
        let mut covers = Vec::with_capacity(self.regions.len());
        for (index, region) in self.regions.iter().enumerate() {
            let poly = region.polygon().map_err(|source| ScenarioError::Cover { index, source })?;
            let cover = match convexify(&poly, &self.cover, limit) {
                Ok(c) => c,
                // The incumbent still covers every interior sample.
                Err(CircleCoverError::TimeLimit(c)) => *c,
                Err(source) => return Err(ScenarioError::Cover { index, source }),
            };
            polygons.push(poly);
            covers.push(cover);
        }
        Ok(Bathymetry { polygons, covers })
    }
}

fn generated(seed: u64, r0_m: f64, center_ne: Vec2) -> RegionSpec {
    RegionSpec::Generated(RegionParams {
        seed,
        r0_m,
        n_harmonics: 5,
        amp_max: 0.45,
        center_ne,
        n_vertices: 72,
    })
}

/// Single head-on encounter with one shallow region to port.
pub fn case_a() -> Scenario {
    let mut s = Scenario::new(
        VesselSpec::new("ego", Vec2::ZERO, 0.0, 10.0),
        Vec2::new(7000.0, 0.0),
        vec![VesselSpec::new("V1", Vec2::new(6000.0, 0.0), 180.0, 10.0)],
    );
    s.name = Some("case_a".into());
    s.regions = vec![generated(101, 450.0, Vec2::new(3800.0, -1300.0))];
    s
}

/// Head-on plus a crossing target from starboard, among three shallow regions.
pub fn case_b() -> Scenario {
    let mut s = Scenario::new(
        VesselSpec::new("ego", Vec2::ZERO, 0.0, 10.0),
        Vec2::new(7000.0, 0.0),
        vec![
            VesselSpec::new("V1", Vec2::new(3500.0, 2500.0), 270.0, 10.0),
            VesselSpec::new("V2", Vec2::new(6000.0, 0.0), 180.0, 10.0),
        ],
    );
    s.name = Some("case_b".into());
    s.regions = vec![
        generated(201, 350.0, Vec2::new(1500.0, -1200.0)),
        generated(202, 450.0, Vec2::new(4200.0, -1500.0)),
        generated(203, 350.0, Vec2::new(6000.0, 2700.0)),
    ];
    s
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bathymetry {
    /// Original shallow-water polygons, used for auditing.
    pub polygons: Vec<Polygon>,
    pub covers: Vec<CircleCover>,
}

impl Bathymetry {
    pub fn discs(&self) -> Vec<Disc> {
        self.covers.iter().flat_map(|c| c.circles.iter().copied()).collect()
    }
}
