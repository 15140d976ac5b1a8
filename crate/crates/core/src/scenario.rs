//! Scenario model, the JSON scenario format and the random scenario
//! generator used by the experiments.
//!
//! Units are fixed at the boundary: miles, hours, radians (phases in degrees).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{common_period, AnalysisHorizon, AngularRate, OrbitSpec, Point2, Trajectory};

/// Axis-aligned deployment rectangle `[0, width] x [0, height]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeploymentArea {
    #[serde(rename = "w")]
    pub width: f64,
    #[serde(rename = "h")]
    pub height: f64,
}

impl DeploymentArea {
    pub fn new(width: f64, height: f64) -> Self {
        DeploymentArea { width, height }
    }

    pub fn square(side: f64) -> Self {
        DeploymentArea::new(side, side)
    }

    pub fn diagonal(&self) -> f64 {
        self.width.hypot(self.height)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    trajectories: Vec<Trajectory>,
    area: DeploymentArea,
    horizon: AnalysisHorizon,
    labels: Vec<Option<String>>,
}

impl Scenario {
    pub fn new(trajectories: Vec<Trajectory>, area: DeploymentArea, horizon: AnalysisHorizon) -> Result<Self> {
        if trajectories.is_empty() {
            return Err(Error::scenario("anps", "at least one platform is required"));
        }
        if !(area.width > 0.0 && area.height > 0.0 && area.diagonal().is_finite()) {
            return Err(Error::scenario("area", "width and height must be positive"));
        }
        horizon
            .validate()
            .map_err(|e| Error::scenario("horizon", e.to_string()))?;
        let (start, end) = horizon.window();
        for (idx, traj) in trajectories.iter().enumerate() {
            if !(traj.is_defined_at(start) && traj.is_defined_at(end)) {
                return Err(Error::scenario(
                    format!("anps[{idx}]"),
                    "trajectory is not defined over the whole horizon",
                ));
            }
        }
        let labels = vec![None; trajectories.len()];
        Ok(Scenario {
            trajectories,
            area,
            horizon,
            labels,
        })
    }

    /// Circular scenario analysed over one common period starting at `t = 0`.
    pub fn periodic(trajectories: Vec<Trajectory>, area: DeploymentArea) -> Result<Self> {
        let period = common_period(&trajectories)?.ok_or_else(|| {
            Error::Unsupported("angular rates are not commensurate; an explicit horizon is required".into())
        })?;
        Scenario::new(trajectories, area, AnalysisHorizon::periodic(0.0, period)?)
    }

    pub fn with_labels(mut self, labels: Vec<Option<String>>) -> Result<Self> {
        if labels.len() != self.trajectories.len() {
            return Err(Error::InvalidArgument("one label slot per platform expected".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn node_count(&self) -> usize {
        self.trajectories.len()
    }

    pub fn area(&self) -> &DeploymentArea {
        &self.area
    }

    pub fn horizon(&self) -> &AnalysisHorizon {
        &self.horizon
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    /// Upper end of every transmission range search: the area diagonal.
    pub fn tr_max(&self) -> f64 {
        self.area.diagonal()
    }

    /// Length of one period of the analysis window, or the whole window.
    pub fn period(&self) -> f64 {
        self.horizon.span()
    }

    /// Same flight paths with every angular rate multiplied by `factor`.
    pub fn with_scaled_rates(&self, factor: i64) -> Result<Scenario> {
        if factor == 0 {
            return Err(Error::InvalidArgument("rate factor must be non-zero".into()));
        }
        let trajectories = self
            .trajectories
            .iter()
            .map(|t| match t {
                Trajectory::Circular(o) => Ok(Trajectory::Circular(OrbitSpec {
                    angular_velocity: o.angular_velocity.scaled(factor),
                    ..o.clone()
                })),
                Trajectory::Parametric(_) => Err(Error::Unsupported("cannot rescale a parametric path".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        let k = factor.unsigned_abs() as f64;
        let horizon = match self.horizon.period {
            Some(p) => AnalysisHorizon::periodic(self.horizon.t_start / k, p / k)?,
            None => AnalysisHorizon::new(self.horizon.t_start / k, self.horizon.t_end / k)?,
        };
        let mut out = Scenario::new(trajectories, self.area, horizon)?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// Parses and validates a JSON scenario document.
    pub fn from_json(text: &str) -> Result<Scenario> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let doc: ScenarioDoc = serde_path_to_error::deserialize(&mut *de).map_err(|e| {
            let path = e.path().to_string();
            Error::scenario(path, e.into_inner().to_string())
        })?;
        de.end().map_err(|e| Error::scenario("document", e.to_string()))?;
        doc.into_scenario()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ScenarioDoc::from_scenario(self)?)?)
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    Scenario::from_json(text)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    area: DeploymentArea,
    anps: Vec<AnpDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon: Option<HorizonDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnpDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    center: [f64; 2],
    orbit_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phase_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial_position: Option<[f64; 2]>,
    omega_rad_per_hour: AngularRate,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HorizonDoc {
    #[serde(default)]
    t_start: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_end: Option<f64>,
    #[serde(default = "default_true")]
    periodic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    period: Option<f64>,
}

fn default_true() -> bool {
    true
}

impl ScenarioDoc {
    fn into_scenario(self) -> Result<Scenario> {
        if !(self.area.width > 0.0 && self.area.height > 0.0) {
            return Err(Error::scenario("area", "w and h must be positive"));
        }
        if self.anps.is_empty() {
            return Err(Error::scenario("anps", "at least one platform is required"));
        }
        let mut trajectories = Vec::with_capacity(self.anps.len());
        let mut labels = Vec::with_capacity(self.anps.len());
        for (idx, anp) in self.anps.into_iter().enumerate() {
            let name = match &anp.label {
                Some(l) => format!("anps[{idx}] ({l})"),
                None => format!("anps[{idx}]"),
            };
            let field = |f: &str| format!("{name}.{f}");
            let center = Point2::new(anp.center[0], anp.center[1]);
            if !(center.x.is_finite() && center.y.is_finite()) {
                return Err(Error::scenario(field("center"), "coordinates must be finite"));
            }
            if !(anp.orbit_radius.is_finite() && anp.orbit_radius >= 0.0) {
                return Err(Error::scenario(
                    field("orbit_radius"),
                    format!("radius {} must be finite and non-negative", anp.orbit_radius),
                ));
            }
            anp.omega_rad_per_hour
                .validate()
                .map_err(|m| Error::scenario(field("omega_rad_per_hour"), m))?;
            let orbit = match (anp.phase_deg, anp.initial_position) {
                (Some(_), Some(_)) => {
                    return Err(Error::scenario(
                        name,
                        "give either phase_deg or initial_position, not both",
                    ))
                }
                (Some(phase), None) => {
                    if !phase.is_finite() {
                        return Err(Error::scenario(field("phase_deg"), "phase must be finite"));
                    }
                    OrbitSpec::new(center, anp.orbit_radius, phase, anp.omega_rad_per_hour)
                }
                (None, Some(p)) => OrbitSpec::from_initial_position(
                    center,
                    anp.orbit_radius,
                    Point2::new(p[0], p[1]),
                    anp.omega_rad_per_hour,
                )
                .map_err(|m| Error::scenario(field("initial_position"), m))?,
                (None, None) if anp.orbit_radius == 0.0 => {
                    OrbitSpec::new(center, 0.0, 0.0, anp.omega_rad_per_hour)
                }
                (None, None) => {
                    return Err(Error::scenario(name, "one of phase_deg or initial_position is required"))
                }
            };
            trajectories.push(Trajectory::Circular(orbit));
            labels.push(anp.label);
        }

        let horizon = match self.horizon {
            None => {
                let period = common_period(&trajectories)?.ok_or_else(|| {
                    Error::scenario("horizon", "rates are not commensurate; an explicit horizon is required")
                })?;
                AnalysisHorizon::periodic(0.0, period)?
            }
            Some(h) if h.periodic => {
                let period = match h.period {
                    Some(p) => p,
                    None => common_period(&trajectories)?.ok_or_else(|| {
                        Error::scenario("horizon.period", "rates are not commensurate; give the period explicitly")
                    })?,
                };
                let t_end = h.t_end.unwrap_or(h.t_start + period);
                AnalysisHorizon {
                    t_start: h.t_start,
                    t_end,
                    period: Some(period),
                }
            }
            Some(h) => {
                let t_end = h
                    .t_end
                    .ok_or_else(|| Error::scenario("horizon.t_end", "required for a non-periodic horizon"))?;
                AnalysisHorizon {
                    t_start: h.t_start,
                    t_end,
                    period: None,
                }
            }
        };
        horizon
            .validate()
            .map_err(|e| Error::scenario("horizon", e.to_string()))?;
        Scenario::new(trajectories, self.area, horizon)?.with_labels(labels)
    }

    fn from_scenario(s: &Scenario) -> Result<Self> {
        let anps = s
            .trajectories
            .iter()
            .zip(&s.labels)
            .enumerate()
            .map(|(idx, (t, label))| {
                let o = t.as_orbit().ok_or_else(|| {
                    Error::Unsupported(format!("platform {idx} has a parametric path with no file representation"))
                })?;
                Ok(AnpDoc {
                    label: label.clone(),
                    center: [o.center.x, o.center.y],
                    orbit_radius: o.radius,
                    phase_deg: Some(o.phase_deg),
                    initial_position: None,
                    omega_rad_per_hour: o.angular_velocity,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let h = s.horizon;
        Ok(ScenarioDoc {
            area: s.area,
            anps,
            horizon: Some(HorizonDoc {
                t_start: h.t_start,
                t_end: Some(h.t_end),
                periodic: h.period.is_some(),
                period: h.period,
            }),
        })
    }
}

/// Random fleet as in the simulation setup: centers uniform over the area
/// (keeping every orbit inside it), orbits pairwise disjoint, uniform initial
/// phase, one common angular rate.
pub fn generate_random_scenario(
    n: usize,
    orbit_radius: f64,
    omega: AngularRate,
    area: DeploymentArea,
    rng_seed: u64,
) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    generate_with_rng(&mut rng, n, orbit_radius, omega, area)
}

pub const MAX_PLACEMENT_ATTEMPTS_PER_NODE: usize = 10_000;

pub fn generate_with_rng<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    orbit_radius: f64,
    omega: AngularRate,
    area: DeploymentArea,
) -> Result<Scenario> {
    if n == 0 {
        return Err(Error::InvalidArgument("at least one platform is required".into()));
    }
    if !(orbit_radius >= 0.0) {
        return Err(Error::InvalidArgument("orbit radius must be non-negative".into()));
    }
    omega.validate().map_err(Error::InvalidArgument)?;
    if 2.0 * orbit_radius > area.width || 2.0 * orbit_radius > area.height {
        return Err(Error::Packing {
            placed: 0,
            requested: n,
            attempts: 0,
        });
    }
    let min_gap = 2.0 * orbit_radius;
    let budget = MAX_PLACEMENT_ATTEMPTS_PER_NODE * n;
    let mut centers: Vec<Point2> = Vec::with_capacity(n);
    let mut attempts = 0;
    while centers.len() < n {
        if attempts == budget {
            return Err(Error::Packing {
                placed: centers.len(),
                requested: n,
                attempts,
            });
        }
        attempts += 1;
        let c = Point2::new(
            rng.gen_range(orbit_radius..=area.width - orbit_radius),
            rng.gen_range(orbit_radius..=area.height - orbit_radius),
        );
        if centers.iter().all(|o| o.distance(c) > min_gap) {
            centers.push(c);
        }
    }
    let trajectories: Vec<Trajectory> = centers
        .into_iter()
        .map(|c| OrbitSpec::new(c, orbit_radius, rng.gen_range(0.0..360.0), omega).into())
        .collect();
    let w = omega.radians_per_hour().abs();
    let period = if w == 0.0 { 1.0 } else { std::f64::consts::TAU / w };
    Scenario::new(trajectories, area, AnalysisHorizon::periodic(0.0, period)?)
}
