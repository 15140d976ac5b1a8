//! Flight-path kinematics: node positions, pairwise separation over time and
//! the times at which a separation crosses a given level.
//!
//! Circular orbits are evaluated in closed form. The squared separation of two
//! orbiting nodes is expanded in the polar parameters of both orbit centers
//! (distance `r_c` and bearing `alpha_c` from the origin), the orbit radii and
//! the phase angles `beta`, giving a sum of at most four sinusoids in `t`.
//! When both nodes share the angular rate the separation reduces to
//! `K + A cos(wt) + B sin(wt)` and the crossings of a level are solved
//! analytically. Everything else falls back to grid sampling plus bisection.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric tolerance in miles (initial position on the orbit circle, tangency).
pub const EPS_GEOM: f64 = 1e-6;
/// Accuracy target for the separation at a reported crossing, in miles.
pub const EPS_LEVEL: f64 = 1e-6;
/// Time resolution of root refinement, in hours.
pub const EPS_TIME: f64 = 1e-8;
/// Grid samples per revolution used by the numeric root finder.
pub const SAMPLES_PER_REVOLUTION: f64 = 1024.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Point2::new(radius * c, radius * s)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, rhs: f64) -> Point2 {
        Point2::new(self.x * rhs, self.y * rhs)
    }
}

/// Signed angular rate in radians per hour.
///
/// The rational form is `num / den` radians per hour, multiplied by `pi` when
/// `pi_factor` is set. Only rational rates take part in period detection; a
/// plain real rate is treated as incommensurate with everything else.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngularRate {
    Rational {
        num: i64,
        den: u64,
        #[serde(default)]
        pi_factor: bool,
    },
    Real(f64),
}

impl AngularRate {
    pub const ZERO: AngularRate = AngularRate::Rational {
        num: 0,
        den: 1,
        pi_factor: false,
    };

    pub fn rational(num: i64, den: u64) -> Self {
        AngularRate::Rational {
            num,
            den,
            pi_factor: false,
        }
    }

    pub fn rational_pi(num: i64, den: u64) -> Self {
        AngularRate::Rational {
            num,
            den,
            pi_factor: true,
        }
    }

    pub fn radians_per_hour(&self) -> f64 {
        match *self {
            AngularRate::Rational {
                num,
                den,
                pi_factor,
            } => {
                let base = num as f64 / den as f64;
                if pi_factor {
                    base * PI
                } else {
                    base
                }
            }
            AngularRate::Real(w) => w,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.radians_per_hour() == 0.0
    }

    /// Multiplies the rate by an integer factor, keeping it exact when rational.
    pub fn scaled(&self, factor: i64) -> AngularRate {
        match *self {
            AngularRate::Rational {
                num,
                den,
                pi_factor,
            } => AngularRate::Rational {
                num: num * factor,
                den,
                pi_factor,
            },
            AngularRate::Real(w) => AngularRate::Real(w * factor as f64),
        }
    }

    pub(crate) fn validate(&self) -> std::result::Result<(), String> {
        match *self {
            AngularRate::Rational { den: 0, .. } => Err("denominator must be positive".into()),
            AngularRate::Real(w) if !w.is_finite() => Err("rate must be finite".into()),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for AngularRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AngularRate::Rational {
                num,
                den,
                pi_factor,
            } => {
                write!(f, "{num}")?;
                if den != 1 {
                    write!(f, "/{den}")?;
                }
                if pi_factor {
                    write!(f, "pi")?;
                }
                Ok(())
            }
            AngularRate::Real(w) => write!(f, "{w}"),
        }
    }
}

impl std::str::FromStr for AngularRate {
    type Err = String;

    /// Accepts `20`, `-3/2`, `1/2pi`, `2pi` (rational) or a decimal such as
    /// `1.5` (real).
    fn from_str(text: &str) -> std::result::Result<Self, String> {
        let text = text.trim();
        let (body, pi_factor) = match text.strip_suffix("pi") {
            Some(b) => (b.trim(), true),
            None => (text, false),
        };
        let body = if pi_factor && (body.is_empty() || body == "-") {
            format!("{body}1")
        } else {
            body.to_string()
        };
        let bad = || format!("cannot read angular rate `{text}`");
        let rate = if let Some((n, d)) = body.split_once('/') {
            AngularRate::Rational {
                num: n.trim().parse().map_err(|_| bad())?,
                den: d.trim().parse().map_err(|_| bad())?,
                pi_factor,
            }
        } else if let Ok(num) = body.parse::<i64>() {
            AngularRate::Rational {
                num,
                den: 1,
                pi_factor,
            }
        } else if !pi_factor {
            AngularRate::Real(body.parse().map_err(|_| bad())?)
        } else {
            return Err(bad());
        };
        rate.validate()?;
        Ok(rate)
    }
}

/// Circular flight path of one platform.
///
/// The initial phase is stored in degrees so that a scenario survives a
/// serialize/parse round trip bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitSpec {
    pub center: Point2,
    pub radius: f64,
    pub phase_deg: f64,
    pub angular_velocity: AngularRate,
}

impl OrbitSpec {
    pub fn new(center: Point2, radius: f64, phase_deg: f64, angular_velocity: AngularRate) -> Self {
        OrbitSpec {
            center,
            radius,
            phase_deg,
            angular_velocity,
        }
    }

    /// A platform hovering at a fixed point.
    pub fn stationary(at: Point2) -> Self {
        OrbitSpec::new(at, 0.0, 0.0, AngularRate::ZERO)
    }

    /// Builds an orbit from the platform's position at `t = 0`, which must lie
    /// on the orbit circle within [`EPS_GEOM`].
    pub fn from_initial_position(
        center: Point2,
        radius: f64,
        initial_position: Point2,
        angular_velocity: AngularRate,
    ) -> std::result::Result<Self, String> {
        let offset = initial_position - center;
        let off_circle = (offset.norm() - radius).abs();
        if off_circle > EPS_GEOM {
            return Err(format!(
                "initial position is {off_circle:.3e} mi off the orbit circle"
            ));
        }
        let phase_deg = if radius == 0.0 {
            0.0
        } else {
            offset.angle().to_degrees()
        };
        Ok(OrbitSpec::new(center, radius, phase_deg, angular_velocity))
    }

    /// Phase angle of the platform about its orbit center at `t = 0`.
    ///
    /// Equivalent to the two-argument arctangent of the projections of
    /// `initial_position - center`.
    pub fn phase_angle(&self) -> f64 {
        self.phase_deg.to_radians()
    }

    pub fn omega(&self) -> f64 {
        self.angular_velocity.radians_per_hour()
    }

    pub fn initial_position(&self) -> Point2 {
        self.center + Point2::from_polar(self.radius, self.phase_angle())
    }

    /// Distance and bearing of the orbit center from the origin.
    pub fn center_polar(&self) -> (f64, f64) {
        (self.center.norm(), self.center.angle())
    }

    pub fn position(&self, t: f64) -> Point2 {
        self.center + Point2::from_polar(self.radius, self.phase_angle() + self.omega() * t)
    }

    pub fn velocity(&self, t: f64) -> Point2 {
        let w = self.omega();
        Point2::from_polar(self.radius * w, self.phase_angle() + w * t).perp()
    }
}

type PositionFn = dyn Fn(f64) -> Point2 + Send + Sync;

/// A predictable but irregular flight path given as a position function.
#[derive(Clone)]
pub struct ParametricPath {
    position: Arc<PositionFn>,
    /// Sampling step used when searching for threshold crossings (hours).
    pub sample_step: f64,
    /// Interval on which the function is valid.
    pub domain: (f64, f64),
}

impl ParametricPath {
    pub fn new(
        position: impl Fn(f64) -> Point2 + Send + Sync + 'static,
        sample_step: f64,
        domain: (f64, f64),
    ) -> Self {
        ParametricPath {
            position: Arc::new(position),
            sample_step,
            domain,
        }
    }

    pub fn position(&self, t: f64) -> Point2 {
        (self.position)(t)
    }
}

impl fmt::Debug for ParametricPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametricPath")
            .field("sample_step", &self.sample_step)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl PartialEq for ParametricPath {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.position, &other.position)
            && self.sample_step == other.sample_step
            && self.domain == other.domain
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Trajectory {
    Circular(OrbitSpec),
    Parametric(ParametricPath),
}

impl Trajectory {
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Trajectory::Circular(_) => (f64::NEG_INFINITY, f64::INFINITY),
            Trajectory::Parametric(p) => p.domain,
        }
    }

    pub fn is_defined_at(&self, t: f64) -> bool {
        let (start, end) = self.domain();
        t >= start && t <= end
    }

    pub fn position(&self, t: f64) -> Result<Point2> {
        if !self.is_defined_at(t) {
            let (start, end) = self.domain();
            return Err(Error::OutsideDomain { time: t, start, end });
        }
        Ok(self.position_unchecked(t))
    }

    pub(crate) fn position_unchecked(&self, t: f64) -> Point2 {
        match self {
            Trajectory::Circular(o) => o.position(t),
            Trajectory::Parametric(p) => p.position(t),
        }
    }

    pub fn as_orbit(&self) -> Option<&OrbitSpec> {
        match self {
            Trajectory::Circular(o) => Some(o),
            Trajectory::Parametric(_) => None,
        }
    }

    /// Largest sampling step that still resolves this path's motion over a
    /// window of `span` hours.
    pub(crate) fn resolving_step(&self, span: f64) -> f64 {
        match self {
            Trajectory::Circular(o) => {
                let revolutions = span * o.omega().abs() / TAU;
                span / (SAMPLES_PER_REVOLUTION * revolutions.max(1.0))
            }
            Trajectory::Parametric(p) => p.sample_step.min(span / SAMPLES_PER_REVOLUTION),
        }
    }
}

impl From<OrbitSpec> for Trajectory {
    fn from(o: OrbitSpec) -> Self {
        Trajectory::Circular(o)
    }
}

/// Time span under analysis. A periodic horizon is analysed over its first
/// period only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisHorizon {
    pub t_start: f64,
    pub t_end: f64,
    pub period: Option<f64>,
}

impl AnalysisHorizon {
    pub fn new(t_start: f64, t_end: f64) -> Result<Self> {
        let h = AnalysisHorizon {
            t_start,
            t_end,
            period: None,
        };
        h.validate()?;
        Ok(h)
    }

    /// One period starting at `t_start`.
    pub fn periodic(t_start: f64, period: f64) -> Result<Self> {
        let h = AnalysisHorizon {
            t_start,
            t_end: t_start + period,
            period: Some(period),
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_start.is_finite() && self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(Error::InvalidArgument(format!(
                "horizon end {} must be after start {}",
                self.t_end, self.t_start
            )));
        }
        if let Some(p) = self.period {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidArgument(format!("period {p} must be positive")));
            }
            if self.t_end - self.t_start < p * (1.0 - 1e-12) {
                return Err(Error::InvalidArgument(format!(
                    "horizon [{}, {}] is shorter than one period {p}",
                    self.t_start, self.t_end
                )));
            }
        }
        Ok(())
    }

    pub fn is_periodic(&self) -> bool {
        self.period.is_some()
    }

    /// The half-open window `[start, end)` that event computations cover.
    pub fn window(&self) -> (f64, f64) {
        match self.period {
            Some(p) => (self.t_start, self.t_start + p),
            None => (self.t_start, self.t_end),
        }
    }

    pub fn span(&self) -> f64 {
        let (a, b) = self.window();
        b - a
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = self.window();
        t >= a && t <= b
    }
}

/// Squared separation of two circular orbits, expanded in the polar parameters
/// of the orbit centers and the phase angles.
pub fn orbit_distance_squared(a: &OrbitSpec, b: &OrbitSpec, t: f64) -> f64 {
    let (rci, aci) = a.center_polar();
    let (rcj, acj) = b.center_polar();
    let (ri, rj) = (a.radius, b.radius);
    let (bi, bj) = (a.phase_angle(), b.phase_angle());
    let (wi, wj) = (a.omega(), b.omega());

    let own_i = rci * rci + ri * ri + 2.0 * rci * ri * (bi - aci + wi * t).cos();
    let own_j = rcj * rcj + rj * rj + 2.0 * rcj * rj * (bj - acj + wj * t).cos();
    // The mixed terms are grouped so that swapping the two orbits gives a
    // bit-identical result.
    let cross = rci * rcj * (aci - acj).cos()
        + ri * rj * ((bi - bj) + (wi - wj) * t).cos()
        + (rci * rj * (aci - bj - wj * t).cos() + rcj * ri * (acj - bi - wi * t).cos());
    (own_i + own_j - 2.0 * cross).max(0.0)
}

/// Squared separation of two equal-rate, equal-radius orbits; the form the
/// general expansion takes once the relative phase term stops depending on `t`.
pub fn equal_rate_distance_squared(a: &OrbitSpec, b: &OrbitSpec, t: f64) -> f64 {
    debug_assert_eq!(a.omega(), b.omega());
    let (rci, aci) = a.center_polar();
    let (rcj, acj) = b.center_polar();
    let r = a.radius;
    let (bi, bj) = (a.phase_angle(), b.phase_angle());
    let w = a.omega();

    let own = rci * rci + r * r + 2.0 * rci * r * (bi - aci + w * t).cos() + rcj * rcj + r * r
        + 2.0 * rcj * r * (bj - acj + w * t).cos();
    let cross = rci * rcj * (aci - acj).cos()
        + r * r * (bi - bj).cos()
        + rci * r * (aci - bj - w * t).cos()
        + rcj * r * (acj - bi - w * t).cos();
    (own - 2.0 * cross).max(0.0)
}

pub fn pairwise_distance_squared(a: &Trajectory, b: &Trajectory, t: f64) -> Result<f64> {
    match (a, b) {
        (Trajectory::Circular(oa), Trajectory::Circular(ob)) => Ok(orbit_distance_squared(oa, ob, t)),
        _ => Ok((a.position(t)? - b.position(t)?).norm_squared()),
    }
}

pub(crate) fn distance_squared_unchecked(a: &Trajectory, b: &Trajectory, t: f64) -> f64 {
    match (a, b) {
        (Trajectory::Circular(oa), Trajectory::Circular(ob)) => orbit_distance_squared(oa, ob, t),
        _ => (a.position_unchecked(t) - b.position_unchecked(t)).norm_squared(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingDirection {
    /// Separation decreasing through the level: the link becomes active.
    Falling,
    /// Separation increasing through the level: the link dies.
    Rising,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub time: f64,
    pub direction: CrossingDirection,
}

/// `s^2(t) = offset + amplitude * cos(omega t - shift)`, the separation of two
/// nodes turning at the same rate.
#[derive(Clone, Copy, Debug)]
struct SinusoidalSeparation {
    offset: f64,
    amplitude: f64,
    shift: f64,
    omega: f64,
}

impl SinusoidalSeparation {
    fn new(a: &OrbitSpec, b: &OrbitSpec) -> Self {
        let w = a.omega();
        // Relative position d(t) = dc + Rot(wt) * rel.
        let dc = a.center - b.center;
        let rel = Point2::from_polar(a.radius, a.phase_angle())
            - Point2::from_polar(b.radius, b.phase_angle());
        let cos_coef = 2.0 * dc.dot(rel);
        let sin_coef = 2.0 * (dc.y * rel.x - dc.x * rel.y);
        SinusoidalSeparation {
            offset: dc.norm_squared() + rel.norm_squared(),
            amplitude: cos_coef.hypot(sin_coef),
            shift: sin_coef.atan2(cos_coef),
            omega: w,
        }
    }

    fn crossings(&self, level: f64, start: f64, end: f64) -> Vec<Crossing> {
        let mut out = Vec::new();
        if self.omega == 0.0 || self.amplitude == 0.0 {
            return out;
        }
        let c = (level * level - self.offset) / self.amplitude;
        // |c| = 1 is a tangential touch and |c| > 1 never reaches the level.
        if c.abs() >= 1.0 {
            return out;
        }
        let base = c.acos();
        for phase in [base, -base] {
            // d(s^2)/dt = -amplitude * omega * sin(phase)
            let slope = -self.omega * phase.sin();
            let direction = if slope < 0.0 {
                CrossingDirection::Falling
            } else {
                CrossingDirection::Rising
            };
            let target = self.shift + phase;
            let (k_lo, k_hi) = {
                let x = (self.omega * start - target) / TAU;
                let y = (self.omega * end - target) / TAU;
                (x.min(y).floor() as i64 - 1, x.max(y).ceil() as i64 + 1)
            };
            for k in k_lo..=k_hi {
                let t = (target + TAU * k as f64) / self.omega;
                if t >= start && t < end {
                    out.push(Crossing { time: t, direction });
                }
            }
        }
        out.sort_by(|x, y| x.time.total_cmp(&y.time));
        out
    }
}

/// Times in `[start, end)` at which `f` changes sign, found by sampling on a
/// grid of spacing at most `step` and refining by bisection. `f <= 0` is the
/// "inside" state; a `Falling` crossing moves inside.
///
/// Sign changes hidden inside a cell are caught by locating sampled local
/// extrema and checking the true extremum. Extrema that only touch zero are
/// not reported.
pub fn level_crossings<F>(f: F, start: f64, end: f64, step: f64) -> Vec<Crossing>
where
    F: Fn(f64) -> f64,
{
    let mut out = Vec::new();
    if !(end > start) {
        return out;
    }
    let cells = ((end - start) / step).ceil().max(1.0) as usize;
    let time_at = |k: usize| start + (end - start) * (k as f64 / cells as f64);

    let mut prev2: Option<(f64, f64)> = None;
    let mut prev = (start, f(start));
    for k in 1..=cells {
        let t = time_at(k);
        let cur = (t, f(t));
        let inside_prev = prev.1 <= 0.0;
        let inside_cur = cur.1 <= 0.0;
        if inside_prev != inside_cur {
            out.push(bisect_crossing(&f, prev, cur));
        } else if let Some(before) = prev2 {
            if (before.1 <= 0.0) == inside_prev {
                // `prev` is a sampled extremum pointing toward zero.
                let toward_zero = if inside_prev {
                    prev.1 > before.1 && prev.1 > cur.1
                } else {
                    prev.1 < before.1 && prev.1 < cur.1
                };
                if toward_zero {
                    hidden_pair(&f, before.0, cur.0, inside_prev, &mut out);
                }
            }
        }
        prev2 = Some(prev);
        prev = cur;
    }
    out.retain(|c| c.time >= start && c.time < end);
    out.sort_by(|x, y| x.time.total_cmp(&y.time));
    out
}

fn bisect_crossing<F: Fn(f64) -> f64>(f: &F, a: (f64, f64), b: (f64, f64)) -> Crossing {
    let direction = if a.1 <= 0.0 {
        CrossingDirection::Rising
    } else {
        CrossingDirection::Falling
    };
    Crossing {
        time: bisect(f, a.0, b.0, a.1 <= 0.0),
        direction,
    }
}

/// Bisects `[lo, hi]` where `f(lo) <= 0` iff `lo_inside`, down to floating
/// point resolution.
fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, lo_inside: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) <= 0.0) == lo_inside {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn hidden_pair<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, inside: bool, out: &mut Vec<Crossing>) {
    // Golden-section search for the extremum that points toward zero.
    let sign = if inside { -1.0 } else { 1.0 };
    let g = |t: f64| sign * f(t);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut g1, mut g2) = (g(x1), g(x2));
    while hi - lo > EPS_TIME * 1e-2 {
        if g1 < g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - inv_phi * (hi - lo);
            g1 = g(x1);
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + inv_phi * (hi - lo);
            g2 = g(x2);
        }
    }
    let t_ext = 0.5 * (lo + hi);
    let f_ext = f(t_ext);
    let crosses = if inside { f_ext > 0.0 } else { f_ext < 0.0 };
    if !crosses {
        return;
    }
    let fa = f(a);
    let fb = f(b);
    out.push(bisect_crossing(f, (a, fa), (t_ext, f_ext)));
    out.push(bisect_crossing(f, (t_ext, f_ext), (b, fb)));
}

/// Sampling step for the numeric root finder on a pair over `span` hours.
pub(crate) fn pair_step(a: &Trajectory, b: &Trajectory, span: f64) -> f64 {
    a.resolving_step(span).min(b.resolving_step(span))
}

/// Times in the horizon window where the separation of `a` and `b` crosses
/// `level`, sorted.
pub fn threshold_crossings(
    a: &Trajectory,
    b: &Trajectory,
    level: f64,
    horizon: &AnalysisHorizon,
) -> Vec<Crossing> {
    let (start, end) = horizon.window();
    if let (Trajectory::Circular(oa), Trajectory::Circular(ob)) = (a, b) {
        if oa.omega() == ob.omega() {
            return SinusoidalSeparation::new(oa, ob).crossings(level, start, end);
        }
    }
    let level_sq = level * level;
    let step = pair_step(a, b, end - start);
    level_crossings(
        |t| distance_squared_unchecked(a, b, t) - level_sq,
        start,
        end,
        step,
    )
}

/// Least common period of a set of circular trajectories, in hours.
///
/// `Ok(None)` when some rate is irrational relative to the others (including
/// every non-zero real-valued rate). Stationary platforms do not constrain the
/// period; if all platforms are stationary the topology never changes and a
/// period of one hour is returned.
pub fn common_period(trajectories: &[Trajectory]) -> Result<Option<f64>> {
    let mut gcd_num: u64 = 0;
    let mut lcm_den: u64 = 1;
    let mut unit: Option<bool> = None;
    for (idx, traj) in trajectories.iter().enumerate() {
        let orbit = traj.as_orbit().ok_or_else(|| {
            Error::Unsupported(format!(
                "trajectory {idx} is parametric; an explicit horizon is required"
            ))
        })?;
        match orbit.angular_velocity {
            AngularRate::Rational {
                num,
                den,
                pi_factor,
            } => {
                if num == 0 {
                    continue;
                }
                if *unit.get_or_insert(pi_factor) != pi_factor {
                    return Ok(None);
                }
                let g = num.unsigned_abs().gcd(&den);
                let (p, q) = (num.unsigned_abs() / g, den / g);
                gcd_num = gcd_num.gcd(&p);
                lcm_den = lcm_den.lcm(&q);
            }
            AngularRate::Real(w) => {
                if w != 0.0 {
                    return Ok(None);
                }
            }
        }
    }
    let Some(pi_factor) = unit else {
        return Ok(Some(1.0));
    };
    // Base rate g = gcd_num / lcm_den (times pi); period = 2 pi / g.
    let g = gcd_num as f64 / lcm_den as f64;
    Ok(Some(if pi_factor { 2.0 / g } else { TAU / g }))
}
