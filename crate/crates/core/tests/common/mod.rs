//! Independent reference computations used by the integration and acceptance
//! tests. Nothing here calls into the analysis code beyond reading scenario
//! fields.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::TAU;

use aeronet_core::kinematics::{AnalysisHorizon, AngularRate, OrbitSpec, Point2, Trajectory};
use aeronet_core::{DeploymentArea, Scenario};
use rand::Rng;

pub type Pos = (f64, f64);

/// Position from the orbit parameters, written out from scratch.
pub fn position(o: &OrbitSpec, t: f64) -> Pos {
    let w = o.angular_velocity.radians_per_hour();
    let phi = o.phase_deg.to_radians() + w * t;
    (o.center.x + o.radius * phi.cos(), o.center.y + o.radius * phi.sin())
}

pub fn orbits(s: &Scenario) -> Vec<OrbitSpec> {
    s.trajectories()
        .iter()
        .map(|t| t.as_orbit().expect("circular").clone())
        .collect()
}

pub fn positions(orbits: &[OrbitSpec], t: f64) -> Vec<Pos> {
    orbits.iter().map(|o| position(o, t)).collect()
}

pub fn dist2(a: Pos, b: Pos) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

/// Random scenario with orbits anywhere inside a square; orbits may overlap.
/// With `equal_rate` every node turns at the same rate, otherwise rates are
/// small integer multiples of a base rate.
pub fn random_scenario<R: Rng>(rng: &mut R, n: usize, side: f64, equal_rate: bool) -> Scenario {
    let base = [
        AngularRate::rational(20, 1),
        AngularRate::rational_pi(1, 2),
        AngularRate::rational(3, 2),
        AngularRate::rational(-5, 1),
    ][rng.gen_range(0..4)];
    let trajectories: Vec<Trajectory> = (0..n)
        .map(|_| {
            let r = if rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(1.0..side / 8.0) };
            let c = Point2::new(rng.gen_range(r..side - r), rng.gen_range(r..side - r));
            let w = if equal_rate {
                base
            } else {
                base.scaled([1, 2, -1, 3][rng.gen_range(0..4)])
            };
            OrbitSpec::new(c, r, rng.gen_range(0.0..360.0), w).into()
        })
        .collect();
    Scenario::periodic(trajectories, DeploymentArea::square(side)).unwrap()
}

/// A link change found by sampling: `(time, up, i, j)`.
pub type SampledEvent = (f64, bool, usize, usize);

/// Link up/down times over the scenario window, found by sampling every pair
/// separation `samples` times and bisecting every sign change of `s - tr`.
pub fn sampled_link_events(s: &Scenario, tr: f64, samples: usize) -> Vec<SampledEvent> {
    let orbits = orbits(s);
    let n = orbits.len();
    let (a, b) = s.horizon().window();
    let tr2 = tr * tr;
    let time = |k: usize| a + (b - a) * (k as f64 / samples as f64);
    let mut prev: Vec<bool> = Vec::with_capacity(n * n);
    let p0 = positions(&orbits, a);
    for i in 0..n {
        for j in (i + 1)..n {
            prev.push(dist2(p0[i], p0[j]) <= tr2);
        }
    }
    let mut out = Vec::new();
    for k in 1..=samples {
        let t = time(k);
        let p = positions(&orbits, t);
        let mut idx = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let inside = dist2(p[i], p[j]) <= tr2;
                if inside != prev[idx] {
                    let f = |t: f64| dist2(position(&orbits[i], t), position(&orbits[j], t)) <= tr2;
                    let (mut lo, mut hi) = (time(k - 1), t);
                    for _ in 0..100 {
                        let mid = 0.5 * (lo + hi);
                        if f(mid) == prev[idx] {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    let when = 0.5 * (lo + hi);
                    if when < b {
                        out.push((when, inside, i, j));
                    }
                    prev[idx] = inside;
                }
                idx += 1;
            }
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// Largest link in a minimum spanning tree of the nodes where `alive` holds:
/// the smallest range connecting them. 0 for at most one node.
pub fn bottleneck(p: &[Pos], alive: impl Fn(usize) -> bool) -> f64 {
    let nodes: Vec<usize> = (0..p.len()).filter(|&v| alive(v)).collect();
    if nodes.len() <= 1 {
        return 0.0;
    }
    let mut best = vec![f64::INFINITY; nodes.len()];
    let mut done = vec![false; nodes.len()];
    best[0] = 0.0;
    let mut worst: f64 = 0.0;
    for _ in 0..nodes.len() {
        let mut u = usize::MAX;
        for v in 0..nodes.len() {
            if !done[v] && (u == usize::MAX || best[v] < best[u]) {
                u = v;
            }
        }
        done[u] = true;
        worst = worst.max(best[u]);
        for v in 0..nodes.len() {
            if !done[v] {
                let d = dist2(p[nodes[u]], p[nodes[v]]);
                if d < best[v] {
                    best[v] = d;
                }
            }
        }
    }
    worst.sqrt()
}

/// Maximum over the window of a per-time requirement, by sampling and then
/// resampling finely around the highest sampled local maxima.
pub fn sampled_max(s: &Scenario, samples: usize, requirement: impl Fn(f64) -> f64) -> f64 {
    let (a, b) = s.horizon().window();
    let dt = (b - a) / samples as f64;
    let values: Vec<f64> = (0..samples).map(|k| requirement(a + dt * k as f64)).collect();
    let mut peaks: Vec<(f64, f64)> = (0..samples)
        .filter(|&k| {
            let left = values[(k + samples - 1) % samples];
            let right = values[(k + 1) % samples];
            values[k] >= left && values[k] >= right
        })
        .map(|k| (values[k], a + dt * k as f64))
        .collect();
    peaks.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for &(_, t) in peaks.iter().take(16) {
        for k in 0..=400 {
            let u = (t - dt + 2.0 * dt * k as f64 / 400.0).clamp(a, b);
            best = best.max(requirement(u));
        }
    }
    best
}

/// Critical range estimate: the largest instantaneous bottleneck.
pub fn sampled_ctr(s: &Scenario, samples: usize) -> f64 {
    let orbits = orbits(s);
    sampled_max(s, samples, |t| bottleneck(&positions(&orbits, t), |_| true))
}

/// Smallest point of the grid `k * step` not below `value`.
pub fn grid_ceil(value: f64, step: f64) -> f64 {
    (value / step).ceil() * step
}

/// Upper bound on how fast any pair separation changes, in miles per hour.
pub fn max_relative_speed(s: &Scenario) -> f64 {
    let speeds: Vec<f64> = orbits(s)
        .iter()
        .map(|o| o.radius * o.angular_velocity.radians_per_hour().abs())
        .collect();
    let mut sorted = speeds.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted.iter().take(2).sum()
}

pub fn connected_among(n: usize, links: &BTreeSet<(usize, usize)>, alive: impl Fn(usize) -> bool) -> bool {
    let nodes: Vec<usize> = (0..n).filter(|&v| alive(v)).collect();
    if nodes.len() <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    seen[nodes[0]] = true;
    let mut queue = VecDeque::from([nodes[0]]);
    while let Some(v) = queue.pop_front() {
        for w in 0..n {
            if !seen[w] && alive(w) && links.contains(&(v.min(w), v.max(w))) {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    nodes.iter().all(|&v| seen[v])
}

/// Region-based connectivity by trying every subset of the covered nodes.
/// `None` stands for infinity.
pub fn subset_rbc(n: usize, links: &BTreeSet<(usize, usize)>, covered: &[usize]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for mask in 0u32..(1 << covered.len()) {
        let removed: Vec<usize> = (0..covered.len())
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| covered[b])
            .collect();
        if n - removed.len() >= 2 && !connected_among(n, links, |v| !removed.contains(&v)) {
            best = Some(best.map_or(removed.len(), |b| b.min(removed.len())));
        }
    }
    best
}

/// Delays by breadth-first search over (node, layer) states, where layer `m`
/// is the `m`-th topology after `start` in the repeated sequence and starts
/// `offset[m]` after it. Returns whether every ordered pair is reached within
/// `delay`.
pub fn time_expanded_connected(
    n: usize,
    topologies: &[(BTreeSet<(usize, usize)>, f64)],
    start: usize,
    delay: f64,
) -> bool {
    let l = topologies.len();
    let period: f64 = topologies.iter().map(|t| t.1).sum();
    // Nothing new can happen after n full periods.
    let mut layers = Vec::new();
    let mut offset = 0.0;
    let mut m = start;
    while offset <= delay + 1e-9 * period && layers.len() < (n + 1) * l {
        layers.push(m);
        offset += topologies[m].1;
        m = (m + 1) % l;
    }
    (0..n).all(|u| {
        let mut seen = vec![vec![false; n]; layers.len()];
        seen[0][u] = true;
        let mut queue = VecDeque::from([(u, 0usize)]);
        while let Some((v, layer)) = queue.pop_front() {
            let links = &topologies[layers[layer]].0;
            for w in 0..n {
                if !seen[layer][w] && links.contains(&(v.min(w), v.max(w))) {
                    seen[layer][w] = true;
                    queue.push_back((w, layer));
                }
            }
            if layer + 1 < layers.len() && !seen[layer + 1][v] {
                seen[layer + 1][v] = true;
                queue.push_back((v, layer + 1));
            }
        }
        (0..n).all(|v| seen.iter().any(|layer| layer[v]))
    })
}

/// Intersection points of the radius-`r` circles around `a` and `b`.
pub fn circle_points(a: Pos, b: Pos, r: f64) -> Vec<Pos> {
    let d2 = dist2(a, b);
    let d = d2.sqrt();
    if d > 2.0 * r {
        return Vec::new();
    }
    if d == 0.0 {
        return vec![(a.0 + r, a.1), (a.0 - r, a.1)];
    }
    let h = (r * r - d2 / 4.0).max(0.0).sqrt();
    let (mx, my) = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
    let (ux, uy) = (-(b.1 - a.1) / d, (b.0 - a.0) / d);
    vec![(mx + h * ux, my + h * uy), (mx - h * ux, my - h * uy)]
}

/// Range needed at one instant so that the failure of any subset of the
/// nodes covered by any candidate fault center leaves the rest connected.
/// Pair intersection centers cover every node within `r` (the two defining
/// nodes always); node centers cover only their node.
pub fn fault_requirement(p: &[Pos], r: f64) -> f64 {
    let n = p.len();
    let mut need = bottleneck(p, |_| true);
    for i in 0..n {
        need = need.max(bottleneck(p, |v| v != i));
        for j in (i + 1)..n {
            for c in circle_points(p[i], p[j], r) {
                let covered: Vec<usize> = (0..n)
                    .filter(|&k| k == i || k == j || dist2(p[k], c) <= r * r)
                    .collect();
                need = need.max(subset_requirement(p, &covered));
            }
        }
    }
    need
}

/// Same test for a disk at an arbitrary center.
pub fn disk_requirement(p: &[Pos], center: Pos, r: f64) -> f64 {
    let covered: Vec<usize> = (0..p.len()).filter(|&k| dist2(p[k], center) <= r * r).collect();
    subset_requirement(p, &covered)
}

fn subset_requirement(p: &[Pos], covered: &[usize]) -> f64 {
    let mut need: f64 = 0.0;
    for mask in 0u32..(1 << covered.len()) {
        let removed = |v: usize| (0..covered.len()).any(|b| mask >> b & 1 == 1 && covered[b] == v);
        need = need.max(bottleneck(p, |v| !removed(v)));
    }
    need
}

pub fn one_period(t_start: f64, period: f64) -> AnalysisHorizon {
    AnalysisHorizon::periodic(t_start, period).unwrap()
}

pub fn period_of(w: f64) -> f64 {
    TAU / w.abs()
}
