//! Region-based faults: candidate fault centers, when they exist, which nodes
//! their disk covers, region-based connectivity and the fault-tolerant
//! critical transmission range.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::ControlFlow;

use serde::ser::Serializer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinematics::{
    distance_squared_unchecked, level_crossings, threshold_crossings, CrossingDirection, Point2, Trajectory, EPS_GEOM,
};
use crate::scenario::Scenario;
use crate::timeline::{build_link_timeline, merge_timelines, EventTimeline, FaultPointId, Interval, Link};
use crate::topology::{bisect_range, check_err, Adjacency, Snapshot};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FaultPointKind {
    /// Intersection of the radius-R disks around nodes `i < j`. Branch 1 lies
    /// to the left of the direction from `i` to `j`, branch 2 to the right.
    PairIntersection { i: usize, j: usize, branch: u8 },
    /// The position of node `i` itself.
    NodeCenter { i: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FaultPoint {
    pub id: FaultPointId,
    #[serde(flatten)]
    pub kind: FaultPointKind,
    pub region_radius: f64,
}

/// All candidate fault centers for `n` nodes: every pair intersection
/// (pairs in lexicographic order, branch 1 before branch 2), then every node
/// center. Ids are positions in this list.
pub fn enumerate_fault_points(n: usize, region_radius: f64) -> Vec<FaultPoint> {
    let mut kinds = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in (i + 1)..n {
            kinds.push(FaultPointKind::PairIntersection { i, j, branch: 1 });
            kinds.push(FaultPointKind::PairIntersection { i, j, branch: 2 });
        }
    }
    kinds.extend((0..n).map(|i| FaultPointKind::NodeCenter { i }));
    kinds
        .into_iter()
        .enumerate()
        .map(|(id, kind)| FaultPoint {
            id,
            kind,
            region_radius,
        })
        .collect()
}

/// Intersection of the radius-`r` circles around `pi` and `pj`, with the
/// half-chord clamped to zero when the circles are just apart. Coincident
/// centers give `pi +- (r, 0)`.
fn circle_intersection(pi: Point2, pj: Point2, r: f64, branch: u8) -> Point2 {
    let v = pj - pi;
    let d = v.norm();
    let sign = if branch == 1 { 1.0 } else { -1.0 };
    if d <= 1e-12 * r.max(1.0) {
        return pi + Point2::new(sign * r, 0.0);
    }
    let half = (r * r - 0.25 * d * d).max(0.0).sqrt();
    pi + v * 0.5 + v.perp() * (sign * half / d)
}

fn location_unchecked(kind: FaultPointKind, r: f64, trajectories: &[Trajectory], t: f64) -> Point2 {
    match kind {
        FaultPointKind::PairIntersection { i, j, branch } => circle_intersection(
            trajectories[i].position_unchecked(t),
            trajectories[j].position_unchecked(t),
            r,
            branch,
        ),
        FaultPointKind::NodeCenter { i } => trajectories[i].position_unchecked(t),
    }
}

/// Position of a fault center at time `t`.
pub fn fault_point_location(fp: &FaultPoint, scenario: &Scenario, t: f64) -> Result<Point2> {
    let trajectories = scenario.trajectories();
    match fp.kind {
        FaultPointKind::PairIntersection { i, j, branch } => {
            let pi = trajectories[i].position(t)?;
            let pj = trajectories[j].position(t)?;
            if pi.distance(pj) > 2.0 * fp.region_radius + EPS_GEOM {
                return Err(Error::FaultPointAbsent {
                    fault_point: fp.id,
                    time: t,
                });
            }
            Ok(circle_intersection(pi, pj, fp.region_radius, branch))
        }
        FaultPointKind::NodeCenter { i } => trajectories[i].position(t),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExistenceIntervals {
    pub fault_point: FaultPointId,
    pub intervals: Vec<(f64, f64)>,
}

/// Sub-windows of the analysis window where the separation of `a` and `b`
/// is at most `level`.
fn within_level(a: &Trajectory, b: &Trajectory, level: f64, scenario: &Scenario) -> Vec<(f64, f64)> {
    let horizon = scenario.horizon();
    let (start, end) = horizon.window();
    let crossings = threshold_crossings(a, b, level, horizon);
    let mut inside = match crossings.first() {
        Some(c) => c.direction == CrossingDirection::Rising,
        None => distance_squared_unchecked(a, b, start).sqrt() <= level + EPS_GEOM,
    };
    let mut out = Vec::new();
    let mut open = start;
    for c in crossings {
        match c.direction {
            CrossingDirection::Falling if !inside => {
                open = c.time;
                inside = true;
            }
            CrossingDirection::Rising if inside => {
                if c.time > open {
                    out.push((open, c.time));
                }
                inside = false;
            }
            _ => {}
        }
    }
    if inside && end > open {
        out.push((open, end));
    }
    out
}

pub fn existence_intervals(fp: &FaultPoint, scenario: &Scenario) -> ExistenceIntervals {
    let intervals = match fp.kind {
        FaultPointKind::PairIntersection { i, j, .. } => {
            let t = scenario.trajectories();
            within_level(&t[i], &t[j], 2.0 * fp.region_radius, scenario)
        }
        FaultPointKind::NodeCenter { .. } => vec![scenario.horizon().window()],
    };
    ExistenceIntervals {
        fault_point: fp.id,
        intervals,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageSubinterval {
    pub start: f64,
    pub end: f64,
    pub covered: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoveredExistence {
    pub start: f64,
    pub end: f64,
    pub subintervals: Vec<CoverageSubinterval>,
}

/// For each existence interval of a fault point, its partition into pieces
/// with a constant set of covered nodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoverageTimeline {
    pub fault_point: FaultPoint,
    pub existence: Vec<CoveredExistence>,
}

impl CoverageTimeline {
    pub fn subintervals(&self) -> impl Iterator<Item = &CoverageSubinterval> {
        self.existence.iter().flat_map(|e| e.subintervals.iter())
    }

    /// Region enter/leave events of this fault point over the scenario window.
    pub fn to_event_timeline(&self, scenario: &Scenario) -> EventTimeline {
        let horizon = *scenario.horizon();
        let (start, end) = horizon.window();
        let id = self.fault_point.id;
        let piece = |a: f64, b: f64, covered: Option<&BTreeSet<usize>>| Interval {
            start: a,
            end: b,
            links: BTreeSet::new(),
            coverage: covered
                .filter(|c| !c.is_empty())
                .map(|c| BTreeMap::from([(id, c.clone())]))
                .unwrap_or_default(),
        };
        let mut pieces = Vec::new();
        let mut cursor = start;
        for sub in self.subintervals() {
            if sub.start > cursor {
                pieces.push(piece(cursor, sub.start, None));
            }
            pieces.push(piece(sub.start, sub.end, Some(&sub.covered)));
            cursor = sub.end;
        }
        if end > cursor {
            pieces.push(piece(cursor, end, None));
        }
        EventTimeline::from_intervals(horizon, scenario.node_count(), &pieces)
    }
}

/// Nodes that can ever come within `reach` of node `i`.
fn may_come_within(trajectories: &[Trajectory], i: usize, k: usize, reach: f64) -> bool {
    match (trajectories[i].as_orbit(), trajectories[k].as_orbit()) {
        (Some(a), Some(b)) => a.center.distance(b.center) - a.radius - b.radius <= reach + EPS_GEOM,
        _ => true,
    }
}

pub fn coverage_timeline(fp: &FaultPoint, scenario: &Scenario) -> CoverageTimeline {
    let existence = existence_intervals(fp, scenario);
    let FaultPointKind::PairIntersection { i, j, .. } = fp.kind else {
        let FaultPointKind::NodeCenter { i } = fp.kind else {
            unreachable!()
        };
        let (start, end) = scenario.horizon().window();
        return CoverageTimeline {
            fault_point: *fp,
            existence: vec![CoveredExistence {
                start,
                end,
                subintervals: vec![CoverageSubinterval {
                    start,
                    end,
                    covered: BTreeSet::from([i]),
                }],
            }],
        };
    };

    let trajectories = scenario.trajectories();
    let r = fp.region_radius;
    let span = scenario.horizon().span();
    // Every covered node is within R of the center, which is R from node i.
    let candidates: Vec<usize> = (0..trajectories.len())
        .filter(|&k| k != i && k != j && may_come_within(trajectories, i, k, 2.0 * r))
        .collect();

    let existence = existence
        .intervals
        .iter()
        .map(|&(a, b)| {
            let mut covered = BTreeSet::from([i, j]);
            let mut changes: Vec<(f64, usize, bool)> = Vec::new();
            for &k in &candidates {
                let g = |t: f64| {
                    let c = location_unchecked(fp.kind, r, trajectories, t);
                    (c - trajectories[k].position_unchecked(t)).norm_squared() - r * r
                };
                let step = trajectories[i]
                    .resolving_step(span)
                    .min(trajectories[j].resolving_step(span))
                    .min(trajectories[k].resolving_step(span));
                let crossings = level_crossings(g, a, b, step);
                let inside = match crossings.first() {
                    Some(c) => c.direction == CrossingDirection::Rising,
                    None => g(0.5 * (a + b)) <= 0.0,
                };
                if inside {
                    covered.insert(k);
                }
                changes.extend(
                    crossings
                        .iter()
                        .filter(|c| c.time > a)
                        .map(|c| (c.time, k, c.direction == CrossingDirection::Falling)),
                );
            }
            changes.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

            let mut subintervals = Vec::new();
            let mut open = a;
            let mut idx = 0;
            while idx < changes.len() {
                let t = changes[idx].0;
                let mut next = covered.clone();
                while idx < changes.len() && changes[idx].0 == t {
                    let (_, k, enter) = changes[idx];
                    if enter {
                        next.insert(k);
                    } else {
                        next.remove(&k);
                    }
                    idx += 1;
                }
                if next != covered && t < b {
                    if t > open {
                        subintervals.push(CoverageSubinterval {
                            start: open,
                            end: t,
                            covered: std::mem::take(&mut covered),
                        });
                        open = t;
                    }
                    covered = next;
                }
            }
            subintervals.push(CoverageSubinterval {
                start: open,
                end: b,
                covered,
            });
            CoveredExistence {
                start: a,
                end: b,
                subintervals,
            }
        })
        .collect();
    CoverageTimeline {
        fault_point: *fp,
        existence,
    }
}

/// A piece of time on which both the active links and the nodes covered by
/// one fault point are constant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StaticInterval {
    pub start: f64,
    pub end: f64,
    pub links: BTreeSet<Link>,
    pub covered: BTreeSet<usize>,
}

/// Static intervals of a fault point at transmission range `tr`, in time
/// order. Only times at which the fault point exists are covered.
pub fn static_intervals(fp: &FaultPoint, scenario: &Scenario, tr: f64) -> Result<Vec<StaticInterval>> {
    let links = build_link_timeline(scenario, tr);
    let coverage = coverage_timeline(fp, scenario).to_event_timeline(scenario);
    let merged = merge_timelines(&links, &coverage)?;
    let mut out = Vec::new();
    merged.walk_intervals::<()>(|iv| {
        if let Some(covered) = iv.coverage.get(&fp.id) {
            out.push(StaticInterval {
                start: iv.start,
                end: iv.end,
                links: iv.links.clone(),
                covered: covered.clone(),
            });
        }
        ControlFlow::Continue(())
    });
    Ok(out)
}

/// Region-based connectivity: the fewest covered nodes whose failure
/// disconnects the survivors, or `Infinite` if no failure of covered nodes
/// can. Orders with `Infinite` above every count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rbc {
    Finite(usize),
    Infinite,
}

impl Rbc {
    /// The tolerance test for a region covering `covered_count` nodes.
    pub fn tolerates(self, covered_count: usize) -> bool {
        self >= Rbc::Finite(covered_count + 1)
    }
}

impl Serialize for Rbc {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Rbc::Finite(n) => s.serialize_u64(*n as u64),
            Rbc::Infinite => s.serialize_str("infinite"),
        }
    }
}

/// Minimum number of covered nodes whose removal leaves at least two
/// surviving nodes in more than one component. 0 for a disconnected graph.
pub fn region_based_connectivity(snapshot: &Snapshot, covered: &BTreeSet<usize>) -> Rbc {
    let adj = snapshot.adjacency();
    let n = adj.node_count();
    if !adj.is_connected() {
        return Rbc::Finite(0);
    }
    let mut is_covered = vec![false; n];
    for &c in covered {
        is_covered[c] = true;
    }
    let limit = covered.len() + 1;
    let mut best = Rbc::Infinite;
    let mut consider = |s: usize, t: usize| {
        if adj.has_edge(s, t) {
            return;
        }
        if let Some(cut) = min_region_cut(&adj, &is_covered, s, t, limit) {
            best = best.min(Rbc::Finite(cut));
        }
    };
    // A surviving uncovered node lies in some component after any failure,
    // so it suffices to separate it from everything else.
    match (0..n).find(|&v| !is_covered[v]) {
        Some(anchor) => (0..n).filter(|&v| v != anchor).for_each(|t| consider(anchor, t)),
        None => {
            for s in 0..n {
                for t in (s + 1)..n {
                    consider(s, t);
                }
            }
        }
    }
    best
}

/// Smallest set of covered nodes other than `s` and `t` separating them, if
/// smaller than `limit`. Node-split max flow with unit capacity on covered
/// nodes.
fn min_region_cut(adj: &Adjacency, is_covered: &[bool], s: usize, t: usize, limit: usize) -> Option<usize> {
    let n = adj.node_count();
    let inf = limit as i64;
    // Node v becomes v_in = 2v and v_out = 2v + 1.
    let mut head: Vec<Vec<usize>> = vec![Vec::new(); 2 * n];
    let mut to: Vec<usize> = Vec::new();
    let mut cap: Vec<i64> = Vec::new();
    let mut add = |head: &mut Vec<Vec<usize>>, a: usize, b: usize, c: i64| {
        head[a].push(to.len());
        to.push(b);
        cap.push(c);
        head[b].push(to.len());
        to.push(a);
        cap.push(0);
    };
    for v in 0..n {
        let c = if is_covered[v] && v != s && v != t { 1 } else { inf };
        add(&mut head, 2 * v, 2 * v + 1, c);
        for &w in adj.neighbors(v) {
            add(&mut head, 2 * v + 1, 2 * w, inf);
        }
    }
    let (source, sink) = (2 * s + 1, 2 * t);
    let mut flow = 0;
    let mut via = vec![usize::MAX; 2 * n];
    while flow < limit {
        via.fill(usize::MAX);
        let mut queue = VecDeque::from([source]);
        let mut found = false;
        while let Some(v) = queue.pop_front() {
            for &e in &head[v] {
                let w = to[e];
                if cap[e] > 0 && via[w] == usize::MAX && w != source {
                    via[w] = e;
                    if w == sink {
                        found = true;
                        break;
                    }
                    queue.push_back(w);
                }
            }
            if found {
                break;
            }
        }
        if !found {
            return Some(flow);
        }
        let mut v = sink;
        while v != source {
            let e = via[v];
            cap[e] -= 1;
            cap[e ^ 1] += 1;
            v = to[e ^ 1];
        }
        flow += 1;
    }
    None
}

/// Whether every failure of covered nodes leaves the survivors connected,
/// i.e. `region_based_connectivity` exceeds the number of covered nodes.
///
/// With `U` the uncovered nodes: if `U` is empty every two nodes must be
/// adjacent; otherwise `U` must induce a connected graph and every covered
/// node must have a neighbor in `U`.
pub fn tolerates_any_failure(adj: &Adjacency, is_covered: &[bool]) -> bool {
    first_breaking_failure(adj, is_covered).is_none()
}

/// A set of covered nodes whose failure disconnects the survivors.
fn first_breaking_failure(adj: &Adjacency, is_covered: &[bool]) -> Option<Vec<usize>> {
    let n = adj.node_count();
    let covered = || (0..n).filter(|&v| is_covered[v]);
    if covered().count() == n {
        for a in 0..n {
            for b in (a + 1)..n {
                if !adj.has_edge(a, b) {
                    return Some(covered().filter(|&v| v != a && v != b).collect());
                }
            }
        }
        return None;
    }
    if !adj.is_connected() {
        return Some(Vec::new());
    }
    if !adj.is_connected_among(|v| !is_covered[v]) {
        return Some(covered().collect());
    }
    covered()
        .find(|&c| adj.neighbors(c).iter().all(|&w| is_covered[w]))
        .map(|c| covered().filter(|&v| v != c).collect())
}

/// A fault point and static interval violating the tolerance test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FaultWitness {
    pub fault_point: FaultPoint,
    pub start: f64,
    pub end: f64,
    pub covered: BTreeSet<usize>,
    pub rbc: Rbc,
    /// Covered nodes whose failure disconnects the survivors.
    pub failed_nodes: Vec<usize>,
}

#[derive(Clone, Debug)]
struct CoverageSegment {
    fault_point: FaultPointId,
    start: f64,
    end: f64,
    covered: Vec<usize>,
}

/// Coverage of every fault point for one region radius, computed once and
/// reused for every transmission range tried.
#[derive(Clone, Debug)]
pub struct FaultAnalysis<'a> {
    scenario: &'a Scenario,
    region_radius: f64,
    fault_points: Vec<FaultPoint>,
    segments: Vec<CoverageSegment>,
}

impl<'a> FaultAnalysis<'a> {
    pub fn new(scenario: &'a Scenario, region_radius: f64) -> Result<Self> {
        if !(region_radius > 0.0 && region_radius.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "region radius must be positive, got {region_radius}"
            )));
        }
        let fault_points = enumerate_fault_points(scenario.node_count(), region_radius);
        let trajectories = scenario.trajectories();
        let mut segments = Vec::new();
        for fp in &fault_points {
            let FaultPointKind::PairIntersection { i, j, .. } = fp.kind else {
                continue;
            };
            if !may_come_within(trajectories, i, j, 2.0 * region_radius) {
                continue;
            }
            let coverage = coverage_timeline(fp, scenario);
            segments.extend(coverage.subintervals().map(|s| CoverageSegment {
                fault_point: fp.id,
                start: s.start,
                end: s.end,
                covered: s.covered.iter().copied().collect(),
            }));
        }
        Ok(FaultAnalysis {
            scenario,
            region_radius,
            fault_points,
            segments,
        })
    }

    pub fn region_radius(&self) -> f64 {
        self.region_radius
    }

    pub fn fault_points(&self) -> &[FaultPoint] {
        &self.fault_points
    }

    /// Whether the network tolerates every region failure at range `tr`.
    pub fn tolerates(&self, tr: f64) -> bool {
        self.first_violation(tr).is_none()
    }

    /// The first violation found at range `tr`: node centers in time order,
    /// then pair intersections in id and time order.
    pub fn first_violation(&self, tr: f64) -> Option<FaultWitness> {
        let n = self.scenario.node_count();
        let timeline = build_link_timeline(self.scenario, tr);
        let mut pieces: Vec<(f64, f64, Adjacency)> = Vec::new();
        timeline.walk_intervals::<()>(|iv| {
            pieces.push((iv.start, iv.end, Adjacency::from_links(n, iv.links.iter().copied())));
            ControlFlow::Continue(())
        });

        let mut is_covered = vec![false; n];
        for (start, end, adj) in &pieces {
            let fine = adj.is_connected() && !adj.has_articulation_point();
            if fine {
                continue;
            }
            let victim = (0..n)
                .find(|&v| {
                    is_covered[v] = true;
                    let broken = !tolerates_any_failure(adj, &is_covered);
                    is_covered[v] = false;
                    broken
                })
                .unwrap_or(0);
            return Some(self.witness(
                self.fault_points[n * (n - 1) + victim],
                *start,
                *end,
                adj,
                &[victim],
            ));
        }

        for seg in &self.segments {
            let first = pieces.partition_point(|p| p.1 <= seg.start);
            for (start, end, adj) in pieces[first..].iter().take_while(|p| p.0 < seg.end) {
                let (a, b) = (start.max(seg.start), end.min(seg.end));
                if b <= a {
                    continue;
                }
                for &c in &seg.covered {
                    is_covered[c] = true;
                }
                let ok = tolerates_any_failure(adj, &is_covered);
                for &c in &seg.covered {
                    is_covered[c] = false;
                }
                if !ok {
                    return Some(self.witness(self.fault_points[seg.fault_point], a, b, adj, &seg.covered));
                }
            }
        }
        None
    }

    fn witness(&self, fp: FaultPoint, start: f64, end: f64, adj: &Adjacency, covered: &[usize]) -> FaultWitness {
        let n = adj.node_count();
        let links = (0..n).flat_map(|v| adj.neighbors(v).iter().filter(move |&&w| w > v).map(move |&w| (v, w)));
        let snapshot = Snapshot::new(n, links);
        let covered_set: BTreeSet<usize> = covered.iter().copied().collect();
        let mut mask = vec![false; n];
        for &c in covered {
            mask[c] = true;
        }
        FaultWitness {
            fault_point: fp,
            start,
            end,
            rbc: region_based_connectivity(&snapshot, &covered_set),
            failed_nodes: first_breaking_failure(adj, &mask).unwrap_or_default(),
            covered: covered_set,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CtrFReport {
    pub ctr_f: f64,
    pub region_radius: f64,
    pub err: f64,
    pub tr_max: f64,
    pub iterations: usize,
    pub fault_point_count: usize,
    /// Largest range shown to fail.
    pub lower_bound: f64,
    /// The binding constraint: a violation at `lower_bound`.
    pub binding: Option<FaultWitness>,
}

/// Smallest transmission range, within `err`, at which the failure of the
/// nodes in any disk of radius `region_radius`, at any time, leaves the
/// surviving nodes connected.
pub fn compute_ctr_f(scenario: &Scenario, region_radius: f64, err: f64) -> Result<f64> {
    Ok(ctr_f_report(scenario, region_radius, err)?.ctr_f)
}

pub fn ctr_f_report(scenario: &Scenario, region_radius: f64, err: f64) -> Result<CtrFReport> {
    check_err(err)?;
    let analysis = FaultAnalysis::new(scenario, region_radius)?;
    let tr_max = scenario.tr_max();
    let Some(bracket) = bisect_range(tr_max, err, |tr| analysis.tolerates(tr)) else {
        let what = match analysis.first_violation(tr_max) {
            Some(w) => format!(
                "fault tolerance (fault point {} {:?} on [{}, {}] covering {:?})",
                w.fault_point.id, w.fault_point.kind, w.start, w.end, w.covered
            ),
            None => "fault tolerance".into(),
        };
        return Err(Error::Infeasible { what, tr_max });
    };
    let binding = if bracket.upper > 0.0 {
        analysis.first_violation(bracket.lower)
    } else {
        None
    };
    Ok(CtrFReport {
        ctr_f: bracket.upper,
        region_radius,
        err,
        tr_max,
        iterations: bracket.iterations,
        fault_point_count: analysis.fault_points.len(),
        lower_bound: bracket.lower,
        binding,
    })
}
