//! Sorted event timelines and the interval partition they induce.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{distance_squared_unchecked, threshold_crossings, AnalysisHorizon, CrossingDirection};
use crate::scenario::Scenario;

/// Unordered node pair, stored with the smaller index first.
pub type Link = (usize, usize);

/// Index of a fault point in [`crate::fault::enumerate_fault_points`] order.
pub type FaultPointId = usize;

pub fn link(i: usize, j: usize) -> Link {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    HorizonStart,
    LinkUp { i: usize, j: usize },
    LinkDown { i: usize, j: usize },
    NodeEnterRegion { fault_point: FaultPointId, node: usize },
    NodeLeaveRegion { fault_point: FaultPointId, node: usize },
    HorizonEnd,
}

impl EventKind {
    /// Tie-break among events at the same time: link events before region
    /// events, then by index pair.
    fn order_key(&self) -> (u8, usize, usize, u8) {
        match *self {
            EventKind::HorizonStart => (0, 0, 0, 0),
            EventKind::LinkDown { i, j } => (1, i, j, 0),
            EventKind::LinkUp { i, j } => (1, i, j, 1),
            EventKind::NodeLeaveRegion { fault_point, node } => (2, fault_point, node, 0),
            EventKind::NodeEnterRegion { fault_point, node } => (2, fault_point, node, 1),
            EventKind::HorizonEnd => (3, 0, 0, 0),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EventKind::HorizonStart => "horizon_start",
            EventKind::LinkUp { .. } => "link_up",
            EventKind::LinkDown { .. } => "link_down",
            EventKind::NodeEnterRegion { .. } => "node_enter_region",
            EventKind::NodeLeaveRegion { .. } => "node_leave_region",
            EventKind::HorizonEnd => "horizon_end",
        }
    }

    fn indices(&self) -> Option<(usize, usize)> {
        match *self {
            EventKind::LinkUp { i, j } | EventKind::LinkDown { i, j } => Some((i, j)),
            EventKind::NodeEnterRegion { fault_point, node }
            | EventKind::NodeLeaveRegion { fault_point, node } => Some((fault_point, node)),
            EventKind::HorizonStart | EventKind::HorizonEnd => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl Event {
    pub fn new(time: f64, kind: EventKind) -> Self {
        Event { time, kind }
    }

    fn cmp_key(&self, other: &Event) -> std::cmp::Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.kind.order_key().cmp(&other.kind.order_key()))
    }
}

/// Events over one analysis window together with the state at its start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventTimeline {
    horizon: AnalysisHorizon,
    node_count: usize,
    initial_links: BTreeSet<Link>,
    initial_coverage: BTreeMap<FaultPointId, BTreeSet<usize>>,
    events: Vec<Event>,
}

/// One piece of the partition of the window: constant active links and
/// constant region coverage on `[start, end)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub links: BTreeSet<Link>,
    pub coverage: BTreeMap<FaultPointId, BTreeSet<usize>>,
}

#[derive(Clone, Copy, Debug)]
pub struct IntervalRef<'a> {
    pub start: f64,
    pub end: f64,
    pub links: &'a BTreeSet<Link>,
    pub coverage: &'a BTreeMap<FaultPointId, BTreeSet<usize>>,
}

impl IntervalRef<'_> {
    pub fn to_owned(&self) -> Interval {
        Interval {
            start: self.start,
            end: self.end,
            links: self.links.clone(),
            coverage: self.coverage.clone(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum StateKey {
    Link(Link),
    Covered(FaultPointId, usize),
}

impl EventTimeline {
    /// Assembles a timeline; events are sorted with the fixed tie-break order.
    pub fn from_parts(
        horizon: AnalysisHorizon,
        node_count: usize,
        initial_links: BTreeSet<Link>,
        initial_coverage: BTreeMap<FaultPointId, BTreeSet<usize>>,
        mut events: Vec<Event>,
    ) -> Self {
        events.sort_by(Event::cmp_key);
        let initial_coverage = initial_coverage.into_iter().filter(|(_, s)| !s.is_empty()).collect();
        EventTimeline {
            horizon,
            node_count,
            initial_links,
            initial_coverage,
            events,
        }
    }

    pub fn empty(horizon: AnalysisHorizon, node_count: usize) -> Self {
        EventTimeline::from_parts(horizon, node_count, BTreeSet::new(), BTreeMap::new(), Vec::new())
    }

    pub fn horizon(&self) -> &AnalysisHorizon {
        &self.horizon
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn initial_links(&self) -> &BTreeSet<Link> {
        &self.initial_links
    }

    pub fn initial_coverage(&self) -> &BTreeMap<FaultPointId, BTreeSet<usize>> {
        &self.initial_coverage
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Visits the partition of the window into maximal intervals with constant
    /// state, in time order. Zero-length intervals are skipped.
    pub fn walk_intervals<B>(&self, mut visit: impl FnMut(IntervalRef<'_>) -> ControlFlow<B>) -> Option<B> {
        let (window_start, window_end) = self.horizon.window();
        let mut links = self.initial_links.clone();
        let mut coverage = self.initial_coverage.clone();
        let mut pending_start = window_start;
        let mut idx = 0;
        let mut finals: BTreeMap<StateKey, bool> = BTreeMap::new();

        while idx < self.events.len() {
            let t = self.events[idx].time;
            let mut end = idx;
            finals.clear();
            while end < self.events.len() && self.events[end].time == t {
                let (key, on) = match self.events[end].kind {
                    EventKind::LinkUp { i, j } => (StateKey::Link(link(i, j)), true),
                    EventKind::LinkDown { i, j } => (StateKey::Link(link(i, j)), false),
                    EventKind::NodeEnterRegion { fault_point, node } => {
                        (StateKey::Covered(fault_point, node), true)
                    }
                    EventKind::NodeLeaveRegion { fault_point, node } => {
                        (StateKey::Covered(fault_point, node), false)
                    }
                    EventKind::HorizonStart | EventKind::HorizonEnd => {
                        end += 1;
                        continue;
                    }
                };
                finals.insert(key, on);
                end += 1;
            }
            idx = end;

            let is_on = |key: &StateKey| match *key {
                StateKey::Link(l) => links.contains(&l),
                StateKey::Covered(f, n) => coverage.get(&f).is_some_and(|s| s.contains(&n)),
            };
            let changed = finals.iter().any(|(k, &on)| is_on(k) != on);
            if !changed {
                continue;
            }
            if t > pending_start {
                let view = IntervalRef {
                    start: pending_start,
                    end: t,
                    links: &links,
                    coverage: &coverage,
                };
                if let ControlFlow::Break(b) = visit(view) {
                    return Some(b);
                }
                pending_start = t;
            }
            for (key, &on) in &finals {
                match *key {
                    StateKey::Link(l) => {
                        if on {
                            links.insert(l);
                        } else {
                            links.remove(&l);
                        }
                    }
                    StateKey::Covered(f, n) => {
                        let set = coverage.entry(f).or_default();
                        if on {
                            set.insert(n);
                        } else {
                            set.remove(&n);
                            if set.is_empty() {
                                coverage.remove(&f);
                            }
                        }
                    }
                }
            }
        }
        if window_end > pending_start {
            let view = IntervalRef {
                start: pending_start,
                end: window_end,
                links: &links,
                coverage: &coverage,
            };
            if let ControlFlow::Break(b) = visit(view) {
                return Some(b);
            }
        }
        None
    }

    pub fn intervals(&self) -> Vec<Interval> {
        let mut out = Vec::new();
        self.walk_intervals::<()>(|iv| {
            out.push(iv.to_owned());
            ControlFlow::Continue(())
        });
        out
    }

    /// Rebuilds the event list from a partition, emitting one event per state
    /// difference at each interval boundary.
    pub fn from_intervals(horizon: AnalysisHorizon, node_count: usize, intervals: &[Interval]) -> Self {
        let Some(first) = intervals.first() else {
            return EventTimeline::empty(horizon, node_count);
        };
        let mut events = Vec::new();
        for pair in intervals.windows(2) {
            let (prev, next) = (&pair[0], &pair[1]);
            let t = next.start;
            for &(i, j) in prev.links.difference(&next.links) {
                events.push(Event::new(t, EventKind::LinkDown { i, j }));
            }
            for &(i, j) in next.links.difference(&prev.links) {
                events.push(Event::new(t, EventKind::LinkUp { i, j }));
            }
            let empty = BTreeSet::new();
            let fps: BTreeSet<_> = prev.coverage.keys().chain(next.coverage.keys()).copied().collect();
            for fp in fps {
                let before = prev.coverage.get(&fp).unwrap_or(&empty);
                let after = next.coverage.get(&fp).unwrap_or(&empty);
                for &node in before.difference(after) {
                    events.push(Event::new(t, EventKind::NodeLeaveRegion { fault_point: fp, node }));
                }
                for &node in after.difference(before) {
                    events.push(Event::new(t, EventKind::NodeEnterRegion { fault_point: fp, node }));
                }
            }
        }
        EventTimeline::from_parts(
            horizon,
            node_count,
            first.links.clone(),
            first.coverage.clone(),
            events,
        )
    }

    /// CSV with columns `time,kind,i,j`. The rows open with `horizon_start`,
    /// followed by a `link_up` / `node_enter_region` row at the window start
    /// for every link active and every node covered there, then the events,
    /// and close with `horizon_end`. Region rows carry the fault point in `i`
    /// and the node in `j`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let (start, end) = self.horizon.window();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "kind", "i", "j"])?;
        let mut row = |time: f64, kind: EventKind| -> Result<()> {
            let (i, j) = kind
                .indices()
                .map(|(i, j)| (i.to_string(), j.to_string()))
                .unwrap_or_default();
            w.write_record([time.to_string(), kind.name().to_string(), i, j])?;
            Ok(())
        };
        row(start, EventKind::HorizonStart)?;
        for &(i, j) in &self.initial_links {
            row(start, EventKind::LinkUp { i, j })?;
        }
        for (&fault_point, nodes) in &self.initial_coverage {
            for &node in nodes {
                row(start, EventKind::NodeEnterRegion { fault_point, node })?;
            }
        }
        for e in &self.events {
            row(e.time, e.kind)?;
        }
        row(end, EventKind::HorizonEnd)?;
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Link state changes over the scenario's analysis window at transmission
/// range `tr`. A link is active while the separation is at most `tr`.
pub fn build_link_timeline(scenario: &Scenario, tr: f64) -> EventTimeline {
    let horizon = *scenario.horizon();
    let (start, _) = horizon.window();
    let trajectories = scenario.trajectories();
    let n = trajectories.len();
    let mut initial = BTreeSet::new();
    let mut events = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (&trajectories[i], &trajectories[j]);
            let crossings = threshold_crossings(a, b, tr, &horizon);
            let active_at_start = match crossings.first() {
                // The first change decides the starting state, which keeps the
                // two consistent even for a crossing right at the window start.
                Some(c) => c.direction == CrossingDirection::Rising,
                None => distance_squared_unchecked(a, b, start) <= tr * tr,
            };
            if active_at_start {
                initial.insert((i, j));
            }
            events.extend(crossings.into_iter().map(|c| {
                let kind = match c.direction {
                    CrossingDirection::Falling => EventKind::LinkUp { i, j },
                    CrossingDirection::Rising => EventKind::LinkDown { i, j },
                };
                Event::new(c.time, kind)
            }));
        }
    }
    EventTimeline::from_parts(horizon, n, initial, BTreeMap::new(), events)
}

/// Union of two timelines over the same window.
pub fn merge_timelines(a: &EventTimeline, b: &EventTimeline) -> Result<EventTimeline> {
    if a.horizon != b.horizon || a.node_count != b.node_count {
        return Err(Error::HorizonMismatch);
    }
    let initial_links = a.initial_links.union(&b.initial_links).copied().collect();
    let mut initial_coverage = a.initial_coverage.clone();
    for (fp, nodes) in &b.initial_coverage {
        initial_coverage.entry(*fp).or_default().extend(nodes.iter().copied());
    }
    let events = a.events.iter().chain(&b.events).copied().collect();
    Ok(EventTimeline::from_parts(
        a.horizon,
        a.node_count,
        initial_links,
        initial_coverage,
        events,
    ))
}
