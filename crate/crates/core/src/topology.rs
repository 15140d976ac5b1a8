//! Snapshot connectivity, the always-connected test over a timeline and the
//! critical transmission range search.

use std::collections::{BTreeSet, VecDeque};
use std::ops::ControlFlow;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinematics::distance_squared_unchecked;
use crate::scenario::Scenario;
use crate::timeline::{build_link_timeline, link, EventTimeline, Link};

/// The network graph during one interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub node_count: usize,
    pub links: BTreeSet<Link>,
}

impl Snapshot {
    pub fn new(node_count: usize, links: impl IntoIterator<Item = Link>) -> Self {
        let links = links.into_iter().map(|(i, j)| link(i, j)).collect();
        Snapshot { node_count, links }
    }

    pub fn adjacency(&self) -> Adjacency {
        Adjacency::from_links(self.node_count, self.links.iter().copied())
    }
}

/// Adjacency lists of an undirected simple graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Adjacency {
    neighbors: Vec<Vec<usize>>,
}

impl Adjacency {
    pub fn from_links(n: usize, links: impl IntoIterator<Item = Link>) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for (i, j) in links {
            if i != j {
                neighbors[i].push(j);
                neighbors[j].push(i);
            }
        }
        Adjacency { neighbors }
    }

    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let (x, y) = if self.neighbors[a].len() <= self.neighbors[b].len() {
            (a, b)
        } else {
            (b, a)
        };
        self.neighbors[x].contains(&y)
    }

    /// Component label of every node, labels numbered in order of first node.
    pub fn component_labels(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                for &w in &self.neighbors[v] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        let labels = self.component_labels();
        let count = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut out = vec![Vec::new(); count];
        for (v, &l) in labels.iter().enumerate() {
            out[l].push(v);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.is_connected_among(|_| true)
    }

    /// Connectivity of the subgraph induced by the nodes where `alive` holds.
    /// At most one surviving node counts as connected.
    pub fn is_connected_among(&self, alive: impl Fn(usize) -> bool) -> bool {
        let n = self.node_count();
        let Some(start) = (0..n).find(|&v| alive(v)) else {
            return true;
        };
        let total = (0..n).filter(|&v| alive(v)).count();
        let mut seen = vec![false; n];
        seen[start] = true;
        let mut stack = vec![start];
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.neighbors[v] {
                if !seen[w] && alive(w) {
                    seen[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        reached == total
    }

    /// True if removing some single node disconnects the remaining nodes.
    /// Assumes the graph is connected.
    pub fn has_articulation_point(&self) -> bool {
        let n = self.node_count();
        if n < 3 {
            return false;
        }
        // Iterative Tarjan low-link from node 0.
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut timer = 0;
        let mut root_children = 0;
        let mut stack: Vec<(usize, usize, usize)> = vec![(0, usize::MAX, 0)];
        disc[0] = 0;
        low[0] = 0;
        timer += 1;
        while let Some(&mut (v, parent, ref mut next)) = stack.last_mut() {
            if *next < self.neighbors[v].len() {
                let w = self.neighbors[v][*next];
                *next += 1;
                if w == parent {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    if v == 0 {
                        root_children += 1;
                    }
                    stack.push((w, v, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if parent != usize::MAX {
                    low[parent] = low[parent].min(low[v]);
                    if parent != 0 && low[v] >= disc[parent] {
                        return true;
                    }
                }
            }
        }
        root_children > 1
    }
}

pub fn is_connected(snapshot: &Snapshot) -> bool {
    snapshot.adjacency().is_connected()
}

/// An interval of the timeline whose graph is disconnected.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Disconnection {
    pub start: f64,
    pub end: f64,
    pub components: Vec<Vec<usize>>,
}

/// First interval of `timeline` on which the graph is disconnected.
pub fn first_disconnection(timeline: &EventTimeline) -> Option<Disconnection> {
    let n = timeline.node_count();
    timeline.walk_intervals(|iv| {
        let adj = Adjacency::from_links(n, iv.links.iter().copied());
        if adj.is_connected() {
            ControlFlow::Continue(())
        } else {
            ControlFlow::Break(Disconnection {
                start: iv.start,
                end: iv.end,
                components: adj.components(),
            })
        }
    })
}

/// Whether the network stays connected over the whole analysis window at
/// transmission range `tr`.
pub fn always_connected(scenario: &Scenario, tr: f64) -> bool {
    first_disconnection(&build_link_timeline(scenario, tr)).is_none()
}

/// Outcome of a monotone bisection over `[0, tr_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Bracket {
    /// Largest range known to fail (0 when the range 0 already works).
    pub lower: f64,
    /// Smallest range known to work; the returned answer.
    pub upper: f64,
    pub iterations: usize,
}

/// Binary search for the smallest `tr` with `feasible(tr)`, assuming
/// feasibility is monotone. Stops once the bracket is at most `err` wide.
/// `None` when `tr_max` itself is infeasible.
pub(crate) fn bisect_range(tr_max: f64, err: f64, mut feasible: impl FnMut(f64) -> bool) -> Option<Bracket> {
    if feasible(0.0) {
        return Some(Bracket {
            lower: 0.0,
            upper: 0.0,
            iterations: 0,
        });
    }
    if !feasible(tr_max) {
        return None;
    }
    let (mut lo, mut hi) = (0.0, tr_max);
    let mut iterations = 0;
    while hi - lo > err {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(Bracket {
        lower: lo,
        upper: hi,
        iterations,
    })
}

pub(crate) fn check_err(err: f64) -> Result<()> {
    if err > 0.0 && err.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("err must be positive, got {err}")))
    }
}

/// Result of the critical transmission range search with the certificate
/// that the range just below the answer fails.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CtrReport {
    pub ctr: f64,
    pub err: f64,
    pub tr_max: f64,
    pub iterations: usize,
    /// Largest range shown to leave the network disconnected.
    pub lower_bound: f64,
    /// Disconnected interval at `lower_bound`, absent when the answer is 0.
    pub disconnection: Option<Disconnection>,
    /// Shortest pair joining two components at the middle of that interval:
    /// the link that the answer brings up.
    pub binding_link: Option<Link>,
}

/// Smallest transmission range, within `err`, keeping the network connected
/// at every instant of the analysis window.
pub fn compute_ctr(scenario: &Scenario, err: f64) -> Result<f64> {
    Ok(ctr_report(scenario, err)?.ctr)
}

pub fn ctr_report(scenario: &Scenario, err: f64) -> Result<CtrReport> {
    check_err(err)?;
    let tr_max = scenario.tr_max();
    let bracket = bisect_range(tr_max, err, |tr| always_connected(scenario, tr)).ok_or_else(|| {
        Error::Infeasible {
            what: "connectivity".into(),
            tr_max,
        }
    })?;
    let (disconnection, binding_link) = if bracket.upper > 0.0 {
        let d = first_disconnection(&build_link_timeline(scenario, bracket.lower));
        let link = d.as_ref().and_then(|d| closest_cross_pair(scenario, d));
        (d, link)
    } else {
        (None, None)
    };
    Ok(CtrReport {
        ctr: bracket.upper,
        err,
        tr_max,
        iterations: bracket.iterations,
        lower_bound: bracket.lower,
        disconnection,
        binding_link,
    })
}

fn closest_cross_pair(scenario: &Scenario, d: &Disconnection) -> Option<Link> {
    let t = 0.5 * (d.start + d.end);
    let trajectories = scenario.trajectories();
    let mut label = vec![0; scenario.node_count()];
    for (c, comp) in d.components.iter().enumerate() {
        for &v in comp {
            label[v] = c;
        }
    }
    let mut best: Option<(f64, Link)> = None;
    for i in 0..label.len() {
        for j in (i + 1)..label.len() {
            if label[i] == label[j] {
                continue;
            }
            let s = distance_squared_unchecked(&trajectories[i], &trajectories[j], t);
            if best.is_none_or(|(b, _)| s < b) {
                best = Some((s, (i, j)));
            }
        }
    }
    best.map(|(_, l)| l)
}
