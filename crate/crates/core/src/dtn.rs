//! Delay-tolerant connectivity over the periodic sequence of topologies.
//!
//! A message can cross any number of links of one topology at once, and
//! hopping into a topology completes at that topology's start. A path's delay
//! is the time from the sweep start to the start of the topology in which its
//! last hop is taken.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::timeline::{build_link_timeline, EventTimeline, Link};
use crate::topology::{bisect_range, check_err, Adjacency, Snapshot};

#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    pub snapshot: Snapshot,
    pub start: f64,
    pub duration: f64,
}

/// The topologies of one period (or of a non-repeating window) in order.
#[derive(Clone, Debug, PartialEq)]
pub struct TopologySequence {
    node_count: usize,
    topologies: Vec<Topology>,
    repeats: bool,
    /// Node sets of the multi-node components of every topology.
    components: Vec<Vec<Bits>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn single(n: usize, v: usize) -> Self {
        let mut b = Bits::empty(n);
        b.0[v / 64] |= 1 << (v % 64);
        b
    }

    fn insert(&mut self, v: usize) {
        self.0[v / 64] |= 1 << (v % 64);
    }

    fn intersects(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }
}

impl TopologySequence {
    /// `durations` must be positive. A repeating sequence is one period of a
    /// periodic network.
    pub fn new(node_count: usize, topologies: Vec<(Snapshot, f64)>, repeats: bool) -> Result<Self> {
        let mut start = 0.0;
        let mut out = Vec::with_capacity(topologies.len());
        for (idx, (snapshot, duration)) in topologies.into_iter().enumerate() {
            if !(duration > 0.0 && duration.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "topology {idx} has non-positive duration {duration}"
                )));
            }
            if snapshot.node_count != node_count || snapshot.links.iter().any(|&(_, j)| j >= node_count) {
                return Err(Error::InvalidArgument(format!("topology {idx} does not match {node_count} nodes")));
            }
            out.push(Topology {
                snapshot,
                start,
                duration,
            });
            start += duration;
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument("a topology sequence needs at least one topology".into()));
        }
        Ok(Self::assemble(node_count, out, repeats))
    }

    fn assemble(node_count: usize, topologies: Vec<Topology>, repeats: bool) -> Self {
        let components = topologies
            .iter()
            .map(|t| {
                t.snapshot
                    .adjacency()
                    .components()
                    .into_iter()
                    .filter(|c| c.len() > 1)
                    .map(|c| {
                        let mut b = Bits::empty(node_count);
                        c.into_iter().for_each(|v| b.insert(v));
                        b
                    })
                    .collect()
            })
            .collect();
        TopologySequence {
            node_count,
            topologies,
            repeats,
            components,
        }
    }

    /// Topologies of a link timeline; they repeat when its horizon is periodic.
    pub fn from_timeline(timeline: &EventTimeline) -> Self {
        let n = timeline.node_count();
        let mut topologies = Vec::new();
        timeline.walk_intervals::<()>(|iv| {
            topologies.push(Topology {
                snapshot: Snapshot {
                    node_count: n,
                    links: iv.links.clone(),
                },
                start: iv.start,
                duration: iv.end - iv.start,
            });
            ControlFlow::Continue(())
        });
        Self::assemble(n, topologies, timeline.horizon().is_periodic())
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn topologies(&self) -> &[Topology] {
        &self.topologies
    }

    pub fn len(&self) -> usize {
        self.topologies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.topologies.is_empty()
    }

    pub fn repeats(&self) -> bool {
        self.repeats
    }

    pub fn period(&self) -> f64 {
        self.topologies.iter().map(|t| t.duration).sum()
    }

    /// Delay of every ordered pair starting at the beginning of topology
    /// `start_index`, exploring only topologies starting within `cutoff` of
    /// it. `delays[u][v]` is `None` when `v` is not reached from `u`.
    fn sweep(&self, start_index: usize, cutoff: f64) -> Vec<Vec<Option<f64>>> {
        let n = self.node_count;
        let l = self.topologies.len();
        let mut reach: Vec<Bits> = (0..n).map(|u| Bits::single(n, u)).collect();
        let mut delays = vec![vec![None; n]; n];
        for (u, row) in delays.iter_mut().enumerate() {
            row[u] = Some(0.0);
        }
        let mut missing = n * (n - 1);
        let tol = 1e-9 * self.period();
        let mut tau = 0.0;
        let mut idle = 0;
        let mut m = start_index;
        while missing > 0 && tau <= cutoff + tol {
            let mut changed = false;
            for comp in &self.components[m] {
                for u in 0..n {
                    if !reach[u].intersects(comp) {
                        continue;
                    }
                    for (w, (r, c)) in reach[u].0.iter_mut().zip(&comp.0).enumerate() {
                        let mut fresh = c & !*r;
                        *r |= c;
                        while fresh != 0 {
                            let v = w * 64 + fresh.trailing_zeros() as usize;
                            fresh &= fresh - 1;
                            delays[u][v] = Some(tau);
                            missing -= 1;
                            changed = true;
                        }
                    }
                }
            }
            if changed {
                idle = 0;
            } else {
                idle += 1;
            }
            tau += self.topologies[m].duration;
            m += 1;
            if m == l {
                if !self.repeats {
                    break;
                }
                m = 0;
            }
            if idle >= l {
                // A full period without progress: nothing more is reachable.
                break;
            }
        }
        delays
    }

    /// Earliest-arrival delay of every ordered pair from the start of
    /// topology `start_index`, without a delay bound.
    pub fn earliest_delays(&self, start_index: usize) -> Vec<Vec<Option<f64>>> {
        self.sweep(start_index, f64::INFINITY)
    }
}

/// Whether the union of all topologies is connected.
pub fn superimposed_connected(ts: &TopologySequence) -> bool {
    let links: BTreeSet<Link> = ts
        .topologies
        .iter()
        .flat_map(|t| t.snapshot.links.iter().copied())
        .collect();
    Adjacency::from_links(ts.node_count, links).is_connected()
}

/// Whether every ordered pair has a temporal path of delay at most `delay`
/// starting at the beginning of topology `start_index`.
pub fn connected_with_delay(ts: &TopologySequence, delay: f64, start_index: usize) -> bool {
    ts.sweep(start_index, delay)
        .iter()
        .all(|row| row.iter().all(|d| d.is_some()))
}

/// [`connected_with_delay`] for every start index.
pub fn connected_with_delay_all_starts(ts: &TopologySequence, delay: f64) -> bool {
    (0..ts.len()).all(|s| connected_with_delay(ts, delay, s))
}

/// `(l - 1)` times the period, for `l` topologies.
pub fn d_max(ts: &TopologySequence) -> f64 {
    (ts.len() - 1) as f64 * ts.period()
}

/// A delay beyond which bounded-delay connectivity of a repeating sequence
/// equals connectivity of the superimposed graph: every full period without
/// full reachability adds at least one node to each reachable set.
pub fn reachability_delay_bound(ts: &TopologySequence) -> f64 {
    ts.node_count.saturating_sub(1) as f64 * ts.period()
}

fn delay_feasible(ts: &TopologySequence, delay: f64, all_starts: bool) -> bool {
    if ts.repeats && delay >= reachability_delay_bound(ts) {
        return superimposed_connected(ts);
    }
    if all_starts {
        connected_with_delay_all_starts(ts, delay)
    } else {
        connected_with_delay(ts, delay, 0)
    }
}

/// Whether the network at range `tr` is connected with delay `delay`.
pub fn connected_with_delay_at(scenario: &Scenario, tr: f64, delay: f64, all_starts: bool) -> bool {
    let ts = TopologySequence::from_timeline(&build_link_timeline(scenario, tr));
    delay_feasible(&ts, delay, all_starts)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StartFeasibility {
    pub start_index: usize,
    pub start_time: f64,
    pub feasible: bool,
    /// Worst pair from this start: unreachable within the delay if any,
    /// otherwise the pair with the largest delay.
    pub worst_pair: Option<(usize, usize)>,
    /// Delay of `worst_pair`; absent when it is unreachable within the bound.
    pub worst_delay: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CtrDReport {
    pub ctr_d: f64,
    pub delay: f64,
    pub err: f64,
    pub all_starts: bool,
    pub tr_max: f64,
    pub iterations: usize,
    /// Largest range shown to fail.
    pub lower_bound: f64,
    /// Per-start outcome at `lower_bound`.
    pub starts: Vec<StartFeasibility>,
    /// An ordered pair without a delay-bounded path at `lower_bound`.
    pub binding_pair: Option<(usize, usize)>,
}

fn start_outcomes(ts: &TopologySequence, delay: f64, all_starts: bool) -> Vec<StartFeasibility> {
    let starts = if all_starts { ts.len() } else { 1 };
    (0..starts)
        .map(|s| {
            let delays = ts.sweep(s, delay);
            let mut worst: Option<((usize, usize), Option<f64>)> = None;
            for (u, row) in delays.iter().enumerate() {
                for (v, d) in row.iter().enumerate() {
                    let worse = match (worst, d) {
                        (None, _) => u != v,
                        (Some((_, Some(_))), None) => true,
                        (Some((_, Some(w))), Some(d)) => *d > w,
                        (Some((_, None)), _) => false,
                    };
                    if worse {
                        worst = Some(((u, v), *d));
                    }
                }
            }
            StartFeasibility {
                start_index: s,
                start_time: ts.topologies[s].start,
                feasible: delays.iter().all(|row| row.iter().all(|d| d.is_some())),
                worst_pair: worst.map(|w| w.0),
                worst_delay: worst.and_then(|w| w.1),
            }
        })
        .collect()
}

/// Smallest transmission range, within `err`, at which every ordered pair has
/// a temporal path with delay at most `delay` (hours), from the window start
/// or from the start of every topology when `all_starts` is set.
pub fn compute_ctr_d(scenario: &Scenario, delay: f64, err: f64, all_starts: bool) -> Result<f64> {
    Ok(ctr_d_report(scenario, delay, err, all_starts)?.ctr_d)
}

pub fn ctr_d_report(scenario: &Scenario, delay: f64, err: f64, all_starts: bool) -> Result<CtrDReport> {
    check_err(err)?;
    if !(delay >= 0.0) {
        return Err(Error::InvalidArgument(format!("delay must be non-negative, got {delay}")));
    }
    let tr_max = scenario.tr_max();
    let bracket = bisect_range(tr_max, err, |tr| connected_with_delay_at(scenario, tr, delay, all_starts))
        .ok_or_else(|| Error::Infeasible {
            what: format!("connectivity with delay {delay}"),
            tr_max,
        })?;
    let (starts, binding_pair) = if bracket.upper > 0.0 {
        let ts = TopologySequence::from_timeline(&build_link_timeline(scenario, bracket.lower));
        let starts = start_outcomes(&ts, delay, all_starts);
        let binding = starts.iter().find(|s| !s.feasible).and_then(|s| s.worst_pair);
        (starts, binding)
    } else {
        (Vec::new(), None)
    };
    Ok(CtrDReport {
        ctr_d: bracket.upper,
        delay,
        err,
        all_starts,
        tr_max,
        iterations: bracket.iterations,
        lower_bound: bracket.lower,
        starts,
        binding_pair,
    })
}
