//! Connectivity analysis for networks of platforms flying predictable
//! periodic paths: link timelines, the critical transmission range (CTR),
//! its region-fault-tolerant variant and its delay-tolerant variant.

pub mod dtn;
pub mod error;
pub mod experiment;
pub mod fault;
pub mod kinematics;
pub mod scenario;
pub mod timeline;
pub mod topology;

pub use dtn::{
    compute_ctr_d, connected_with_delay, connected_with_delay_all_starts, ctr_d_report, d_max, superimposed_connected,
    TopologySequence,
};
pub use error::{Error, Result};
pub use experiment::{run_experiment, ExperimentPlan, ExperimentResult, Metric, SweepVariable};
pub use fault::{
    compute_ctr_f, coverage_timeline, ctr_f_report, enumerate_fault_points, existence_intervals, fault_point_location,
    region_based_connectivity, static_intervals, FaultAnalysis, FaultPoint, FaultPointKind, Rbc,
};
pub use kinematics::{AnalysisHorizon, AngularRate, OrbitSpec, ParametricPath, Point2, Trajectory};
pub use scenario::{generate_random_scenario, parse_scenario, DeploymentArea, Scenario};
pub use timeline::{build_link_timeline, merge_timelines, EventTimeline};
pub use topology::{always_connected, compute_ctr, ctr_report, is_connected, Snapshot};
