//! Seeded Monte Carlo sweeps over random scenarios.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtn::compute_ctr_d;
use crate::error::{Error, Result};
use crate::fault::compute_ctr_f;
use crate::kinematics::AngularRate;
use crate::scenario::{generate_with_rng, DeploymentArea, Scenario};
use crate::topology::compute_ctr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    NodeCount,
    RegionRadius,
    /// Delay in periods of the scenario.
    Delay,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "snake_case")]
pub enum Metric {
    Ctr,
    CtrF {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        region_radius: Option<f64>,
    },
    CtrD {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        delay_periods: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseParameters {
    pub node_count: usize,
    pub orbit_radius: f64,
    pub omega: AngularRate,
    pub region_radius: f64,
    pub delay_periods: f64,
    pub area: DeploymentArea,
    pub err: f64,
    #[serde(default = "default_all_starts")]
    pub all_starts: bool,
}

fn default_all_starts() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub sweep: SweepVariable,
    pub values: Vec<f64>,
    pub trials_per_value: usize,
    pub base: BaseParameters,
    pub metrics: Vec<Metric>,
    pub rng_seed: u64,
}

/// Mean and spread of one metric at one sweep value. Infeasible trials are
/// left out of the statistics and counted separately.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub value: f64,
    pub metric: String,
    pub mean: Option<f64>,
    pub stddev: Option<f64>,
    pub trials: usize,
    pub infeasible: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub value: f64,
    pub trial: usize,
    pub metric: String,
    /// `None` when the trial was infeasible.
    pub result: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub summary: Vec<SummaryRow>,
    pub trials: Vec<TrialRow>,
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let plan: ExperimentPlan = serde_path_to_error::deserialize(&mut *de).map_err(|e| {
            let path = e.path().to_string();
            Error::scenario(path, e.into_inner().to_string())
        })?;
        de.end().map_err(|e| Error::scenario("document", e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if self.values.is_empty() {
            return bad("values must not be empty");
        }
        if self.trials_per_value == 0 {
            return bad("trials_per_value must be at least 1");
        }
        if self.metrics.is_empty() {
            return bad("at least one metric is required");
        }
        if !(self.base.err > 0.0) {
            return bad("err must be positive");
        }
        for &v in &self.values {
            let ok = match self.sweep {
                SweepVariable::NodeCount => v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64,
                SweepVariable::RegionRadius => v > 0.0 && v.is_finite(),
                SweepVariable::Delay => v >= 0.0 && v.is_finite(),
            };
            if !ok {
                return bad(&format!("sweep value {v} is not valid for {:?}", self.sweep));
            }
        }
        if self.trials_per_value > u32::MAX as usize {
            return bad("too many trials");
        }
        Ok(())
    }

    fn node_count(&self, value: f64) -> usize {
        match self.sweep {
            SweepVariable::NodeCount => value as usize,
            _ => self.base.node_count,
        }
    }

    /// The scenario of one trial. Its random stream depends only on the seed,
    /// the node count and the trial index, so sweeps over region radius or
    /// delay evaluate every value on the same scenarios.
    pub fn scenario(&self, value: f64, trial: usize) -> Result<Scenario> {
        let n = self.node_count(value);
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(((n as u64) << 32) | trial as u64);
        let b = &self.base;
        generate_with_rng(&mut rng, n, b.orbit_radius, b.omega, b.area)
    }

    fn label(&self, metric: &Metric) -> String {
        match *metric {
            Metric::Ctr => "ctr".into(),
            Metric::CtrF { region_radius: Some(r) } => format!("ctr_f(R={r})"),
            Metric::CtrF { region_radius: None } => "ctr_f".into(),
            Metric::CtrD { delay_periods: Some(d) } => format!("ctr_d(D={d}P)"),
            Metric::CtrD { delay_periods: None } => "ctr_d".into(),
        }
    }

    fn evaluate(&self, scenario: &Scenario, value: f64, metric: &Metric) -> Result<Option<f64>> {
        let b = &self.base;
        let outcome = match *metric {
            Metric::Ctr => compute_ctr(scenario, b.err),
            Metric::CtrF { region_radius } => {
                let r = region_radius.unwrap_or(match self.sweep {
                    SweepVariable::RegionRadius => value,
                    _ => b.region_radius,
                });
                compute_ctr_f(scenario, r, b.err)
            }
            Metric::CtrD { delay_periods } => {
                let periods = delay_periods.unwrap_or(match self.sweep {
                    SweepVariable::Delay => value,
                    _ => b.delay_periods,
                });
                compute_ctr_d(scenario, periods * scenario.period(), b.err, b.all_starts)
            }
        };
        match outcome {
            Ok(v) => Ok(Some(v)),
            Err(Error::Infeasible { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Runs every (value, trial) pair, in parallel, and tabulates the results in
/// plan order.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentResult> {
    plan.validate()?;
    let jobs: Vec<(f64, usize)> = plan
        .values
        .iter()
        .flat_map(|&v| (0..plan.trials_per_value).map(move |t| (v, t)))
        .collect();
    let outcomes: Vec<Vec<Option<f64>>> = jobs
        .par_iter()
        .map(|&(value, trial)| {
            let scenario = plan.scenario(value, trial)?;
            plan.metrics
                .iter()
                .map(|m| plan.evaluate(&scenario, value, m))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut trials = Vec::new();
    for (&(value, trial), results) in jobs.iter().zip(&outcomes) {
        for (metric, result) in plan.metrics.iter().zip(results) {
            trials.push(TrialRow {
                value,
                trial,
                metric: plan.label(metric),
                result: *result,
            });
        }
    }

    let mut summary = Vec::new();
    for (vi, &value) in plan.values.iter().enumerate() {
        let block = &outcomes[vi * plan.trials_per_value..(vi + 1) * plan.trials_per_value];
        for (mi, metric) in plan.metrics.iter().enumerate() {
            let ok: Vec<f64> = block.iter().filter_map(|r| r[mi]).collect();
            let (mean, stddev) = mean_and_stddev(&ok);
            summary.push(SummaryRow {
                value,
                metric: plan.label(metric),
                mean,
                stddev,
                trials: ok.len(),
                infeasible: block.len() - ok.len(),
            });
        }
    }
    Ok(ExperimentResult { summary, trials })
}

/// Mean and sample standard deviation (0 for a single value).
fn mean_and_stddev(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (Some(mean), Some(var.sqrt()))
}

impl ExperimentResult {
    /// Summary table with columns `value,metric,mean,stddev,trials,infeasible`.
    /// Statistics of a metric with no feasible trial are left empty.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.summary {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// One row per trial and metric: `value,trial,metric,result`.
    pub fn write_trials_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.trials {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn mean(&self, value: f64, metric: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.value == value && r.metric == metric)
            .and_then(|r| r.mean)
    }
}
