use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use aeronet_core::kinematics::AngularRate;
use aeronet_core::topology::first_disconnection;
use aeronet_core::{
    build_link_timeline, ctr_d_report, ctr_f_report, ctr_report, generate_random_scenario, parse_scenario,
    run_experiment, DeploymentArea, Error, ExperimentPlan, Scenario,
};

/// Critical transmission range analysis for platforms on periodic flight paths.
///
/// Exit status: 0 on success, 2 when the network is disconnected or the
/// requested property cannot be met, 1 on bad input.
#[derive(Parser)]
#[command(name = "aeronet-ctr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the network stays connected at a transmission range.
    Check {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        tr: f64,
    },
    /// Critical transmission range.
    Ctr {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        err: f64,
    },
    /// Critical transmission range tolerating any one region failure.
    Ctrf {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        region_radius: f64,
        #[arg(long, default_value_t = 0.01)]
        err: f64,
    },
    /// Critical transmission range for connectivity with bounded delay.
    Ctrd {
        #[arg(long)]
        scenario: PathBuf,
        /// Delay bound in hours.
        #[arg(long, conflicts_with = "delay_periods", required_unless_present = "delay_periods")]
        delay: Option<f64>,
        /// Delay bound in periods of the scenario.
        #[arg(long)]
        delay_periods: Option<f64>,
        /// Require the bound from the start of every topology, not only the first.
        #[arg(long)]
        all_starts: bool,
        #[arg(long, default_value_t = 0.01)]
        err: f64,
    },
    /// Link up/down events at a transmission range.
    Timeline {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        tr: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        out: Format,
    },
    /// Random scenario with non-intersecting orbits, written as JSON.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        orbit_radius: f64,
        /// Angular rate in rad/h: `20`, `3/2`, `1/2pi` or a decimal.
        #[arg(long)]
        omega: AngularRate,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000.0)]
        width: f64,
        #[arg(long, default_value_t = 1000.0)]
        height: f64,
    },
    /// Run an experiment plan and write the summary table.
    Experiment {
        #[arg(long)]
        plan: PathBuf,
        /// Summary CSV (`value,metric,mean,stddev,trials,infeasible`).
        #[arg(long)]
        out: PathBuf,
        /// Optional per-trial CSV (`value,trial,metric,result`).
        #[arg(long)]
        trials_out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Outcome {
    Done,
    Failed,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Scenario, Error> {
    parse_scenario(&read(path)?)
}

fn emit<T: Serialize>(value: &T) -> Result<(), Error> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct CheckReport {
    tr: f64,
    connected: bool,
    disconnection: Option<aeronet_core::topology::Disconnection>,
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Check { scenario, tr } => {
            let s = load(&scenario)?;
            if !(tr >= 0.0) {
                return Err(Error::InvalidArgument(format!("tr must be non-negative, got {tr}")));
            }
            let disconnection = first_disconnection(&build_link_timeline(&s, tr));
            let connected = disconnection.is_none();
            emit(&CheckReport {
                tr,
                connected,
                disconnection,
            })?;
            Ok(if connected { Outcome::Done } else { Outcome::Failed })
        }
        Command::Ctr { scenario, err } => {
            emit(&ctr_report(&load(&scenario)?, err)?)?;
            Ok(Outcome::Done)
        }
        Command::Ctrf {
            scenario,
            region_radius,
            err,
        } => {
            emit(&ctr_f_report(&load(&scenario)?, region_radius, err)?)?;
            Ok(Outcome::Done)
        }
        Command::Ctrd {
            scenario,
            delay,
            delay_periods,
            all_starts,
            err,
        } => {
            let s = load(&scenario)?;
            let delay = match (delay, delay_periods) {
                (Some(d), _) => d,
                (None, Some(p)) => p * s.period(),
                (None, None) => unreachable!("clap requires one of the delay options"),
            };
            emit(&ctr_d_report(&s, delay, err, all_starts)?)?;
            Ok(Outcome::Done)
        }
        Command::Timeline { scenario, tr, out } => {
            let s = load(&scenario)?;
            if !(tr >= 0.0) {
                return Err(Error::InvalidArgument(format!("tr must be non-negative, got {tr}")));
            }
            let timeline = build_link_timeline(&s, tr);
            match out {
                Format::Csv => timeline.write_csv(io::stdout().lock())?,
                Format::Json => println!("{}", timeline.to_json()?),
            }
            Ok(Outcome::Done)
        }
        Command::Gen {
            n,
            orbit_radius,
            omega,
            seed,
            width,
            height,
        } => {
            let s = generate_random_scenario(n, orbit_radius, omega, DeploymentArea::new(width, height), seed)?;
            println!("{}", s.to_json()?);
            Ok(Outcome::Done)
        }
        Command::Experiment { plan, out, trials_out } => {
            let plan = ExperimentPlan::from_json(&read(&plan)?)?;
            let result = run_experiment(&plan)?;
            result.write_summary_csv(fs::File::create(out)?)?;
            if let Some(path) = trials_out {
                result.write_trials_csv(fs::File::create(path)?)?;
            }
            Ok(Outcome::Done)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(2),
        Err(e @ Error::Infeasible { .. }) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
