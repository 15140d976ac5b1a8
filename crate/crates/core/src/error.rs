use thiserror::Error;

/// Errors produced by the analysis engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("time {time} is outside the trajectory domain [{start}, {end}]")]
    OutsideDomain { time: f64, start: f64, end: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("timelines cover different horizons or node sets")]
    HorizonMismatch,

    #[error("fault point {fault_point} does not exist at time {time}")]
    FaultPointAbsent { fault_point: usize, time: f64 },

    #[error("infeasible: {what} not satisfied even at the maximum transmission range {tr_max}")]
    Infeasible { what: String, tr_max: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("scenario error at `{path}`: {message}")]
    Scenario { path: String, message: String },

    #[error("could not place {placed} of {requested} non-intersecting orbits after {attempts} attempts")]
    Packing {
        placed: usize,
        requested: usize,
        attempts: usize,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn scenario(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Scenario {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
