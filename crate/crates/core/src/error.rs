use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input sample is empty")]
    EmptyInput,

    #[error("observation {index} is not a finite positive number: {value}")]
    InvalidObservation { index: usize, value: f64 },

    #[error("invalid record sample: {0}")]
    InvalidRecords(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least {needed} records, got {got}")]
    InsufficientRecords { needed: usize, got: usize },

    /// The bracket for the shape equation could not be made to straddle a root.
    #[error("shape solver left its range: bracket [{lo:e}, {hi:e}] after {expansions} expansions")]
    SolverRange { lo: f64, hi: f64, expansions: usize },

    #[error("shape solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("no table entry for n = {n}, statistic = {statistic}, level = {level}")]
    MissingTableEntry {
        n: u64,
        statistic: String,
        level: f64,
    },

    #[error("quadrature did not reach tolerance {tol:e} (error estimate {estimate:e})")]
    QuadratureFailure { tol: f64, estimate: f64 },

    #[error("line {line}: cannot parse {content:?} as a positive number")]
    Parse { line: usize, content: String },

    #[error("simulation for n = {n}: {source}")]
    Simulation {
        n: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
