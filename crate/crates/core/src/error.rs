use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("`{name}` = {value} is outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("Gamma function has a pole at {0}")]
    Pole(f64),
    #[error("{func}: unsupported parameters ({detail})")]
    Unsupported { func: &'static str, detail: String },
    #[error("no sign change found on {0}")]
    BracketNotFound(String),
    #[error("step size underflow at x = {0}")]
    StepUnderflow(f64),
    #[error("step budget of {0} exhausted")]
    MaxSteps(usize),
    #[error("quadrature did not converge (estimate {estimate}, error {error})")]
    Quadrature { estimate: f64, error: f64 },
    #[error("dt = {dt} exceeds the stability limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("integration failed: {0}")]
    Integration(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("profile is not monotone near r = {0}")]
    NonMonotone(f64),
    #[error("not enough snapshots: {0}")]
    InsufficientSnapshots(String),
    #[error("limit did not converge: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, range: &'static str) -> Error {
    Error::Domain { name, value, range }
}
