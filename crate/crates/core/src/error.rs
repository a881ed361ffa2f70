use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("radius {r} is outside the metric domain (r >= {r_min} required)")]
    OutOfDomain { r: f64, r_min: f64 },

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("tail of r(phi - 1) does not converge (estimate {estimate}, error bar {error})")]
    TailNotConvergent { estimate: f64, error: f64 },

    #[error("no normalized harmonic function exists: {0}")]
    NoNormalization(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("level {t} is outside the admissible range")]
    OutOfRange { t: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ODE integrator failed near t = {t} (step {step:e})")]
    StepFailure { t: f64, step: f64 },

    #[error("iterative solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("excision radius {r0} is smaller than two grid spacings ({h})")]
    BadExcision { r0: f64, h: f64 },

    #[error(
        "far-field fit unstable: shell estimates {inner} and {outer} disagree by more than 5%"
    )]
    FitUnstable { inner: f64, outer: f64 },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
