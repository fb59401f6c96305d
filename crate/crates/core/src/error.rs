use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate parameters: k1 = k2 = 0 leaves no amplitude equation")]
    DegenerateParams,

    #[error("model parameters must be finite")]
    NonFiniteParams,

    #[error("no real amplitude: discriminant {discriminant}")]
    NoRealAmplitude { discriminant: f64 },

    #[error("branch unavailable: the amplitude equation has a single root")]
    BranchUnavailable,

    #[error("bad grid: {0}")]
    BadGrid(String),

    #[error("quadrature tolerance {tol:e} not met (error estimate {estimate:e})")]
    ToleranceNotMet { tol: f64, estimate: f64 },

    #[error("quadrature tolerance {0:e} outside (1e-14, 1e-4)")]
    InvalidTolerance(f64),

    #[error("closed form requested at kink s = {0}; use a one-sided limit")]
    AtKink(f64),

    #[error("residual point (t = {t}, x = {x}) lies within 1e-6 of a crest")]
    PointOnKink { t: f64, x: f64 },

    #[error("non-finite state at t = {time}")]
    NonFiniteState { time: f64 },

    #[error("time step {dt:e} exceeds CFL limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("speed estimate needs at least 3 records, got {0}")]
    InsufficientRecords(usize),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}
