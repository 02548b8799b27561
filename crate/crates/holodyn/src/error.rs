use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynError {
    #[error("root finder did not converge after {iterations} iterations (residual {residual:.3e})")]
    RootFinder { iterations: usize, residual: f64 },
    #[error("point {0} is not fixed by the map (|f(z)-z| = {1:.3e})")]
    NotFixed(String, f64),
    #[error("degree cap exceeded: iterate would have degree {degree}, cap is {cap}")]
    DegreeCap { degree: usize, cap: usize },
    #[error("truncation order {0} exceeds configured cap {1}")]
    OrderCap(usize, usize),
    #[error("{0}")]
    BadMap(String),
    #[error("multiplier class {0} is not handled by this chart; {1}")]
    WrongClass(String, String),
    #[error("orbit did not converge within {0} iterations; point may be outside the basin")]
    NotInBasin(usize),
    #[error("iteration cap {0} exceeded")]
    IterationCap(usize),
    #[error("no critical point found in the basin; numerical failure")]
    NoCriticalPoint,
    #[error("point outside chart domain: {0}")]
    Domain(String),
    #[error("{0}")]
    Parabolic(String),
    #[error("precision exhausted: certified {certified} of {requested} requested terms")]
    Precision { certified: usize, requested: usize },
    #[error("invalid gap schedule: {0}")]
    BadSchedule(String),
    #[error("divisor bound diverges: {0}")]
    BoundNotFinite(String),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, DynError>;
