use thiserror::Error;

use crate::radial::RadialProfile;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("kernel evaluated at coincident points")]
    CoincidentPoints,

    #[error("point at distance {norm} lies outside the open disc of radius {radius}")]
    OutsideDisc { norm: f64, radius: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("integration diverged at r = {radius} (amplitude {amplitude})")]
    Divergence { amplitude: f64, radius: f64 },

    #[error("no amplitude in [{a_min}, {a_max}] has its first zero at r = {target}")]
    NoSolutionInRange { target: f64, a_min: f64, a_max: f64 },

    #[error("quadratic term Q = {0} is not positive, no Nehari projection exists")]
    NoProjection(f64),

    #[error("log moment {0} <= 1: no disc radius realizes this normalized solution")]
    Unscalable(f64),

    #[error("could not bracket the normalized radius for R = {radius}")]
    NoBracket { radius: f64 },

    #[error("iteration limit {iterations} reached")]
    IterationLimit { iterations: usize, best: Box<RadialProfile> },

    #[error("eigenvalue iteration failed: {0}")]
    Eigen(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
