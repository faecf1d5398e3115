use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("quadrature did not converge: achieved error estimate {achieved:.3e}, requested {requested:.3e}")]
    QuadratureNotConverged { achieved: f64, requested: f64 },

    #[error("integrator step size underflow at t = {t:.6e} (h = {h:.3e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("right-hand side produced a non-finite value at t = {t:.6e}")]
    NonFiniteState { t: f64 },

    #[error("integrator exceeded {max_steps} steps at t = {t:.6e}")]
    TooManySteps { t: f64, max_steps: usize },

    #[error("ring supports overlap: rings {first} and {second} violate scale separation")]
    SeparationViolated { first: usize, second: usize },

    #[error("evaluation point (r={r:.6e}, z={z:.6e}) lies inside the support of ring {ring}")]
    PointOnSupport { r: f64, z: f64, ring: usize },

    #[error("trajectory has no sample at t = {t:.6e}")]
    NoSampleAtTime { t: f64 },

    #[error("insufficient fit range: {reason}")]
    InsufficientFitRange { reason: String },

    #[error("grid resolution insufficient: refinement changed the result by {rel_change:.3e} (tolerance {tol:.3e})")]
    GridResolution { rel_change: f64, tol: f64 },

    #[error("run {index} (m = {m}) did not inflate within t_max = {t_max:.6e}")]
    NoInflation { index: usize, m: usize, t_max: f64 },

    #[error("config error at {location}: {reason}")]
    Config { location: String, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
