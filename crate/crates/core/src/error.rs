use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate circuit: total series impedance {0:.3e} pu is numerically zero")]
    DegenerateCircuit(f64),

    #[error("invalid current thresholds: i_max ({i_max}) must exceed i_th ({i_th}) and i_th must be positive")]
    InvalidThresholds { i_max: f64, i_th: f64 },

    #[error("implicit current solve did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("current level {level} pu is never reached (arccos argument {argument:.6} > 1)")]
    Unreachable { level: f64, argument: f64 },

    #[error("current level {level} pu is exceeded at every angle (arccos argument {argument:.6} < -1)")]
    AlwaysExceeded { level: f64, argument: f64 },

    #[error("apparent impedance is at infinity for a power angle of 0 (mod 2π)")]
    PoleAtZero,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("record covers {available:.3} s after the disturbance, at least {required:.3} s needed")]
    InsufficientHorizon { available: f64, required: f64 },

    #[error("simulation failed at t = {t:.6} s: {source}")]
    Simulation {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("scenario validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("unknown case id `{0}`")]
    UnknownCase(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
