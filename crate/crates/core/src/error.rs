use thiserror::Error;

/// Errors raised while building or solving a cooling model.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("operator `{name}` is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { name: String, deviation: f64 },

    #[error("singular or ill-conditioned system ({context}), condition estimate {condition:.3e}")]
    Singular { context: String, condition: f64 },

    #[error("resonance at harmonic {harmonic}: shifted block is singular (condition {condition:.3e})")]
    Resonance { harmonic: i64, condition: f64 },

    #[error("harmonic truncation did not converge up to N_h = {ceiling}: relative changes {trace:?}")]
    TruncationNotConverged { ceiling: usize, trace: Vec<(usize, f64)> },

    #[error("self-consistent displacement did not converge after {iterations} iterations (last {last}, residual {residual:.3e})")]
    DisplacementNotConverged {
        iterations: usize,
        last: num_complex::Complex64,
        residual: f64,
    },

    #[error("integrator step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("unphysical heating rate {value:.3e} at r = {r}")]
    NonPositiveHeating { r: f64, value: f64 },

    #[error("exponent overflow in equilibrium distribution at r = {r}")]
    ExponentOverflow { r: f64 },

    #[error("radius {r} lies outside the rate curve coverage [{lo}, {hi}]")]
    OutsideCoverage { r: f64, lo: f64, hi: f64 },

    #[error("distribution became negative ({value:.3e}) at r = {r}, t = {t}")]
    NegativeDensity { r: f64, t: f64, value: f64 },

    #[error("rate curve rejected: {failed} of {total} points failed (first: {first})")]
    CurveRejected { failed: usize, total: usize, first: String },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
