//! Crate-wide error type.

use crate::dense::Mat;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// An argument is outside the operation's domain (z <= 0, empty level list, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Input data violates a stated precondition (stochasticity, shape, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// The nonzero pattern of a matrix has the wrong structure (reducible, ...).
    #[error("structure error: {0}")]
    Structure(String),

    /// Power iteration ran out of budget; `estimate` is the best bracket midpoint.
    #[error("power iteration did not converge after {iterations} iterations (estimate {estimate}, bracket width {width:.3e})")]
    PowerIterationLimit {
        iterations: usize,
        estimate: f64,
        width: f64,
    },

    /// A fixed-point solve hit its iteration budget; `last` is the final iterate.
    #[error("{op} hit the iteration limit after {iterations} iterations (last step {diff:.3e}); returning best iterate")]
    SolverLimit {
        op: &'static str,
        iterations: usize,
        diff: f64,
        last: Mat,
    },

    /// Fixed-point iterates grew past the overflow guard: no minimal nonnegative
    /// solution exists (the spectral infimum of the triplet exceeds one).
    #[error("{op} diverged past {guard:.1e}: no nonnegative solution (spectral infimum above one)")]
    Diverged { op: &'static str, guard: f64 },

    /// A Neumann-series stage was asked to invert I - H with spr(H) at or above 1.
    #[error("near-singular stage: spr(H) = {spectral_radius} is too close to 1")]
    NearSingular { spectral_radius: f64 },

    /// chi(z) = 1 has no real roots because the infimum of chi exceeds one.
    #[error("no real roots of chi(z) = 1: gamma_star = {gamma_star} > 1")]
    NoRoot { gamma_star: f64 },

    /// The spectral region {s : chi(e^s) <= 1} is empty.
    #[error("empty spectral region: gamma_star = {gamma_star} > 1")]
    EmptyRegion { gamma_star: f64 },

    /// Values vanished below the working precision of a fit window.
    #[error("underflow: {0}")]
    Underflow(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
