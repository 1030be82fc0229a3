use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid of {grid} points cannot resolve {n_modes} modes (need at least {needed})")]
    GridTooSmall { grid: usize, n_modes: usize, needed: usize },

    #[error("field contains non-finite coefficient at k = {k}")]
    NonFiniteField { k: i64 },

    #[error("unsupported derivative order {0} (expected 1 or 2)")]
    UnsupportedOrder(u32),

    #[error("divisor too small: min |g| = {min_abs:e} at x = {x}")]
    DivisorTooSmall { min_abs: f64, x: f64 },

    #[error("evaluation at Im z = {im} overflows with {n_modes} modes")]
    Overflow { im: f64, n_modes: usize },

    /// Step size fell below `h_min`; the solver has most likely hit a singularity.
    #[error("step size {h:e} below minimum at t = {t}: stiffness or singularity")]
    StiffnessOrSingularity { t: Complex64, h: f64, state: Vec<Complex64> },

    #[error("maximum number of steps ({max_steps}) exceeded at t = {t}")]
    MaxStepsExceeded { t: Complex64, max_steps: usize, state: Vec<Complex64> },

    #[error("right-hand side returned non-finite values at t = {t}")]
    NonFiniteRhs { t: Complex64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("argument outside the domain of {formula}: {detail}")]
    Domain { formula: &'static str, detail: String },

    #[error("quadrature did not converge (estimated error {estimate:e})")]
    QuadratureNonConvergence { estimate: f64 },

    #[error("no sign change of the observable in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("only {usable} usable modes in the fit window (need {needed})")]
    FitWindowTooShort { usable: usize, needed: usize },

    #[error("fit attempted too far from the event: {0}")]
    FitOutOfRange(String),

    #[error("event was never reached before t = {t}")]
    EventNotReached { t: f64 },
}

impl Error {
    /// Whether the integrator may recover from this failure by shrinking the step.
    pub fn is_step_recoverable(&self) -> bool {
        matches!(self, Error::DivisorTooSmall { .. } | Error::NonFiniteRhs { .. })
    }
}
