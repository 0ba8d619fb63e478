use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NumericsError {
    #[error("quadrature did not converge: partial value {value:e}, error estimate {error:e}")]
    NotConverged { value: f64, error: f64 },
    #[error("integrand not decayed at truncation point {endpoint}: |f| = {magnitude:e}")]
    TailNotDecayed { endpoint: f64, magnitude: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("bracket invalid: h(lo) = {f_lo:e}, h(hi) = {f_hi:e}")]
    BracketInvalid { f_lo: f64, f_hi: f64 },
    #[error("need at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("nonpositive entry {value:e} at index {index}; take magnitudes first")]
    NonPositive { index: usize, value: f64 },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
}

/// Errors raised by the model-level modules.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("table build failed at eta = {eta}: {source}")]
    Table { eta: f64, source: NumericsError },
    #[error("fixed point for eta did not contract at tau = {tau}; last iterate {last}")]
    NoContraction { tau: f64, last: f64 },
    #[error("rho - tau still drifting at tau_max ({drift:e}); enlarge tau_max")]
    LimitNotConverged { drift: f64 },
    #[error("tau = {tau} outside solved grid [{lo}, {hi}]; extend the grid")]
    TauOutOfRange { tau: f64, lo: f64, hi: f64 },
    #[error("B_Omega + C_Omega = {value:e} below floor at eta = {eta}")]
    DenominatorFloor { eta: f64, value: f64 },
    #[error("no contact in horizon")]
    NoContact,
    #[error("newton iteration for front velocities failed after {retries} dt halvings: residual {residual:e}")]
    NewtonDiverged { retries: usize, residual: f64 },
    #[error("fronts too close for the sharp-interface step: gap {gap:e}")]
    FrontsTooClose { gap: f64 },
    #[error("gradient extraction too noisy at t = {t}; refine the grid")]
    NoisyGradient { t: f64 },
    #[error("plateaus not converged (spread {spread:e}); widen the tau range")]
    PlateauNotConverged { spread: f64 },
    #[error("non-finite state at t = {t}: {what}")]
    Blowup { t: f64, what: String },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
