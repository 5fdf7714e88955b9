use thiserror::Error;

/// Errors raised anywhere in the averaging pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integration exhausted the step budget ({max_steps} steps) at t = {t}")]
    StepBudgetExhausted { max_steps: usize, t: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("non-finite right-hand side at t = {t}")]
    NonFiniteField { t: f64 },

    #[error("domain guard violated at t = {t}: {reason}")]
    GuardViolation { t: f64, reason: String },

    #[error("evaluation at {x} is outside the covered interval [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (last change {last_change:e})")]
    QuadratureNotConverged { tol: f64, last_change: f64 },

    #[error("non-finite function value at {x}")]
    NonFiniteValue { x: f64 },

    #[error("state is outside the elliptic prograde domain: {0}")]
    OutsideDomain(String),

    #[error("eccentricity {0} is outside the open interval (0, 1)")]
    Eccentricity(f64),

    #[error("radius vector {r:?} leaves the cap region {cap:?}")]
    CapViolation { r: Vec<f64>, cap: Vec<f64> },

    #[error("fundamental matrix lost invertibility at tau = {tau} (det = {det:e})")]
    SingularFundamentalMatrix { tau: f64, det: f64 },

    #[error("fixed-point iteration did not converge in {iterations} iterations (residual {residual:e})")]
    FixedPointNotConverged { iterations: usize, residual: f64 },

    #[error("averaged flow leaves the domain at tau = {tau}")]
    AveragedFlowLeftDomain { tau: f64 },

    #[error("estimator blow-up at tau = {tau}: {reason}")]
    EstimatorBlowUp { tau: f64, reason: String },

    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("mismatched horizons: {0}")]
    MismatchedHorizons(String),
}

pub type Result<T> = std::result::Result<T, Error>;
