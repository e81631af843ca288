use thiserror::Error;

/// Errors raised by the numerical core. Values are reported as `f64` regardless of the scalar type.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("broken PT phase: gain {gain} must be smaller than coupling {coupling}")]
    BrokenPhase { gain: f64, coupling: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("relative phase undefined at tau = {tau}: an amplitude vanishes")]
    PhaseUndefined { tau: f64 },

    #[error("{0} is undefined for zero gain")]
    Undefined(&'static str),

    #[error("PT amplitude vanishes at tau = {tau}")]
    AmplitudeVanishes { tau: f64 },

    #[error("coupling {value} exceeds divergence cap {cap} at tau = {tau}")]
    DivergencePending { tau: f64, value: f64, cap: f64 },

    #[error("tau = {tau} lies past the analytic breakdown time")]
    PastBreakdown { tau: f64 },

    #[error("step size {step} underflowed at tau = {tau}")]
    StepUnderflow { tau: f64, step: f64 },

    #[error("non-finite state at tau = {tau}")]
    NonFiniteState { tau: f64 },

    #[error("tau = {tau} outside schedule span [{start}, {end}]")]
    OutOfSpan { tau: f64, start: f64, end: f64 },

    #[error("no bracket: both ends of [{lo}, {hi}] classify as {verdict}")]
    NoBracket { lo: f64, hi: f64, verdict: &'static str },

    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),

    #[error("worker pool: {0}")]
    Pool(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
