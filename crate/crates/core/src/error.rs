use thiserror::Error;

/// Everything that can go wrong in the core library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed number: {0:?}")]
    MalformedNumber(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("point {0} is outside [0, 1]")]
    OutOfDomain(String),
    #[error("slope {0} is outside (sqrt2, 2]")]
    InvalidSlope(String),
    #[error("kappa = {kappa} has kappa - 3 odd; the map is renormalizable")]
    Renormalizable { kappa: usize },
    #[error("no i in 3..={depth} with c_i <= c; increase the orbit depth")]
    KappaBeyondDepth { depth: usize },
    #[error("critical orbit hits c at index {index} (certified: {certified})")]
    PreperiodicOrbit { index: usize, certified: bool },
    #[error("anchor lies outside the arc window")]
    AnchorOutside,
    #[error("anchor hits the critical point during pullback")]
    AnchorAtFold,
    #[error("anchor {0} is not a fixed point of the map")]
    AnchorNotFixed(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("center lies outside the open window")]
    CenterOutside,
    #[error("epsilon ladder exhausted without a clean rung")]
    NoEpsilonFound,
    #[error("not found: {0}")]
    NotFound(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
