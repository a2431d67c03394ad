use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A rate that must be strictly positive is not.
    #[error("positivity violation: {0} must be > 0 (got {1})")]
    PositivityViolation(&'static str, f64),

    /// A flagged standing assumption fails; the message names the inequality.
    #[error("assumption violation: {0}")]
    AssumptionViolation(String),

    /// A dispatch quantity sits on a case boundary (within tolerance).
    #[error("non-generic input: {0} = {1:e} is within tolerance of a case boundary")]
    NonGeneric(&'static str, f64),

    /// Transverse-rate sign pattern matches no case of the index tables.
    #[error("invalid sign pattern: {0}")]
    InvalidSignPattern(String),

    /// Monomial-map exponent matrix shape not handled by `preimage`.
    #[error("unsupported monomial map form: {0}")]
    UnsupportedForm(String),

    /// Parameter set outside every regime with an analytic n-index route.
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    /// Escape-sequence iteration hit the cap without reaching a decision.
    #[error("sequence cap {0} exceeded without decision for {1}")]
    CapExceeded(usize, &'static str),

    /// Rejection sampling exhausted its draw budget.
    #[error("witness search failed after {0} draws")]
    SearchFailed(usize),

    /// Planar coefficients do not yield a saddle/sink pair on the axis.
    #[error("no saddle pair: {0}")]
    NoSaddlePair(String),

    /// A field monomial breaks the required sign-change symmetry.
    #[error("equivariance violation: {0}")]
    EquivarianceViolation(String),

    /// Map identifier not defined for the given network or section.
    #[error("unknown map {0} at section {1}")]
    UnknownMap(String, String),

    /// A Monte-Carlo regression cell has too few points for a slope.
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    /// Trajectory norm exceeded the blow-up bound during integration.
    #[error("trajectory blow-up at t = {0}")]
    Blowup(f64),

    /// Malformed fixture or configuration data.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
