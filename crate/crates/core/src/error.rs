use alloc::string::String;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("probability space needs at least one atom")]
    EmptySpace,
    #[error("probability of atom {index} is {value}, must be strictly positive and finite")]
    NonPositiveProbability { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1 within 1e-12")]
    ProbabilitiesDoNotSumToOne { sum: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("length mismatch: expected {expected} atoms, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid order {0}: must be >= 1")]
    InvalidOrder(f64),
    #[error("exponent of atom {index} is {value}, must be >= 1")]
    InvalidExponent { index: usize, value: f64 },
    #[error("lambda must be strictly positive, got {0}")]
    NonPositiveLambda(f64),
    #[error("non-finite entry at position {0}")]
    NonFinite(usize),
    #[error("invalid cone: {0}")]
    InvalidCone(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("transfer map is flat around value {value}, cannot invert")]
    NotInvertible { value: f64 },
    #[error("no bracket found for value {value} within 200 doublings")]
    BracketingFailure { value: f64 },
    #[error("envelope scalar unbounded or undefined at atom {atom}")]
    UnboundedEnvelope { atom: usize },
    #[error("operation not supported for custom measures")]
    UnsupportedKind,
    #[error("unsupported instance: {0}")]
    UnsupportedInstance(String),
    #[error("weak duality violated: dual {dual} exceeds primal {primal}")]
    WeakDualityViolation { primal: f64, dual: f64 },
    #[error("candidate list is empty")]
    EmptyCandidates,
    #[error("trial count must be at least 1")]
    InvalidTrials,
}

pub type Result<T> = core::result::Result<T, Error>;
