use thiserror::Error;

/// Errors raised by the convolution engine and its supporting modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("series has nonzero constant term {0:e}; expected zero")]
    NonzeroConstantTerm(f64),

    #[error("linear coefficient {0:e} is too small to invert")]
    SingularLinearTerm(f64),

    #[error("linear coefficient vanishes; compositional roots are not unique")]
    ZeroLinearTerm,

    #[error("branch does not satisfy branch^n = lambda (residual {residual:e})")]
    BadBranch { residual: f64 },

    #[error("root recursion is resonant at order {order}")]
    Resonance { order: usize },

    #[error("truncation orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid transform point: {0}")]
    InvalidPoint(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("evaluation point hits a pole (|1 - z t| = {0:e})")]
    PoleHit(f64),

    #[error("Hankel rank test failed: {0}")]
    RankMismatch(String),

    #[error("recovered atoms violate the domain: {0}")]
    DomainViolation(String),

    #[error("intermediate point left the domain: {0}")]
    DomainEscape(String),

    #[error("moment order {order} needs dimension {needed}, scene has {dim}")]
    TruncationExceeded { order: usize, needed: usize, dim: usize },

    #[error("unknown operator `{0}`")]
    UnknownOperator(String),

    #[error("invalid variable: {0}")]
    InvalidVariable(String),

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("flow left the domain at tau = {tau}: {detail}")]
    DomainExit { tau: f64, detail: String },

    #[error("integration exceeded {0} steps")]
    StepLimit(usize),

    #[error("rk and euler_exp disagree by {diff:e} at tau = {tau}")]
    SchemeDisagreement { tau: f64, diff: f64 },

    #[error("first moment is zero; no semigroup root exists (absorbing regime)")]
    ZeroFirstMoment,

    #[error("level {level} does not recompose (error {error:e})")]
    RecompositionFailure { level: usize, error: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by malformed or out-of-contract input, as
    /// opposed to numerical failures during a computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NonzeroConstantTerm(_)
                | Error::BadBranch { .. }
                | Error::OrderMismatch(..)
                | Error::InvalidMeasure(_)
                | Error::InvalidPoint(_)
                | Error::DomainMismatch(_)
                | Error::UnknownOperator(_)
                | Error::InvalidVariable(_)
                | Error::InvalidGenerator(_)
                | Error::TruncationExceeded { .. }
                | Error::ZeroFirstMoment
                | Error::Parse(_)
                | Error::Io(_)
        )
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonzeroConstantTerm(_) => "NonzeroConstantTerm",
            Error::SingularLinearTerm(_) => "SingularLinearTerm",
            Error::ZeroLinearTerm => "ZeroLinearTerm",
            Error::BadBranch { .. } => "BadBranch",
            Error::Resonance { .. } => "Resonance",
            Error::OrderMismatch(..) => "OrderMismatch",
            Error::InvalidMeasure(_) => "InvalidMeasure",
            Error::InvalidPoint(_) => "InvalidPoint",
            Error::DomainMismatch(_) => "DomainMismatch",
            Error::PoleHit(_) => "PoleHit",
            Error::RankMismatch(_) => "RankMismatch",
            Error::DomainViolation(_) => "DomainViolation",
            Error::DomainEscape(_) => "DomainEscape",
            Error::TruncationExceeded { .. } => "TruncationExceeded",
            Error::UnknownOperator(_) => "UnknownOperator",
            Error::InvalidVariable(_) => "InvalidVariable",
            Error::InvalidGenerator(_) => "InvalidGenerator",
            Error::DomainExit { .. } => "DomainExit",
            Error::StepLimit(_) => "StepLimit",
            Error::SchemeDisagreement { .. } => "SchemeDisagreement",
            Error::ZeroFirstMoment => "ZeroFirstMoment",
            Error::RecompositionFailure { .. } => "RecompositionFailure",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
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

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
