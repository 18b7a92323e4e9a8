use thiserror::Error;

use crate::mappings::{FeasibilityReport, ParamViolation};

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the library. The CLI maps each category onto an exit code.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("structure violation: {0}")]
    Structure(String),

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("decomposition failed: {0}")]
    Decomposition(&'static str),

    #[error("no dissipative mapping exists: {0}")]
    Infeasible(FeasibilityReport),

    #[error("invalid family parameters: {}", fmt_violations(.0))]
    InvalidParams(Vec<ParamViolation>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("frequency w = {w} lies on the spectrum (resolvent condition {cond:e})")]
    OnSpectrum { w: f64, cond: f64 },

    #[error("no admissible candidate: {0}")]
    NoCandidate(String),

    #[error("radius is not finite: {0}")]
    NotFinite(String),

    #[error("objective is not finite anywhere on the frequency grid")]
    NoMinimum,

    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

fn fmt_violations(v: &[ParamViolation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
