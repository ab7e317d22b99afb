use std::io;

use thiserror::Error;

use crate::map::CriticalPoint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received a value outside its domain
    /// (non-finite numbers, negative forcing, empty windows, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The operation is not defined in this forcing regime.
    #[error("domain error: {0}")]
    Domain(String),

    /// `b == 1`: the two critical points have merged into the single
    /// degenerate point θ = π.
    #[error("degenerate critical point at theta = {}", .0.point.value())]
    DegenerateCritical(CriticalPoint),

    #[error("Newton iteration did not converge after {iterations} steps (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("claimed period {claimed} but the cycle closes after {actual} steps")]
    PeriodMismatch { claimed: usize, actual: usize },

    #[error("no sign change of the relation residual in [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("continuation stalled at b = {b}: could not restore the first relation")]
    ContinuationStall { b: f64 },

    #[error("no second relation found for b in [{b_lo}, {b_hi}]")]
    NoSecondRelation { b_lo: f64, b_hi: f64 },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("perturbation search failed: {0}")]
    SearchFailed(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Stable failure name, printed by the command-line front end.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Domain(_) => "DomainError",
            Error::DegenerateCritical(_) => "DegenerateCritical",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::PeriodMismatch { .. } => "PeriodMismatch",
            Error::NoSignChange { .. } => "NoSignChange",
            Error::ContinuationStall { .. } => "ContinuationStall",
            Error::NoSecondRelation { .. } => "NoSecondRelation",
            Error::InvalidRegion(_) => "InvalidRegion",
            Error::SearchFailed(_) => "SearchFailed",
            Error::Io(_) => "IoError",
        }
    }
}
