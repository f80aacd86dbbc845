use thiserror::Error;

use crate::regime::RegimeInterval;

/// Errors raised by the estimators, the test and the threshold search.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid argument (non-finite input, bad dimension, parameter out of range).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty regime {interval}")]
    EmptyRegime { interval: RegimeInterval },

    /// A regime holds fewer observations than the configured minimum.
    #[error("regime {interval} has {count} observations, at least {required} required")]
    ThinRegime {
        interval: RegimeInterval,
        count: usize,
        required: usize,
    },

    /// Splitting a regime at a candidate leaves a side with too few observations.
    #[error("thin split at tau = {tau}")]
    ThinSplit { tau: f64 },

    #[error("degenerate variance at tau = {tau}")]
    DegenerateVariance { tau: f64 },

    #[error("no viable candidates in regime {interval}")]
    NoViableCandidates { interval: RegimeInterval },

    #[error("every regime of the partition was skipped")]
    AllRegimesSkipped,

    /// No admissible grid point in the searched interval.
    #[error("search error: {0}")]
    Search(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// True for errors caused by bad arguments rather than by the data.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
