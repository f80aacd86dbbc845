//! Nonparametric threshold regression: kernel estimators restricted to
//! regimes of an observed threshold variable, a sequential test for the
//! number of thresholds, and sequential SSR estimation of their values.

pub mod error;
pub mod inference;
pub mod kernel;
pub mod linalg;
pub mod montecarlo;
pub mod normal;
pub mod regime;
pub mod search;

pub use error::{Error, Result};
pub use kernel::{KernelConfig, WeightBox};
pub use regime::{RegimeInterval, RegimePartition, Sample};
pub use search::{detect, DetectFailure, DetectionResult, SearchConfig};
