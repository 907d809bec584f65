//! Estimation from micro-data and confidence intervals for the bounds.
//!
//! Cell probabilities are estimated per instrument value. A single critical
//! value from a studentized max-statistic bootstrap inflates every infimum and
//! deflates every supremum before the closed-form bounds are evaluated.

mod iqr_ci;
mod theta;

pub use iqr_ci::{iqr_ci, IqrCi, IqrCiOptions};
pub use theta::{
    assemble_cis, att0_ci, att1_ci, critical_value, critical_value_moments, estimate_theta, order_statistic,
    CiReport, ConfidenceInterval, CriticalValue, ThetaVector,
};

/// Default number of bootstrap replications.
pub const DEFAULT_BOOTSTRAP: usize = 999;
/// Default confidence level.
pub const DEFAULT_LEVEL: f64 = 0.95;
