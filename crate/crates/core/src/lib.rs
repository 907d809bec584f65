//! Partial identification in Roy selection models.
//!
//! * [`probability`]: cell laws, joint laws and halfspace polytopes on the simplex
//! * [`binary`]: binary Roy model, with instrument or sector covariates
//! * [`generalized`]: unrestricted selection with an excluded instrument
//! * [`functional`]: continuous outcomes via empirical sub-distribution functions
//! * [`oracle`]: brute-force checks, response-type LP, witnesses and simulators
//! * [`inference`]: intersection-bounds confidence intervals
//!
//! Heavy loops go through [`par`], which uses rayon when the `parallel`
//! feature is on and falls back to plain iteration otherwise.

pub mod binary;
pub mod error;
pub mod extf64;
pub mod functional;
pub mod generalized;
pub mod inference;
pub mod oracle;
pub mod par;
pub mod probability;
pub mod rng;

pub use error::{Result, RoyError};
pub use functional::{OutcomeSample, Record, SubCdf};
pub use probability::{CellProbs, InstrumentPoint, InstrumentTable, IntervalBound, PotentialJoint, SimplexPolytope};
