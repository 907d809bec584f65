//! Continuous and mixed outcomes.
//!
//! All bounds are functionals of the empirical sub-distribution functions
//! `F̲_d(y) = P(Y <= y, D = d)` held by [`SubCdf`].

mod bounds;
mod iqr;
mod sample;
mod sets;
mod subcdf;

pub use bounds::{interval_lower_bound, joint_set_bounds, mobility_upper, peterson_bounds, peterson_rectangle_upper};
pub use iqr::{iqr_bounds, iqr_objective, observed_iqr, proposition1_check, Prop1Report};
pub use sample::{OutcomeSample, Record};
pub use sets::{upper_lower_sets, Interval, IntervalUnion, Rect, RectUnion, UpperLowerSets};
pub use subcdf::{build_subcdf, SubCdf};
