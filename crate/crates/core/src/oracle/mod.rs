//! Independent checks built from first principles, plus data generators.
//!
//! * [`artstein`]: identified sets from all subset inequalities of a random
//!   correspondence
//! * [`lp`] and [`response`]: the generalized model as a linear program over
//!   response types
//! * [`witness`]: explicit structures attaining bound endpoints
//! * [`simulate`]: Roy and generalized-selection data generators

pub mod artstein;
pub mod lp;
pub mod response;
pub mod simulate;
pub mod witness;

pub use artstein::{artstein_set, artstein_set_table, correspondence, Variant};
pub use response::{enumerate_types, forward_table, random_type_table, response_type_lp, response_type_lp_raw, ResponseType};
pub use simulate::{population_table, simulate, ChoiceProbs, InstrumentLaw, InstrumentLevel, JointLaw, JointPoint, Marginal, SelectionRule, SimDesign, Simulation, TruthRecord};
pub use witness::{coupling_witness_binary, coupling_witness_continuous, BinaryWitness, ContinuousWitness, Draw, StepCdf};
