use thiserror::Error;

pub type Result<T> = std::result::Result<T, RoyError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoyError {
    #[error("negative cell mass {value} at position {index}")]
    NegativeMass { index: usize, value: f64 },
    #[error("cell probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("invalid instrument table: {0}")]
    InvalidTable(String),
    #[error("polytope is empty")]
    Infeasible,
    #[error("P(Y=1|z) varies across instrument points by {gap:.3e} (tolerance {tolerance:.3e})")]
    OutcomeInstrumentDependence { gap: f64, tolerance: f64 },
    #[error("no cell for covariate point ({x0}, {x1})")]
    MissingCell { x0: String, x1: String },
    #[error("conditioning event has probability {mass:.3e}")]
    DegenerateConditioning { mass: f64 },
    #[error("bounds for {quantity} cross: [{lo}, {hi}]")]
    BoundsCross { quantity: String, lo: f64, hi: f64 },
    #[error("identified set is empty: data inconsistent with the generalized model")]
    InfeasibleModel,
    #[error("P(Y=0,D=0|z={z}) is zero")]
    ZeroConditioningCell { z: String },
    #[error("denominator {value:.3e} too close to zero")]
    DegenerateDenominator { value: f64 },
    #[error("P(D={d}|z={z}) is zero")]
    ZeroSectorProbability { d: u8, z: String },
    #[error("sample is empty")]
    EmptySample,
    #[error("bad interval: y1={y1} must be below y2={y2}")]
    BadInterval { y1: f64, y2: f64 },
    #[error("quantiles must satisfy 0 < q1 < q2 < 1, got ({q1}, {q2})")]
    QuantileOutOfRange { q1: f64, q2: f64 },
    #[error("sector {d} has no mass")]
    EmptySector { d: u8 },
    #[error("no response-type law reproduces the table")]
    InfeasibleLp,
    #[error("instrument support of size {k} exceeds the limit of {max}")]
    TooManyInstrumentPoints { k: usize, max: usize },
    #[error("({a}, {b}) outside the admissible ranges a in [{a_lo}, {a_hi}], b in [{b_lo}, {b_hi}]")]
    OutOfRange { a: f64, b: f64, a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64 },
    #[error("candidate marginal for Y{d} violates the functional bounds at y={y}")]
    BoundsViolated { d: u8, y: f64 },
    #[error("instrument point {z} has no observations")]
    EmptyInstrumentCell { z: String },
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl RoyError {
    /// Substantive findings against the model, as opposed to malformed input.
    pub fn is_model_rejection(&self) -> bool {
        matches!(
            self,
            RoyError::OutcomeInstrumentDependence { .. }
                | RoyError::BoundsCross { .. }
                | RoyError::InfeasibleModel
                | RoyError::Infeasible
                | RoyError::InfeasibleLp
        )
    }
}
