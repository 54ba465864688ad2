use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("copula parameter alpha = {0} outside [-1, 1]")]
    AlphaOutOfRange(f64),

    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("point coordinate {value} outside the unit interval")]
    OutsideUnitCube { value: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid copula: {0}")]
    InvalidCopula(String),

    #[error("copula `{0}` has an unbounded density; rejection sampling is unavailable")]
    UnboundedDensity(String),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("evaluation budget exceeded: {requested} evaluations requested, budget {budget}")]
    BudgetExceeded { requested: u128, budget: u128 },

    #[error("dimension {dim} exceeds the quadrature limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("quadrature resolution too low: refinements differ by {diff:e} (g = {coarse} vs {fine})")]
    ResolutionTooLow { coarse: usize, fine: usize, diff: f64 },

    #[error("gamma inversion failed for probability {p}")]
    GammaInversion { p: f64 },

    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// Numerical guard failures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::BudgetExceeded { .. }
                | Error::DimensionTooLarge { .. }
                | Error::ResolutionTooLow { .. }
                | Error::GammaInversion { .. }
                | Error::UnboundedDensity(_)
        )
    }
}
