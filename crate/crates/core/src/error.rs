use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("phase {x} lies within {guard:e} of the singularity of the potential")]
    SingularityProximity { x: f64, guard: f64 },

    #[error("box at phase {x} has orbit point {site} within the singularity guard")]
    SingularBox { x: f64, site: usize },

    #[error("cocycle orbit point {site} from phase {x} lies within the singularity guard")]
    SingularOrbitPoint { x: f64, site: usize },

    #[error("fiber at phase {x} is singular for the rational frequency")]
    SingularPhase { x: f64 },

    #[error("continued fraction exhausted the {bits}-bit precision budget at index {index}")]
    PrecisionExhausted { bits: u32, index: usize },

    #[error("energy {energy} is an eigenvalue of the box to working precision")]
    EigenvalueHit { energy: f64 },

    #[error("inverse iteration stalled for eigenvalue index {index}")]
    InverseIterationStall { index: usize },

    #[error("requested level {requested} is outside the tabulated range [{low}, {high}]")]
    RangeTooNarrow { requested: f64, low: f64, high: f64 },

    #[error("bisection for energy {energy} did not reach tolerance {tol:e} (gap {gap:e})")]
    CoverageFailure { energy: f64, tol: f64, gap: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, SpectraError>;
