use thiserror::Error;

/// Every failure the library can report.
///
/// Several variants are deliberate check failures (for example
/// [`Error::NotAComplex`] or [`Error::BijectionFailure`]) and carry enough
/// context to name what went wrong in a report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("boundary composition nonzero in degrees {degrees:?}")]
    NotAComplex { degrees: Vec<usize> },

    #[error("difference is not divisible by 1+t (value at t=-1 is {value_at_minus_one})")]
    NotDivisible { value_at_minus_one: i64 },

    #[error("quotient has negative coefficient {value} at t^{power}")]
    NegativeCoefficient { power: usize, value: i64 },

    #[error("kernel rank {z} exceeds group rank {nu} in degree {degree}")]
    InvalidKernelRank { degree: usize, z: usize, nu: usize },

    #[error("point violates chart constraint by {violation:e}")]
    InvalidPoint { violation: f64 },

    #[error("unknown {kind} `{name}`")]
    NotFound { kind: &'static str, name: String },

    #[error("degenerate critical point near {position:?}: {detail}")]
    DegenerateCritical { position: Vec<f64>, detail: String },

    #[error("flow did not converge before t = {t_max} (started at {start:?})")]
    NoConvergence { t_max: f64, start: Vec<f64> },

    #[error("relative index is {0}, expected 1")]
    RelativeIndexNotOne(i64),

    #[error("signed counting unsupported: {0}")]
    OrientationUnsupported(String),

    #[error("epsilon {epsilon} too large: spurious critical point near {position:?}")]
    EpsilonTooLarge { epsilon: f64, position: Vec<f64> },

    #[error("critical point of the perturbed function near {position:?} matches no auxiliary critical point")]
    UnmatchedCritical { position: Vec<f64> },

    #[error("cascade scan did not converge: {0}")]
    BudgetExceeded(String),

    #[error("Hausdorff distance of an empty sample")]
    EmptySet,

    #[error("connection count drifted across epsilon sweep: {counts:?}")]
    CountDrift { counts: Vec<usize> },

    #[error("cascade/flow-line bijection failed: {0}")]
    BijectionFailure(String),

    #[error("boundary of a degree-zero face")]
    DegreeZero,

    #[error("cubical complex not closed under faces: missing {0}")]
    NotFaceClosed(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("multicomplex relation failed: {0}")]
    RelationFailure(String),

    #[error("dimension unsupported: {0}")]
    DimensionUnsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
