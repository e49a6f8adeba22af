use thiserror::Error;

/// Errors raised by the library. Each variant names the stage that failed so
/// that `predict` can report where a pipeline stopped.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("ambient dimension must be positive")]
    ZeroDimension,

    #[error("vector of length {found} does not match ambient dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cone is not pointed (contains a line)")]
    NotPointed,

    #[error("cone is not full-dimensional (span has dimension {span} < {ambient})")]
    NotFullDimensional { span: usize, ambient: usize },

    #[error(
        "point lies on or outside the cone boundary: linear form {form:?} evaluates to {value}, X-function diverges"
    )]
    Divergence { form: Vec<String>, value: String },

    #[error("polarization is not interior to the cone: facet {form:?} gives {value} <= 0")]
    NotInterior { form: Vec<String>, value: String },

    #[error("invalid fan: {0}")]
    InvalidFan(String),

    #[error("fan is not smooth (cone {cone:?} has lattice index {index}); resolve it first")]
    NotSmooth { cone: Vec<usize>, index: String },

    #[error("fan is not complete: {0}")]
    NotComplete(String),

    #[error("operation requires dimension {expected}, got {found}")]
    UnsupportedDimension { expected: usize, found: usize },

    #[error("piecewise-linear function is not convex")]
    NotConvex,

    #[error("piecewise-linear function has non-integral linear forms; rescale the polarization")]
    NonIntegralForms,

    #[error("rigid component count {l} exceeds Picard rank {rank}")]
    TooManyRigidComponents { l: usize, rank: usize },

    #[error("incomplete strata data: {0}")]
    IncompleteStrata(String),

    #[error("invalid rigid divisor data: {0}")]
    InvalidRigidData(String),

    #[error("Euler truncation must be at least 2, got {0}")]
    TruncationTooSmall(u64),

    #[error("non-split Galois module: cohomology computation out of scope")]
    NonSplit,

    #[error("invalid asymptotic parameters: {0}")]
    InvalidParameters(String),

    #[error("degenerate regression design: {0}")]
    DegenerateFit(String),

    #[error("count curve invalid: {0}")]
    InvalidCurve(String),

    #[error("mismatched bound schedules")]
    ScheduleMismatch,

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid height model: {0}")]
    InvalidHeightModel(String),

    #[error("products: {0}")]
    ProductCase(String),

    #[error("variety spec: {0}")]
    Spec(String),

    #[error("stage `{stage}` failed: {cause}")]
    Stage { stage: &'static str, cause: Box<Error> },
}

impl Error {
    pub(crate) fn at(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            cause: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
