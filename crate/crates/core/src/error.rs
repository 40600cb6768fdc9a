use thiserror::Error;

/// Errors produced by the curve pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("knot vector is not nondecreasing at index {index} ({left} > {right})")]
    NonMonotoneKnots { index: usize, left: f64, right: f64 },

    #[error("knot vector is not clamped: {0}")]
    NotClamped(String),

    #[error(
        "control point count mismatch: {knots} knots with degree {degree} need {expected} points, got {actual}"
    )]
    CountMismatch {
        knots: usize,
        degree: usize,
        expected: usize,
        actual: usize,
    },

    #[error("degree {0} outside supported range 1..=31")]
    DegreeOutOfRange(usize),

    #[error("knot {value} has multiplicity {multiplicity}, exceeding degree + 1 = {limit}")]
    KnotMultiplicity {
        value: f64,
        multiplicity: usize,
        limit: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("degenerate span [{0}, {1}]")]
    DegenerateSpan(f64, f64),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("curve has no nonzero-length span")]
    EmptyDomain,

    #[error("degenerate end tangent in degree reduction")]
    DegenerateTangent,

    #[error("singular degree-reduction system (determinant {0:e})")]
    SingularSystem(f64),

    #[error("subdivision depth exceeded {max_depth} on source interval [{t_a}, {t_b}]")]
    DepthExceeded { max_depth: u32, t_a: f64, t_b: f64 },

    #[error("Bézier clipping found no axis crossing")]
    NoRoot,

    #[error("point is {distance:e} from the curve, beyond the inversion limit {limit:e}")]
    PointNotOnCurve { distance: f64, limit: f64 },

    #[error("numerical check failed: {0}")]
    Numerical(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
