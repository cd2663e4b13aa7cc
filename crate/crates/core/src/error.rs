use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("malformed measure file: {0}")]
    Malformed(String),
    #[error("non-positive weight {value} at atom {index}")]
    NonPositiveWeight { index: usize, value: f64 },
    #[error("zero vector at atom {index}")]
    ZeroVector { index: usize },
    #[error("need more than {dim} distinct atoms in dimension {dim}, got {count}")]
    TooFewAtoms { count: usize, dim: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("general-position resampling budget of {0} attempts exhausted")]
    ResampleBudget(usize),
    #[error("density must be positive and finite, got {value}")]
    InvalidDensity { value: f64 },
    #[error("halfspace intersection is unbounded")]
    Unbounded,
    #[error("halfspace intersection has empty interior (inscribed radius {radius:e})")]
    EmptyInterior { radius: f64 },
    #[error("point lies outside the polytope by {excess:e}")]
    OutsidePolytope { excess: f64 },
    #[error("facet {0} is inactive")]
    InactiveFacet(usize),
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("invalid q = {q}: {reason}")]
    InvalidQ { q: f64, reason: &'static str },
    #[error("no closed-form reference for q = {0}")]
    NoReference(f64),
    #[error("origin is not interior to the polytope")]
    OriginNotInterior,
    #[error("p must be negative, got {0}")]
    PositiveP(f64),
    #[error("non-positive argument h_i - xi.v_i at atom {index}")]
    NonPositiveArgument { index: usize },
    #[error("inner Newton iteration cap reached (gradient norm {grad_norm:e})")]
    InnerIterations { grad_norm: f64 },
    #[error("center Hessian is numerically singular")]
    SingularHessian,
    #[error("measure is not in general position: {0}")]
    NotGeneralPosition(String),
    #[error("atom {index} has no matching normal in the polytope")]
    MissingNormal { index: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("linear program failed: {0}")]
    Lp(&'static str),
}
