use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("geodesic endpoints coincide")]
    InvalidAxis,
    #[error("point triples have opposite cyclic orientation")]
    OrientationMismatch,
    #[error("geodesics cross")]
    GeodesicsCross,
    #[error("geodesics share an endpoint")]
    SharedEndpoint,
    #[error("invalid arc: {0}")]
    InvalidArc(String),
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("quadrature did not converge after {evaluations} kernel evaluations (error estimate {estimate:e})")]
    NoConvergence { evaluations: usize, estimate: f64 },
    #[error("arcs are {separation:e} rad apart; quadrature needs at least {minimum:e}")]
    ArcsTooClose { separation: f64, minimum: f64 },
    #[error("closed-form fourth corner lies outside the requested arc")]
    NoSolutionInArc,
    #[error("leaves cross: {pairs:?}")]
    CrossingLeaves { pairs: Vec<(usize, usize)> },
    #[error("leaves with non-positive weight: {indices:?}")]
    NonpositiveWeight { indices: Vec<usize> },
    #[error("duplicate leaves: {pairs:?}")]
    DuplicateLeaves { pairs: Vec<(usize, usize)> },
    #[error("family geodesics at parameters {0} and {1} cross or coincide")]
    CrossingFamily(f64, f64),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("corner {corner} cannot be moved off lamination endpoints within {max_shift:e}")]
    CannotSeparate { corner: usize, max_shift: f64 },
    #[error("base point lies on a leaf endpoint")]
    BaseOnLeaf,
    #[error("unsupported current variant: {0}")]
    UnsupportedVariant(&'static str),
    #[error("breakpoint images collapse below point resolution")]
    CollapsedBreakpoints,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
