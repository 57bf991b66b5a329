use thiserror::Error;

/// Errors raised by the gasket library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GasketError {
    #[error("N must be >= 2 (got {0})")]
    InvalidDimension(usize),

    #[error("letter {letter} is not in 1..={n}")]
    InvalidLetter { letter: usize, n: usize },

    #[error("vertex pair ({0}, {1}) is not a pair of distinct vertices")]
    InvalidPair(usize, usize),

    #[error("the empty word does not address a point")]
    AmbiguousAddress,

    #[error("vector has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinates do not sum to zero")]
    NotInHyperplane,

    #[error("the plane P degenerates to a line for N = 2")]
    DegeneratePlane,

    #[error("corner-cutting ratio {0} is outside (0, 1/2)")]
    InvalidRatio(f64),

    #[error("polygon needs at least {min} edges, got {got}")]
    PolygonTooShort { min: usize, got: usize },

    #[error("value {value} is outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("level mismatch: form is at level {form}, function at level {function}")]
    LevelMismatch { form: usize, function: usize },

    #[error("resource guard: {what} = {requested} exceeds the cap {cap}")]
    ResourceGuard {
        what: &'static str,
        requested: u128,
        cap: u128,
    },

    #[error("word length {len} exceeds the depth limit {limit}")]
    DepthLimit { len: usize, limit: usize },

    #[error("finite difference degenerated at t = {t}; refine the depth")]
    RefineDepth { t: f64 },

    #[error("the Hölder exponent is not defined for N = 2 (Γ is a segment)")]
    HolderInapplicable,

    #[error("vertex {0:?} is not a vertex of this level")]
    UnknownVertex(Vec<f64>),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, GasketError>;
