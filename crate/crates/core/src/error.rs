use thiserror::Error;

/// Errors raised anywhere in the discretization and solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spline parameters: {0}")]
    InvalidSpline(String),

    #[error("point {x} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("spline spaces are not nested: {0}")]
    NotNested(String),

    #[error("singular geometry Jacobian at parameter point ({u}, {v}): det = {det:e}")]
    SingularJacobian { u: f64, v: f64, det: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix not SPD: non-positive pivot {value:e} at index {index}")]
    NotSpd { index: usize, value: f64 },

    #[error("spatial solve failed at slice {slice} (d = {eigenvalue:e}): {source}")]
    SliceSolve {
        slice: usize,
        eigenvalue: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid subdomain: {0}")]
    InvalidSubdomain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("Krylov breakdown: {0}")]
    Breakdown(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
