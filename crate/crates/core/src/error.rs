use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("domain too small: need at least {needed} points per axis, have {have}")]
    DomainTooSmall { needed: usize, have: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid mismatch between fields")]
    GridMismatch,
    #[error("empty region")]
    EmptyRegion,
    #[error("negative value {value} at node {index}")]
    NegativeValue { index: usize, value: f64 },
    #[error("point {0:?} lies outside the source domain")]
    OutsideDomain(Vec<f64>),
    #[error("stress derivative undefined at zero gradient for gamma > 0")]
    DegenerateGradient,
    #[error("point too close to the origin: |x| = {0} < 1/4")]
    BarrierRegion(f64),
    #[error("no unique critical point: opening_hi = {hi} must exceed opening_lo = {lo}")]
    NoUniqueCriticalPoint { hi: f64, lo: f64 },
    #[error("cone-difference vertex {0:?} not interior to the region")]
    VertexOutsideRegion(Vec<f64>),
    #[error("vertex {0:?} outside the domain box")]
    VertexOutsideDomain(Vec<f64>),
    #[error("vertex set is not contained in the search region")]
    VertexOutsideSearch,
    #[error("touch set is empty")]
    EmptyTouchSet,
    #[error("radius {r} smaller than grid spacing {h}")]
    RadiusTooSmall { r: f64, h: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("censored fraction {fraction} exceeds {limit}")]
    CensoringTooHigh { fraction: f64, limit: f64 },
    #[error("solver did not converge: residual {residual} after {iterations} iterations")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("config: {0}")]
    Config(String),
    #[error("format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
