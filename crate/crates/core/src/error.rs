use thiserror::Error;

/// Errors raised by the toolkit. Every contract violation surfaces here rather
/// than as a degraded numeric answer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("point {point:?} lies outside the grid box")]
    PointOutOfBounds { point: Vec<f64> },

    #[error("mask has no occupied cells")]
    EmptyMask,

    #[error("radius {radius} is below the resolvable floor {floor} (2 cell widths)")]
    Unresolvable { radius: f64, floor: f64 },

    #[error("negative radius {0}")]
    NegativeRadius(f64),

    #[error("invalid radii: {0}")]
    InvalidRadii(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid gauge: {0}")]
    InvalidGauge(String),

    #[error("shape oracle out of range: {0}")]
    OracleRange(String),

    #[error("invalid function system: {0}")]
    InvalidIfs(String),

    #[error("open set condition not declared: the renewal and content theorems assume it; set `osc: true` if the system satisfies it")]
    OscNotDeclared,

    #[error("attractor does not fit the grid box: {0}")]
    BboxOverflow(String),

    #[error("radii coverage insufficient: {0}")]
    Coverage(String),

    #[error("decay hypothesis violated: {0}")]
    DivergentTail(String),

    #[error("path undersampled: spacing {spacing} exceeds r_min/4 = {limit}")]
    Undersampled { spacing: f64, limit: f64 },

    #[error("unsupported Bessel order {0} (only 0 and 1/2 are implemented)")]
    UnsupportedOrder(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
