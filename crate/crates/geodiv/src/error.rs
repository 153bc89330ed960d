//! Error type shared by every module in the crate.

use thiserror::Error;

/// Failures surfaced by chart evaluation, geodesic integration, intersection
/// search, the angle-division iteration, quadrature, and classification.
#[derive(Debug, Clone, Error)]
pub enum GeodivError {
    /// A chart was queried outside its open parameter rectangle.
    #[error("point ({u}, {v}) lies outside the chart domain")]
    OutOfDomain { u: f64, v: f64 },

    /// The first fundamental form is singular at the query point.
    #[error("degenerate metric at ({u}, {v}): EG - F^2 = {det:e}")]
    DegenerateMetric { u: f64, v: f64, det: f64 },

    /// An operation that needs a direction received a (near-)zero vector.
    #[error("zero tangent vector (metric norm {norm:e})")]
    ZeroVector { norm: f64 },

    /// A geodesic ran off the open parameter rectangle mid-integration.
    #[error("geodesic left the chart domain at s = {s} near ({u}, {v})")]
    ChartBoundaryExceeded { s: f64, u: f64, v: f64 },

    /// An iterative solver exhausted its iteration budget.
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },

    /// No transversal crossing was found within the searched arc length.
    #[error("no intersection within arc length {searched}")]
    NoIntersection { searched: f64 },

    /// The curves meet at an angle too shallow to resolve reliably.
    #[error("tangential intersection (crossing angle {angle:e} rad)")]
    TangentialIntersection { angle: f64 },

    /// The crossing landed on (or numerically at) an endpoint of the target.
    #[error("intersection at target endpoint (t = {t:e} of segment length {length:e})")]
    EndpointHit { t: f64, length: f64 },

    /// An angle that must lie strictly inside (0, pi) did not.
    #[error("angle {angle} outside the open interval (0, pi)")]
    DivisionDomain { angle: f64 },

    /// A region boundary is self-intersecting or has (near-)zero area.
    #[error("boundary polygon is degenerate or self-intersecting")]
    NonSimplePolygon,

    /// A caller-supplied parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The limit pair fits no curvature-type decision branch.
    #[error("classification inconclusive: alpha = {alpha}, beta = {beta}")]
    InconclusiveClassification { alpha: f64, beta: f64 },

    /// Filesystem or formatting failure while writing a report.
    #[error("I/O error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, GeodivError>;

impl From<std::io::Error> for GeodivError {
    fn from(e: std::io::Error) -> Self {
        GeodivError::Io(e.to_string())
    }
}
