//! Geodesic triangles, recursive angle division, Gauss-Bonnet checks, and
//! curvature-type classification on regular parametric surfaces.
//!
//! The pipeline, bottom to top:
//!
//! * [`surface`] — charts r(u, v), fundamental forms, curvature, Christoffel
//!   symbols; a small gallery of stock surfaces.
//! * [`geodesic`] — unit-speed geodesic integration (fixed-step RK4), the
//!   exponential map, tangent-space angle measurement and rotation, and a
//!   two-point connector.
//! * [`intersection`] — earliest transversal crossing of two geodesic paths.
//! * [`gauss_bonnet`] — curvature integrals over geodesic polygons and the
//!   angle-excess identity for triangles.
//! * [`scheme`] — the recursive angle-division iteration and its
//!   convergence/contraction diagnostics.
//! * [`classifier`] — curvature-type classification of a point from the
//!   iteration's limit angles.

pub mod classifier;
pub mod error;
pub mod gauss_bonnet;
pub mod geodesic;
pub mod intersection;
pub mod scheme;
pub mod surface;

pub use classifier::{
    classify_point, classify_point_default, corollary_weights, ClassificationRecord,
    EmpiricalParams,
};
pub use error::{GeodivError, Result};
pub use gauss_bonnet::{ChartPolygon, GeodesicTriangle};
pub use geodesic::{
    angle_between, connect, exp_map, integrate, integrate_clipped, metric_inner, metric_norm,
    rotate_tangent, ChartPoint, GeodesicPath, GeodesicState, TangentVector,
};
pub use intersection::{first_intersection, shoot_first_intersection, Intersection};
pub use scheme::{
    contraction_rho, plane_map, plane_oracle, theoretical_limits, DivisionFunctions, IterationStep,
    IterationTrace, TriangleConfig,
};
pub use surface::{
    gallery, Chart, ChristoffelSymbols, CurvatureData, DerivativeMode, Domain, FundamentalForms,
    PointKind, Surface,
};

/// Every fenced Rust block in the guide under `book/` (and the workspace
/// README) compiles and runs with the crate's doc-tests, so the prose cannot
/// drift from the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/surfaces.md")]
    mod surfaces {}
    #[doc = include_str!("../../../book/src/geodesics.md")]
    mod geodesics {}
    #[doc = include_str!("../../../book/src/gauss-bonnet.md")]
    mod gauss_bonnet {}
    #[doc = include_str!("../../../book/src/iteration.md")]
    mod iteration {}
    #[doc = include_str!("../../../book/src/contraction.md")]
    mod contraction {}
    #[doc = include_str!("../../../book/src/classification.md")]
    mod classification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
