//! Regular parametric surfaces in R^3.
//!
//! A surface is a chart r(u, v) over an open rectangle, together with a
//! derivative source (analytic closures or central finite differences).
//! Everything downstream — fundamental forms, Gaussian/principal curvature,
//! Christoffel symbols — is computed from the chart derivatives
//! (r_u, r_v, r_uu, r_uv, r_vv) through the classical formulas:
//!
//! ```text
//! E = <r_u, r_u>   F = <r_u, r_v>   G = <r_v, r_v>
//! n = r_u x r_v / |r_u x r_v|
//! L = <r_uu, n>    M = <r_uv, n>    N = <r_vv, n>
//! K = (LN - M^2) / (EG - F^2)
//! ```
//!
//! Principal curvatures are the eigenvalues of the shape operator, obtained
//! in closed form from the mean curvature H and K as H ± sqrt(H^2 - K).

pub mod gallery;

use std::sync::Arc;

use nalgebra::Vector3;

use crate::error::{GeodivError, Result};

/// Regularity floor: |r_u x r_v| must exceed this at every evaluation site.
pub const REGULARITY_TOL: f64 = 1e-12;
/// The metric determinant EG - F^2 must exceed this.
pub const METRIC_DET_TOL: f64 = 1e-14;
/// Default tolerance for deciding K == 0 when classifying a point.
pub const DEFAULT_ZERO_TOL: f64 = 1e-7;
/// Default finite-difference step for user-supplied charts.
pub const DEFAULT_FD_STEP: f64 = 1e-5;
/// Floor for the second-difference step. Plain second differences at the
/// first-derivative step lose ~5 digits to cancellation; a step near
/// eps^(1/4) keeps truncation and roundoff balanced at ~1e-8.
const FD_SECOND_STEP_FLOOR: f64 = 2.5e-4;

/// A parametric chart r: (u, v) -> R^3.
///
/// `position` must be total (defined slightly beyond the domain rectangle,
/// as every smooth formula is); the `Surface` is responsible for domain
/// checks. Charts may ship analytic derivatives; when they return `None`
/// the surface falls back to finite differences.
pub trait Chart: Send + Sync {
    fn position(&self, u: f64, v: f64) -> Vector3<f64>;

    /// Analytic (r_u, r_v), if available.
    fn first_derivatives(&self, _u: f64, _v: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
        None
    }

    /// Analytic (r_uu, r_uv, r_vv), if available.
    fn second_derivatives(
        &self,
        _u: f64,
        _v: f64,
    ) -> Option<(Vector3<f64>, Vector3<f64>, Vector3<f64>)> {
        None
    }
}

/// Chart built from a plain closure; always differentiated numerically.
pub struct FnChart<F>(pub F);

impl<F> Chart for FnChart<F>
where
    F: Fn(f64, f64) -> Vector3<f64> + Send + Sync,
{
    fn position(&self, u: f64, v: f64) -> Vector3<f64> {
        (self.0)(u, v)
    }
}

/// Open parameter rectangle (u_min, u_max) x (v_min, v_max).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Domain {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Self {
        assert!(u_min < u_max && v_min < v_max, "empty domain rectangle");
        Domain {
            u_min,
            u_max,
            v_min,
            v_max,
        }
    }

    /// Strict interior test; the boundary itself is excluded.
    pub fn contains(&self, u: f64, v: f64) -> bool {
        u > self.u_min && u < self.u_max && v > self.v_min && v < self.v_max
    }

    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.u_min + self.u_max),
            0.5 * (self.v_min + self.v_max),
        )
    }
}

/// Where chart derivatives come from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    /// Use the chart's analytic closures (panics if the chart has none).
    Analytic,
    /// Central finite differences of `position` with the given step.
    FiniteDifference { h: f64 },
}

/// First and second fundamental form coefficients at a point.
#[derive(Debug, Clone, Copy)]
pub struct FundamentalForms {
    pub at: (f64, f64),
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
}

impl FundamentalForms {
    pub fn det(&self) -> f64 {
        self.e * self.g - self.f * self.f
    }
}

/// Gaussian curvature, ordered principal curvatures, and mean curvature.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureData {
    pub k: f64,
    /// Larger principal curvature (k1 >= k2).
    pub k1: f64,
    pub k2: f64,
    pub h: f64,
}

/// Christoffel symbols of the second kind; symmetry in the lower indices is
/// exact by construction, so only the six independent values are stored.
#[derive(Debug, Clone, Copy)]
pub struct ChristoffelSymbols {
    pub u_uu: f64,
    pub u_uv: f64,
    pub u_vv: f64,
    pub v_uu: f64,
    pub v_uv: f64,
    pub v_vv: f64,
}

/// Sign class of the Gaussian curvature at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

impl std::fmt::Display for PointKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PointKind::Elliptic => "elliptic",
            PointKind::Hyperbolic => "hyperbolic",
            PointKind::Parabolic => "parabolic",
        };
        f.write_str(s)
    }
}

/// All chart derivatives needed by the downstream formulas.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ChartDerivatives {
    pub ru: Vector3<f64>,
    pub rv: Vector3<f64>,
    pub ruu: Vector3<f64>,
    pub ruv: Vector3<f64>,
    pub rvv: Vector3<f64>,
}

/// A regular surface: chart + domain + derivative source.
#[derive(Clone)]
pub struct Surface {
    chart: Arc<dyn Chart>,
    domain: Domain,
    mode: DerivativeMode,
    name: Arc<str>,
}

impl std::fmt::Debug for Surface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Surface")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("mode", &self.mode)
            .finish()
    }
}

impl Surface {
    pub fn new(
        chart: impl Chart + 'static,
        domain: Domain,
        mode: DerivativeMode,
        name: &str,
    ) -> Self {
        Surface {
            chart: Arc::new(chart),
            domain,
            mode,
            name: Arc::from(name),
        }
    }

    /// Surface from a bare closure, differentiated by central differences.
    pub fn from_fn(
        f: impl Fn(f64, f64) -> Vector3<f64> + Send + Sync + 'static,
        domain: Domain,
        name: &str,
    ) -> Self {
        Surface::new(
            FnChart(f),
            domain,
            DerivativeMode::FiniteDifference { h: DEFAULT_FD_STEP },
            name,
        )
    }

    /// Same chart and domain with a different derivative source.
    pub fn with_mode(&self, mode: DerivativeMode) -> Self {
        Surface {
            chart: Arc::clone(&self.chart),
            domain: self.domain,
            mode,
            name: Arc::clone(&self.name),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        self.domain.contains(u, v)
    }

    /// Two handles refer to the same underlying chart.
    pub fn same_chart(&self, other: &Surface) -> bool {
        Arc::ptr_eq(&self.chart, &other.chart)
    }

    /// Ambient position, with a domain check.
    pub fn evaluate(&self, u: f64, v: f64) -> Result<Vector3<f64>> {
        self.check_domain(u, v)?;
        Ok(self.chart.position(u, v))
    }

    fn check_domain(&self, u: f64, v: f64) -> Result<()> {
        if !self.domain.contains(u, v) {
            return Err(GeodivError::OutOfDomain { u, v });
        }
        Ok(())
    }

    /// Chart derivatives without a domain check (used by integrators whose
    /// intermediate stages may poke marginally past the rectangle).
    pub(crate) fn derivatives_unchecked(&self, u: f64, v: f64) -> ChartDerivatives {
        match self.mode {
            DerivativeMode::Analytic => {
                let (ru, rv) = self
                    .chart
                    .first_derivatives(u, v)
                    .expect("analytic mode requires first_derivatives");
                let (ruu, ruv, rvv) = self
                    .chart
                    .second_derivatives(u, v)
                    .expect("analytic mode requires second_derivatives");
                ChartDerivatives {
                    ru,
                    rv,
                    ruu,
                    ruv,
                    rvv,
                }
            }
            DerivativeMode::FiniteDifference { h } => self.fd_derivatives(u, v, h),
        }
    }

    fn fd_derivatives(&self, u: f64, v: f64, h: f64) -> ChartDerivatives {
        let p = |u: f64, v: f64| self.chart.position(u, v);
        let ru = (p(u + h, v) - p(u - h, v)) / (2.0 * h);
        let rv = (p(u, v + h) - p(u, v - h)) / (2.0 * h);
        // Second differences divide roundoff of size eps*|p| by h2^2, so the
        // step must grow with the position magnitude or far-from-origin
        // charts lose all accuracy.
        let scale = p(u, v).norm().max(1.0).sqrt();
        let h2 = h.max(FD_SECOND_STEP_FLOOR * scale);
        let ruu = (p(u + h2, v) - 2.0 * p(u, v) + p(u - h2, v)) / (h2 * h2);
        let rvv = (p(u, v + h2) - 2.0 * p(u, v) + p(u, v - h2)) / (h2 * h2);
        let ruv = (p(u + h2, v + h2) - p(u + h2, v - h2) - p(u - h2, v + h2) + p(u - h2, v - h2))
            / (4.0 * h2 * h2);
        ChartDerivatives {
            ru,
            rv,
            ruu,
            ruv,
            rvv,
        }
    }

    /// E, F, G only (first derivatives suffice). Checks regularity.
    pub fn first_form(&self, u: f64, v: f64) -> Result<(f64, f64, f64)> {
        self.check_domain(u, v)?;
        self.first_form_unchecked(u, v)
    }

    pub(crate) fn first_form_unchecked(&self, u: f64, v: f64) -> Result<(f64, f64, f64)> {
        let (ru, rv) = match self.mode {
            DerivativeMode::Analytic => self
                .chart
                .first_derivatives(u, v)
                .expect("analytic mode requires first_derivatives"),
            DerivativeMode::FiniteDifference { h } => {
                let p = |u: f64, v: f64| self.chart.position(u, v);
                (
                    (p(u + h, v) - p(u - h, v)) / (2.0 * h),
                    (p(u, v + h) - p(u, v - h)) / (2.0 * h),
                )
            }
        };
        let e = ru.dot(&ru);
        let f = ru.dot(&rv);
        let g = rv.dot(&rv);
        let det = e * g - f * f;
        if det <= METRIC_DET_TOL {
            return Err(GeodivError::DegenerateMetric { u, v, det });
        }
        Ok((e, f, g))
    }

    /// Both fundamental forms. Errors on domain exit or a degenerate metric.
    pub fn fundamental_forms(&self, u: f64, v: f64) -> Result<FundamentalForms> {
        self.check_domain(u, v)?;
        let d = self.derivatives_unchecked(u, v);
        forms_from_derivatives(u, v, &d)
    }

    /// Gaussian curvature K, ordered principal curvatures, mean curvature.
    pub fn curvature(&self, u: f64, v: f64) -> Result<CurvatureData> {
        Ok(curvature_from_forms(&self.fundamental_forms(u, v)?))
    }

    /// Forms and curvature from a single derivative evaluation.
    pub fn curvature_and_forms(&self, u: f64, v: f64) -> Result<(CurvatureData, FundamentalForms)> {
        let ff = self.fundamental_forms(u, v)?;
        Ok((curvature_from_forms(&ff), ff))
    }

    /// Christoffel symbols of the second kind, from metric partials
    /// E_u = 2<r_uu, r_u>, F_u = <r_uu, r_v> + <r_u, r_uv>, etc.
    pub fn christoffel(&self, u: f64, v: f64) -> Result<ChristoffelSymbols> {
        self.check_domain(u, v)?;
        self.christoffel_unchecked(u, v)
    }

    pub(crate) fn christoffel_unchecked(&self, u: f64, v: f64) -> Result<ChristoffelSymbols> {
        let d = self.derivatives_unchecked(u, v);
        let e = d.ru.dot(&d.ru);
        let f = d.ru.dot(&d.rv);
        let g = d.rv.dot(&d.rv);
        let det = e * g - f * f;
        if det <= METRIC_DET_TOL {
            return Err(GeodivError::DegenerateMetric { u, v, det });
        }
        let e_u = 2.0 * d.ruu.dot(&d.ru);
        let e_v = 2.0 * d.ruv.dot(&d.ru);
        let f_u = d.ruu.dot(&d.rv) + d.ru.dot(&d.ruv);
        let f_v = d.ruv.dot(&d.rv) + d.ru.dot(&d.rvv);
        let g_u = 2.0 * d.ruv.dot(&d.rv);
        let g_v = 2.0 * d.rvv.dot(&d.rv);
        let w = 2.0 * det;
        Ok(ChristoffelSymbols {
            u_uu: (g * e_u - 2.0 * f * f_u + f * e_v) / w,
            u_uv: (g * e_v - f * g_u) / w,
            u_vv: (2.0 * g * f_v - g * g_u - f * g_v) / w,
            v_uu: (2.0 * e * f_u - e * e_v - f * e_u) / w,
            v_uv: (e * g_u - f * e_v) / w,
            v_vv: (e * g_v - 2.0 * f * f_v + f * g_u) / w,
        })
    }

    /// Elliptic / hyperbolic / parabolic by the sign of K against `zero_tol`.
    pub fn classify_by_curvature(&self, u: f64, v: f64, zero_tol: f64) -> Result<PointKind> {
        let c = self.curvature(u, v)?;
        Ok(if c.k.abs() <= zero_tol {
            PointKind::Parabolic
        } else if c.k > 0.0 {
            PointKind::Elliptic
        } else {
            PointKind::Hyperbolic
        })
    }
}

fn forms_from_derivatives(u: f64, v: f64, d: &ChartDerivatives) -> Result<FundamentalForms> {
    let normal = d.ru.cross(&d.rv);
    let norm = normal.norm();
    if norm <= REGULARITY_TOL {
        return Err(GeodivError::DegenerateMetric {
            u,
            v,
            det: norm * norm,
        });
    }
    let n = normal / norm;
    let e = d.ru.dot(&d.ru);
    let f = d.ru.dot(&d.rv);
    let g = d.rv.dot(&d.rv);
    let det = e * g - f * f;
    if det <= METRIC_DET_TOL {
        return Err(GeodivError::DegenerateMetric { u, v, det });
    }
    Ok(FundamentalForms {
        at: (u, v),
        e,
        f,
        g,
        l: d.ruu.dot(&n),
        m: d.ruv.dot(&n),
        n: d.rvv.dot(&n),
    })
}

/// H^2 - K below this fraction of the curvature scale h^2 + |K| is treated
/// as an exact umbilic. The discriminant is a difference of like-sized
/// terms, so its noise is the *square* of the achievable k1/k2 accuracy;
/// collapsing to k1 = k2 = H keeps principal curvatures as accurate as H
/// itself instead of sqrt(noise).
const UMBILIC_DISC_TOL: f64 = 1e-7;

fn curvature_from_forms(ff: &FundamentalForms) -> CurvatureData {
    let det = ff.det();
    let k = (ff.l * ff.n - ff.m * ff.m) / det;
    let h = (ff.e * ff.n + ff.g * ff.l - 2.0 * ff.f * ff.m) / (2.0 * det);
    // H^2 - K >= 0 in exact arithmetic; noise can push it either way.
    let disc = h * h - k;
    let (k1, k2) = if disc <= UMBILIC_DISC_TOL * (h * h + k.abs()) {
        (h, h)
    } else {
        let s = disc.sqrt();
        (h + s, h - s)
    };
    CurvatureData { k, k1, k2, h }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Polar chart of the plane: (u cos v, u sin v, 0). Classic Christoffel
    /// fixture with non-trivial symbols.
    struct PolarPlane;

    impl Chart for PolarPlane {
        fn position(&self, u: f64, v: f64) -> Vector3<f64> {
            Vector3::new(u * v.cos(), u * v.sin(), 0.0)
        }
        fn first_derivatives(&self, _u: f64, v: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
            Some((
                Vector3::new(v.cos(), v.sin(), 0.0),
                Vector3::new(-_u * v.sin(), _u * v.cos(), 0.0),
            ))
        }
        fn second_derivatives(
            &self,
            u: f64,
            v: f64,
        ) -> Option<(Vector3<f64>, Vector3<f64>, Vector3<f64>)> {
            Some((
                Vector3::zeros(),
                Vector3::new(-v.sin(), v.cos(), 0.0),
                Vector3::new(-u * v.cos(), -u * v.sin(), 0.0),
            ))
        }
    }

    /// Wrapper that swaps the chart parameters, flipping orientation.
    struct Swapped(std::sync::Arc<dyn Chart>);

    impl Chart for Swapped {
        fn position(&self, u: f64, v: f64) -> Vector3<f64> {
            self.0.position(v, u)
        }
        fn first_derivatives(&self, u: f64, v: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
            self.0.first_derivatives(v, u).map(|(ru, rv)| (rv, ru))
        }
        fn second_derivatives(
            &self,
            u: f64,
            v: f64,
        ) -> Option<(Vector3<f64>, Vector3<f64>, Vector3<f64>)> {
            self.0
                .second_derivatives(v, u)
                .map(|(ruu, ruv, rvv)| (rvv, ruv, ruu))
        }
    }

    fn rng() -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed5)
    }

    #[test]
    fn plane_forms_are_euclidean() {
        let s = gallery::plane();
        let ff = s.fundamental_forms(0.3, -1.2).unwrap();
        assert_eq!((ff.e, ff.f, ff.g), (1.0, 0.0, 1.0));
        assert_eq!((ff.l, ff.m, ff.n), (0.0, 0.0, 0.0));
        let c = s.curvature(5.0, 7.0).unwrap();
        assert_eq!((c.k, c.k1, c.k2), (0.0, 0.0, 0.0));
    }

    #[test]
    fn sphere_forms_at_equator() {
        let s = gallery::sphere(1.0);
        let ff = s.fundamental_forms(FRAC_PI_2, 0.0).unwrap();
        assert_abs_diff_eq!(ff.e, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ff.f, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ff.g, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ff.l.abs(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ff.m, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ff.n.abs(), 1.0, epsilon = 1e-12);
        let c = s.curvature(1.1, 2.0).unwrap();
        assert_abs_diff_eq!(c.k, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sphere_radius_scales_curvature() {
        let s = gallery::sphere(2.0);
        let c = s.curvature(1.0, 0.5).unwrap();
        assert_abs_diff_eq!(c.k, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(c.h, -0.5, epsilon = 1e-12);
        // sqrt(H^2 - K) turns eps-level cancellation into ~1e-8 noise at
        // umbilics, so the split into k1/k2 is only that accurate.
        assert_abs_diff_eq!(c.k1, -0.5, epsilon = 1e-7);
        assert_abs_diff_eq!(c.k2, -0.5, epsilon = 1e-7);
    }

    #[test]
    fn saddle_origin_curvature() {
        let s = gallery::saddle();
        let ff = s.fundamental_forms(0.0, 0.0).unwrap();
        assert_eq!((ff.e, ff.f, ff.g), (1.0, 0.0, 1.0));
        assert_eq!((ff.l, ff.m, ff.n), (2.0, 0.0, -2.0));
        let c = s.curvature(0.0, 0.0).unwrap();
        assert_abs_diff_eq!(c.k, -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.k1, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.k2, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn polar_plane_christoffel() {
        let dom = Domain::new(0.1, 10.0, -PI, PI);
        let s = Surface::new(PolarPlane, dom, DerivativeMode::Analytic, "polar-plane");
        let u = 1.7;
        let ch = s.christoffel(u, 0.4).unwrap();
        assert_abs_diff_eq!(ch.u_vv, -u, epsilon = 1e-12);
        assert_abs_diff_eq!(ch.v_uv, 1.0 / u, epsilon = 1e-12);
        for z in [ch.u_uu, ch.u_uv, ch.v_uu, ch.v_vv] {
            assert_abs_diff_eq!(z, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sphere_christoffel() {
        let s = gallery::sphere(1.0);
        let u = 0.9;
        let ch = s.christoffel(u, 1.3).unwrap();
        assert_abs_diff_eq!(ch.u_vv, -u.sin() * u.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(ch.v_uv, u.cos() / u.sin(), epsilon = 1e-12);
    }

    #[test]
    fn out_of_domain_is_an_error() {
        let s = gallery::torus(2.0, 1.0);
        assert!(matches!(
            s.evaluate(10.0, 0.0),
            Err(GeodivError::OutOfDomain { .. })
        ));
        assert!(s.evaluate(0.0, 0.0).is_ok());
    }

    #[test]
    fn degenerate_chart_is_rejected() {
        // r_v vanishes identically: the chart is nowhere regular.
        let s = Surface::new(
            FnChart(|u: f64, _v: f64| Vector3::new(u, 0.0, 0.0)),
            Domain::new(-1.0, 1.0, -1.0, 1.0),
            DerivativeMode::FiniteDifference { h: 1e-5 },
            "degenerate",
        );
        assert!(matches!(
            s.fundamental_forms(0.2, 0.1),
            Err(GeodivError::DegenerateMetric { .. })
        ));
    }

    #[test]
    fn classification_matches_curvature_sign() {
        assert_eq!(
            gallery::sphere(1.0)
                .classify_by_curvature(1.0, 1.0, DEFAULT_ZERO_TOL)
                .unwrap(),
            PointKind::Elliptic
        );
        assert_eq!(
            gallery::cylinder(1.0)
                .classify_by_curvature(0.5, 0.5, DEFAULT_ZERO_TOL)
                .unwrap(),
            PointKind::Parabolic
        );
        assert_eq!(
            gallery::saddle()
                .classify_by_curvature(0.3, -0.2, DEFAULT_ZERO_TOL)
                .unwrap(),
            PointKind::Hyperbolic
        );
    }

    #[test]
    fn curvature_identities_hold_across_the_gallery() {
        let mut rng = rng();
        for s in gallery::all_default() {
            for _ in 0..50 {
                let (u, v) = gallery::interior_point(&s, rng.gen(), rng.gen());
                let (c, ff) = s.curvature_and_forms(u, v).unwrap();
                assert!(ff.e > 0.0 && ff.g > 0.0 && ff.det() > 0.0);
                // K * (EG - F^2) = LN - M^2
                assert_abs_diff_eq!(
                    c.k * ff.det(),
                    ff.l * ff.n - ff.m * ff.m,
                    epsilon = 1e-9 * (1.0 + (ff.l * ff.n).abs())
                );
                assert!(c.k1 >= c.k2);
                assert_abs_diff_eq!(c.k1 * c.k2, c.k, epsilon = 1e-9 * (1.0 + c.k.abs()));
                assert_abs_diff_eq!(c.k1 + c.k2, 2.0 * c.h, epsilon = 1e-9 * (1.0 + c.h.abs()));
            }
        }
    }

    #[test]
    fn finite_differences_agree_with_analytic_derivatives() {
        let mut rng = rng();
        for s in gallery::all_default() {
            let fd = s.with_mode(DerivativeMode::FiniteDifference { h: 1e-5 });
            for _ in 0..25 {
                let (u, v) = gallery::interior_point(&s, rng.gen(), rng.gen());
                let a = s.fundamental_forms(u, v).unwrap();
                let b = fd.fundamental_forms(u, v).unwrap();
                for (x, y) in [
                    (a.e, b.e),
                    (a.f, b.f),
                    (a.g, b.g),
                    (a.l, b.l),
                    (a.m, b.m),
                    (a.n, b.n),
                ] {
                    // Absolute for O(1) coefficients, relative where the
                    // metric blows up (E ~ 1e4 near Monge-patch corners).
                    assert_abs_diff_eq!(x, y, epsilon = 1e-6 * (1.0 + x.abs()));
                }
            }
        }
    }

    #[test]
    fn orientation_flip_negates_principal_curvatures() {
        let mut rng = rng();
        for s in gallery::all_default() {
            let d = s.domain();
            let swapped = Surface::new(
                Swapped(std::sync::Arc::new(ClonedChart(s.clone()))),
                Domain::new(d.v_min, d.v_max, d.u_min, d.u_max),
                s.mode(),
                "swapped",
            );
            for _ in 0..20 {
                let (u, v) = gallery::interior_point(&s, rng.gen(), rng.gen());
                let a = s.curvature(u, v).unwrap();
                let b = swapped.curvature(v, u).unwrap();
                assert_abs_diff_eq!(a.k, b.k, epsilon = 1e-9 * (1.0 + a.k.abs()));
                // Swapping u and v flips the normal, so the principal pair
                // negates and reorders.
                assert_abs_diff_eq!(a.k1, -b.k2, epsilon = 1e-9 * (1.0 + a.k1.abs()));
                assert_abs_diff_eq!(a.k2, -b.k1, epsilon = 1e-9 * (1.0 + a.k2.abs()));
            }
        }
    }

    /// Adapter so the swap wrapper can reuse a `Surface`'s chart.
    struct ClonedChart(Surface);

    impl Chart for ClonedChart {
        fn position(&self, u: f64, v: f64) -> Vector3<f64> {
            self.0.chart.position(u, v)
        }
        fn first_derivatives(&self, u: f64, v: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
            self.0.chart.first_derivatives(u, v)
        }
        fn second_derivatives(
            &self,
            u: f64,
            v: f64,
        ) -> Option<(Vector3<f64>, Vector3<f64>, Vector3<f64>)> {
            self.0.chart.second_derivatives(u, v)
        }
    }

    #[test]
    fn fd_mode_of_a_closure_chart_works() {
        // Same saddle, supplied as a bare closure.
        let s = Surface::from_fn(
            |u, v| Vector3::new(u, v, u * u - v * v),
            Domain::new(-10.0, 10.0, -10.0, 10.0),
            "closure-saddle",
        );
        let c = s.curvature(0.0, 0.0).unwrap();
        assert_abs_diff_eq!(c.k, -4.0, epsilon = 1e-6);
        let mut rng = rng();
        let reference = gallery::saddle();
        for _ in 0..10 {
            let u = rng.gen_range(-1.5..1.5);
            let v = rng.gen_range(-1.5..1.5);
            let a = reference.curvature(u, v).unwrap();
            let b = s.curvature(u, v).unwrap();
            assert_abs_diff_eq!(a.k, b.k, epsilon = 1e-6);
        }
    }
}
