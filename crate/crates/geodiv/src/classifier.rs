//! Curvature-type classification of surface points from the limit angles of
//! the division scheme.
//!
//! The division weights are built from the curvature at each point:
//!
//! ```text
//! p(x) = 1 + |K (k1 + k2)|          q(x) = 1 + |K| (|k1| + |k2|)
//! ```
//!
//! Both equal 1 where K = 0, and p = q wherever k1 and k2 share a sign, so
//! the limit pair (alpha_inf, beta_inf) of a scheme run with these weights
//! separates the three point types:
//!
//! * parabolic — both limits equal (pi - mu)/3 (the weights collapse to
//!   plain bisection);
//! * elliptic — limits equal but strictly below (pi - mu)/3;
//! * hyperbolic — limits differ (q > p exactly when k1 k2 < 0).
//!
//! [`classify_point`] evaluates the limits either from the closed form at
//! the point or empirically by running the scheme with position-dependent
//! weights, then compares the decision against the sign of K.

use std::io::Write;

use crate::error::{GeodivError, Result};
use crate::geodesic::ChartPoint;
use crate::scheme::{theoretical_limits, DivisionFunctions, TriangleConfig};
use crate::surface::{CurvatureData, PointKind, Surface, DEFAULT_ZERO_TOL};

use std::f64::consts::{FRAC_PI_2, PI};

/// Decision margin when the limits come from the closed form.
pub const THEORY_DECISION_TOL: f64 = 1e-6;
/// Decision margin when the limits come from running the scheme.
pub const EMPIRICAL_DECISION_TOL: f64 = 1e-4;

/// Division weights (p, q) induced by the curvature at a point.
pub fn corollary_weights(c: &CurvatureData) -> (f64, f64) {
    let p = 1.0 + (c.k * (c.k1 + c.k2)).abs();
    let q = 1.0 + c.k.abs() * (c.k1.abs() + c.k2.abs());
    (p, q)
}

/// The curvature-induced weights as scheme division functions.
///
/// The closures return NaN outside the domain (or at metric degeneracies),
/// which the scheme rejects as an invalid weight at the offending point.
pub fn division_functions(surface: &Surface) -> DivisionFunctions {
    let sp = surface.clone();
    let sq = surface.clone();
    DivisionFunctions::new(
        move |x: ChartPoint| match sp.curvature(x.u, x.v) {
            Ok(c) => corollary_weights(&c).0,
            Err(_) => f64::NAN,
        },
        move |x: ChartPoint| match sq.curvature(x.u, x.v) {
            Ok(c) => corollary_weights(&c).1,
            Err(_) => f64::NAN,
        },
        "curvature-induced",
    )
}

/// Classify a point from a limit pair of the scheme run with
/// curvature-induced weights.
///
/// Equal limits at (pi - mu)/3 are parabolic, equal limits below it are
/// elliptic, unequal limits are hyperbolic. Equal limits *above* the
/// bisection value cannot arise from the weights (both are >= 1), so that
/// case is reported as inconclusive rather than forced into a type.
pub fn decide(mu: f64, alpha_inf: f64, beta_inf: f64, tol: f64) -> Result<PointKind> {
    if !alpha_inf.is_finite() || !beta_inf.is_finite() {
        return Err(GeodivError::InconclusiveClassification {
            alpha: alpha_inf,
            beta: beta_inf,
        });
    }
    let third = (PI - mu) / 3.0;
    if (alpha_inf - beta_inf).abs() > tol {
        return Ok(PointKind::Hyperbolic);
    }
    if (alpha_inf - third).abs() <= tol && (beta_inf - third).abs() <= tol {
        return Ok(PointKind::Parabolic);
    }
    if alpha_inf < third {
        return Ok(PointKind::Elliptic);
    }
    Err(GeodivError::InconclusiveClassification {
        alpha: alpha_inf,
        beta: beta_inf,
    })
}

/// Scheme parameters for empirical classification.
#[derive(Debug, Clone, Copy)]
pub struct EmpiricalParams {
    /// V–A_1 distance; small, so the weights are near-constant over the
    /// triangle.
    pub a1: f64,
    pub alpha1: f64,
    pub step: f64,
    pub conv_tol: f64,
    pub max_iters: usize,
    pub ray_dir: (f64, f64),
}

impl Default for EmpiricalParams {
    fn default() -> Self {
        EmpiricalParams {
            a1: 0.1,
            alpha1: PI / 4.0,
            step: 1e-4,
            conv_tol: 1e-8,
            max_iters: 200,
            ray_dir: (1.0, 0.0),
        }
    }
}

/// Everything measured while classifying one point.
#[derive(Debug, Clone)]
pub struct ClassificationRecord {
    pub surface: String,
    pub u: f64,
    pub v: f64,
    pub curvature: CurvatureData,
    pub p: f64,
    pub q: f64,
    pub alpha_theory: f64,
    pub beta_theory: f64,
    /// NaN unless the scheme was run.
    pub alpha_emp: f64,
    /// NaN unless the scheme was run.
    pub beta_emp: f64,
    /// Decision from the limit pair (empirical when available).
    pub kind_limits: PointKind,
    /// Decision from the sign of K directly.
    pub kind_oracle: PointKind,
    pub agree: bool,
}

/// Classify a point at opening angle mu.
///
/// With `empirical: None` the limits come from the closed form with the
/// weights frozen at the point; otherwise the scheme is run from the point
/// with position-dependent weights and the empirical limits decide.
pub fn classify_point(
    surface: &Surface,
    u: f64,
    v: f64,
    mu: f64,
    empirical: Option<&EmpiricalParams>,
) -> Result<ClassificationRecord> {
    let c = surface.curvature(u, v)?;
    let (p, q) = corollary_weights(&c);
    let (alpha_theory, beta_theory) = theoretical_limits(mu, p, q);
    let kind_oracle = surface.classify_by_curvature(u, v, DEFAULT_ZERO_TOL)?;

    let (alpha_emp, beta_emp, kind_limits) = match empirical {
        None => {
            let kind = decide(mu, alpha_theory, beta_theory, THEORY_DECISION_TOL)?;
            (f64::NAN, f64::NAN, kind)
        }
        Some(params) => {
            let cfg = TriangleConfig::new(surface.clone(), ChartPoint::new(u, v), mu)
                .with_a1(params.a1)
                .with_alpha1(params.alpha1)
                .with_step(params.step)
                .with_conv_tol(params.conv_tol)
                .with_max_iters(params.max_iters)
                .with_ray_dir(params.ray_dir.0, params.ray_dir.1);
            let trace = cfg.run(&division_functions(surface))?;
            trace.ensure_converged()?;
            let (a, b) = (trace.final_alpha(), trace.final_beta());
            let kind = decide(mu, a, b, EMPIRICAL_DECISION_TOL)?;
            (a, b, kind)
        }
    };

    Ok(ClassificationRecord {
        surface: surface.name().to_string(),
        u,
        v,
        curvature: c,
        p,
        q,
        alpha_theory,
        beta_theory,
        alpha_emp,
        beta_emp,
        kind_limits,
        kind_oracle,
        agree: kind_limits == kind_oracle,
    })
}

/// Classify a point at the default opening angle pi/2.
pub fn classify_point_default(
    surface: &Surface,
    u: f64,
    v: f64,
    empirical: Option<&EmpiricalParams>,
) -> Result<ClassificationRecord> {
    classify_point(surface, u, v, FRAC_PI_2, empirical)
}

/// Write classification records as CSV.
pub fn write_records_csv<W: Write>(records: &[ClassificationRecord], mut w: W) -> Result<()> {
    writeln!(
        w,
        "surface,u,v,K,k1,k2,p,q,alpha_inf_theory,beta_inf_theory,alpha_inf_emp,beta_inf_emp,kind_limits,kind_oracle,agree"
    )?;
    for r in records {
        let cells = [
            r.u,
            r.v,
            r.curvature.k,
            r.curvature.k1,
            r.curvature.k2,
            r.p,
            r.q,
            r.alpha_theory,
            r.beta_theory,
            r.alpha_emp,
            r.beta_emp,
        ];
        write!(w, "{}", r.surface)?;
        for c in cells {
            write!(w, ",{}", crate::scheme::fmt_float(c))?;
        }
        writeln!(w, ",{},{},{}", r.kind_limits, r.kind_oracle, r.agree)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::gallery;
    use approx::assert_abs_diff_eq;

    fn curvature_at(s: &Surface, u: f64, v: f64) -> CurvatureData {
        s.curvature(u, v).unwrap()
    }

    #[test]
    fn weights_at_reference_points() {
        // Unit sphere: K = 1, k1 = k2 = -1 -> (3, 3).
        let (p, q) = corollary_weights(&curvature_at(&gallery::sphere(1.0), FRAC_PI_2, 0.0));
        assert_abs_diff_eq!(p, 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(q, 3.0, epsilon = 1e-9);
        // Saddle origin: K = -4, k1 = -k2 = 2 -> (1, 17).
        let (p, q) = corollary_weights(&curvature_at(&gallery::saddle(), 0.0, 0.0));
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(q, 17.0, epsilon = 1e-9);
        // Torus inner equator: K = -1, |k1| = |k2| = 1 -> (1, 3).
        let (p, q) = corollary_weights(&curvature_at(&gallery::torus(2.0, 1.0), PI, 0.0));
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(q, 3.0, epsilon = 1e-8);
        // Torus outer equator: K = 1/3, k1, k2 same sign -> p = q = 13/9.
        let (p, q) = corollary_weights(&curvature_at(&gallery::torus(2.0, 1.0), 0.0, 0.0));
        assert_abs_diff_eq!(p, 13.0 / 9.0, epsilon = 1e-8);
        assert_abs_diff_eq!(q, 13.0 / 9.0, epsilon = 1e-8);
        // Flat points: weights collapse to bisection.
        let (p, q) = corollary_weights(&curvature_at(&gallery::plane(), 3.0, -2.0));
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q, 1.0, epsilon = 1e-12);
        let (p, q) = corollary_weights(&curvature_at(&gallery::cylinder(1.0), 0.3, 1.0));
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(q, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn reference_limit_pairs() {
        // Sphere at mu = pi/2: (3, 3) -> both limits pi/10.
        let (a, b) = theoretical_limits(FRAC_PI_2, 3.0, 3.0);
        assert_abs_diff_eq!(a, PI / 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b, PI / 10.0, epsilon = 1e-12);
        // Saddle origin: (1, 17) -> (17 pi / 70, pi / 70).
        let (a, b) = theoretical_limits(FRAC_PI_2, 1.0, 17.0);
        assert_abs_diff_eq!(a, 17.0 * PI / 70.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b, PI / 70.0, epsilon = 1e-12);
        // Torus inner equator: (1, 3) -> (3 pi / 14, pi / 14).
        let (a, b) = theoretical_limits(FRAC_PI_2, 1.0, 3.0);
        assert_abs_diff_eq!(a, 3.0 * PI / 14.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b, PI / 14.0, epsilon = 1e-12);
    }

    #[test]
    fn decide_separates_the_three_kinds() {
        let mu = FRAC_PI_2;
        let third = (PI - mu) / 3.0;
        assert_eq!(
            decide(mu, third, third, 1e-6).unwrap(),
            PointKind::Parabolic
        );
        assert_eq!(
            decide(mu, third - 1e-7, third + 1e-7, 1e-6).unwrap(),
            PointKind::Parabolic
        );
        assert_eq!(decide(mu, 0.3, 0.3, 1e-6).unwrap(), PointKind::Elliptic);
        assert_eq!(decide(mu, 0.4, 0.2, 1e-6).unwrap(), PointKind::Hyperbolic);
        // Equal limits above the bisection value: no weight pair produces
        // this, so it must not be forced into a type.
        assert!(matches!(
            decide(mu, third + 1e-3, third + 1e-3, 1e-6),
            Err(GeodivError::InconclusiveClassification { .. })
        ));
        assert!(decide(mu, f64::NAN, 0.1, 1e-6).is_err());
    }

    #[test]
    fn closed_form_classification_agrees_with_curvature_sign() {
        let torus = gallery::torus(2.0, 1.0);
        let cases: Vec<(Surface, f64, f64, PointKind)> = vec![
            (gallery::plane(), 1.0, -4.0, PointKind::Parabolic),
            (gallery::cylinder(1.0), 0.5, 2.0, PointKind::Parabolic),
            (gallery::sphere(1.0), 1.1, 0.4, PointKind::Elliptic),
            (
                gallery::ellipsoid(1.5, 1.0, 0.75),
                0.9,
                0.3,
                PointKind::Elliptic,
            ),
            (torus.clone(), 0.0, 1.0, PointKind::Elliptic),
            (torus, PI, 1.0, PointKind::Hyperbolic),
            (gallery::saddle(), 0.4, 0.1, PointKind::Hyperbolic),
            (gallery::monkey_saddle(), 0.0, 0.0, PointKind::Parabolic),
            (gallery::monkey_saddle(), 0.5, 0.2, PointKind::Hyperbolic),
        ];
        for (s, u, v, expected) in cases {
            let r = classify_point_default(&s, u, v, None).unwrap();
            assert_eq!(r.kind_limits, expected, "{} at ({u}, {v})", r.surface);
            assert_eq!(r.kind_oracle, expected, "{} at ({u}, {v})", r.surface);
            assert!(r.agree);
            assert!(r.alpha_emp.is_nan() && r.beta_emp.is_nan());
        }
    }

    #[test]
    fn saddle_axis_points_have_unit_p_but_larger_q() {
        // Along |u| = |v| the mean curvature vanishes, so p = 1 exactly
        // while q > 1; the limits split and the point reads hyperbolic.
        let s = gallery::saddle();
        let r = classify_point_default(&s, 0.7, 0.7, None).unwrap();
        assert_abs_diff_eq!(r.p, 1.0, epsilon = 1e-9);
        assert!(r.q > 1.0 + 1e-6);
        assert_eq!(r.kind_limits, PointKind::Hyperbolic);
        assert!(r.agree);
    }

    #[test]
    fn empirical_run_on_the_sphere_matches_theory() {
        // Homogeneous surface: the weights are constant, so the empirical
        // limits must land on the closed form to scheme accuracy.
        let s = gallery::sphere(1.0);
        let r = classify_point_default(&s, 1.1, 0.4, Some(&EmpiricalParams::default())).unwrap();
        assert_eq!(r.kind_limits, PointKind::Elliptic);
        assert!(r.agree);
        assert_abs_diff_eq!(r.alpha_emp, PI / 10.0, epsilon = 1e-5);
        assert_abs_diff_eq!(r.beta_emp, PI / 10.0, epsilon = 1e-5);
        assert_abs_diff_eq!(r.alpha_emp, r.alpha_theory, epsilon = 1e-5);
    }

    #[test]
    fn empirical_run_on_the_plane_is_parabolic() {
        let s = gallery::plane();
        let params = EmpiricalParams {
            step: 5e-4, // flat case needs no fine step
            ..EmpiricalParams::default()
        };
        let r = classify_point_default(&s, 0.0, 0.0, Some(&params)).unwrap();
        assert_eq!(r.kind_limits, PointKind::Parabolic);
        assert!(r.agree);
        assert_abs_diff_eq!(r.alpha_emp, (PI - FRAC_PI_2) / 3.0, epsilon = 1e-6);
    }

    #[test]
    fn division_functions_match_the_weights_pointwise() {
        let s = gallery::torus(2.0, 1.0);
        let div = division_functions(&s);
        for &(u, v) in &[(0.0, 0.5), (PI, 1.0), (1.3, -2.0)] {
            let (p, q) = corollary_weights(&curvature_at(&s, u, v));
            assert_abs_diff_eq!(div.p_at(ChartPoint::new(u, v)).unwrap(), p, epsilon = 1e-12);
            assert_abs_diff_eq!(div.q_at(ChartPoint::new(u, v)).unwrap(), q, epsilon = 1e-12);
        }
        // Out of domain: the weight is rejected, not evaluated to garbage.
        assert!(div.p_at(ChartPoint::new(100.0, 0.0)).is_err());
    }

    #[test]
    fn csv_has_the_pinned_header_and_nan_empirical_columns() {
        let s = gallery::sphere(1.0);
        let r = classify_point_default(&s, 1.1, 0.4, None).unwrap();
        let mut buf = Vec::new();
        write_records_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "surface,u,v,K,k1,k2,p,q,alpha_inf_theory,beta_inf_theory,alpha_inf_emp,beta_inf_emp,kind_limits,kind_oracle,agree"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0], "sphere");
        assert_eq!(row[10], "NaN");
        assert_eq!(row[11], "NaN");
        assert_eq!(row[12], "elliptic");
        assert_eq!(row[13], "elliptic");
        assert_eq!(row[14], "true");
    }
}
