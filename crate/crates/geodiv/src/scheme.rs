//! The recursive angle-division iteration on a geodesic triangle.
//!
//! Two geodesic rays leave a vertex V at angle mu. A transversal is shot
//! from the point A_1 on the first ray at the full angle alpha_1 to the
//! segment A_1 V; it crosses the second ray at B_1. The full angle at each
//! new crossing is divided — by 1 + q(B_k) at B-points, by 1 + p(A_{k+1})
//! at A-points — and the sub-angle adjacent to the V-segment launches the
//! next transversal. The divided angles alpha_k, beta_k converge to limits
//! determined only by mu and the division weights at V:
//!
//! ```text
//! alpha_inf = q(V) (pi - mu) / (p(V) + q(V) + p(V) q(V))
//! beta_inf  = p(V) (pi - mu) / (p(V) + q(V) + p(V) q(V))
//! ```
//!
//! Each iteration also cross-checks two exact curvature identities on the
//! regions swept by the construction (see [`IterationStep::res_eq1`] and
//! [`IterationStep::res_eq2`]), and tracks the contraction of the iteration
//! toward the plane fixed-point map
//!
//! ```text
//! T(phi) = (phi + q(V)(pi - mu)) / ((1 + p(V))(1 + q(V)))
//! ```
//!
//! whose contraction factor is rho = 1/((1+p(V))(1+q(V))).

use std::io::Write;
use std::sync::Arc;

use crate::error::{GeodivError, Result};
use crate::gauss_bonnet::ChartPolygon;
use crate::geodesic::{angle_between, integrate, integrate_clipped, rotate_tangent, ChartPoint};
use crate::intersection::shoot_first_intersection;
use crate::surface::Surface;

use std::f64::consts::PI;

/// Default arclength of V–A_1 along the first ray.
pub const DEFAULT_A1: f64 = 0.25;
/// Default full initial angle at A_1.
pub const DEFAULT_ALPHA1: f64 = PI / 4.0;
/// Default stop threshold on |alpha_{k+1} - alpha_k|.
pub const DEFAULT_CONV_TOL: f64 = 1e-10;
/// Default iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 200;
/// Angles this close to 0 or pi cannot be divided meaningfully.
const ANGLE_GUARD: f64 = 1e-9;

/// Division weights p (at A-points) and q (at B-points); both must be
/// positive everywhere they are evaluated.
#[derive(Clone)]
pub struct DivisionFunctions {
    p: Arc<dyn Fn(ChartPoint) -> f64 + Send + Sync>,
    q: Arc<dyn Fn(ChartPoint) -> f64 + Send + Sync>,
    label: String,
}

impl std::fmt::Debug for DivisionFunctions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DivisionFunctions")
            .field("label", &self.label)
            .finish()
    }
}

impl DivisionFunctions {
    pub fn new(
        p: impl Fn(ChartPoint) -> f64 + Send + Sync + 'static,
        q: impl Fn(ChartPoint) -> f64 + Send + Sync + 'static,
        label: &str,
    ) -> Self {
        DivisionFunctions {
            p: Arc::new(p),
            q: Arc::new(q),
            label: label.to_string(),
        }
    }

    /// Constant weights.
    pub fn constant(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && q > 0.0) {
            return Err(GeodivError::InvalidParameter(format!(
                "division weights must be positive, got p={p}, q={q}"
            )));
        }
        Ok(DivisionFunctions::new(
            move |_| p,
            move |_| q,
            &format!("const(p={p}, q={q})"),
        ))
    }

    /// p = q = 1: every full angle is bisected.
    pub fn bisection() -> Self {
        DivisionFunctions::new(|_| 1.0, |_| 1.0, "bisection")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn p_at(&self, x: ChartPoint) -> Result<f64> {
        let val = (self.p)(x);
        if val.is_nan() || val <= 0.0 {
            return Err(GeodivError::InvalidParameter(format!(
                "division weight p({:.6}, {:.6}) = {val} is not positive",
                x.u, x.v
            )));
        }
        Ok(val)
    }

    pub fn q_at(&self, x: ChartPoint) -> Result<f64> {
        let val = (self.q)(x);
        if val.is_nan() || val <= 0.0 {
            return Err(GeodivError::InvalidParameter(format!(
                "division weight q({:.6}, {:.6}) = {val} is not positive",
                x.u, x.v
            )));
        }
        Ok(val)
    }
}

/// Geometry and stopping parameters for a scheme run.
#[derive(Debug, Clone)]
pub struct TriangleConfig {
    pub surface: Surface,
    /// The fixed vertex V.
    pub vertex: ChartPoint,
    /// Angle between the two rays at V, in (0, pi).
    pub mu: f64,
    /// Chart direction of the first ray; the second is this rotated
    /// counterclockwise by mu. Need not be normalized.
    pub ray_dir: (f64, f64),
    /// Arclength of V–A_1 along the first ray.
    pub a1: f64,
    /// Full initial angle at A_1, in (0, pi - mu).
    pub alpha1: f64,
    /// Geodesic integration step.
    pub step: f64,
    pub max_iters: usize,
    /// Stop once |alpha_{k+1} - alpha_k| falls below this.
    pub conv_tol: f64,
}

impl TriangleConfig {
    pub fn new(surface: Surface, vertex: ChartPoint, mu: f64) -> Self {
        TriangleConfig {
            surface,
            vertex,
            mu,
            ray_dir: (1.0, 0.0),
            a1: DEFAULT_A1,
            alpha1: DEFAULT_ALPHA1,
            step: DEFAULT_A1 / 1000.0,
            max_iters: DEFAULT_MAX_ITERS,
            conv_tol: DEFAULT_CONV_TOL,
        }
    }

    pub fn with_ray_dir(mut self, du: f64, dv: f64) -> Self {
        self.ray_dir = (du, dv);
        self
    }

    pub fn with_a1(mut self, a1: f64) -> Self {
        self.a1 = a1;
        self.step = a1 / 1000.0;
        self
    }

    pub fn with_alpha1(mut self, alpha1: f64) -> Self {
        self.alpha1 = alpha1;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_conv_tol(mut self, tol: f64) -> Self {
        self.conv_tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !self.surface.contains(self.vertex.u, self.vertex.v) {
            return Err(GeodivError::OutOfDomain {
                u: self.vertex.u,
                v: self.vertex.v,
            });
        }
        if !(self.mu > 0.0 && self.mu < PI) {
            return Err(GeodivError::InvalidParameter(format!(
                "mu must lie in (0, pi), got {}",
                self.mu
            )));
        }
        if !(self.a1 > 0.0 && self.a1.is_finite()) {
            return Err(GeodivError::InvalidParameter(format!(
                "a1 must be positive, got {}",
                self.a1
            )));
        }
        // Only (0, pi) is checkable statically; whether the initial shot
        // actually reaches the second ray is a geometric question answered
        // at run time (NoIntersection otherwise).
        if !(self.alpha1 > 0.0 && self.alpha1 < PI) {
            return Err(GeodivError::InvalidParameter(format!(
                "alpha1 must lie in (0, pi), got {}",
                self.alpha1
            )));
        }
        if !(self.step > 0.0 && self.step <= self.a1) {
            return Err(GeodivError::InvalidParameter(format!(
                "step must lie in (0, a1], got {}",
                self.step
            )));
        }
        if self.max_iters == 0 {
            return Err(GeodivError::InvalidParameter(
                "max_iters must be at least 1".into(),
            ));
        }
        if self.conv_tol.is_nan() || self.conv_tol <= 0.0 {
            return Err(GeodivError::InvalidParameter(format!(
                "conv_tol must be positive, got {}",
                self.conv_tol
            )));
        }
        Ok(())
    }

    /// Run the iteration with the given division weights.
    pub fn run(&self, div: &DivisionFunctions) -> Result<IterationTrace> {
        run_scheme(self, div)
    }
}

/// One iteration of the scheme (plus a final partial row holding the last
/// A-point). Fields that require data beyond the recorded iteration are NaN
/// on the final row: everything involving B_k or the (k+1)-th crossing.
#[derive(Debug, Clone, Copy)]
pub struct IterationStep {
    /// 1-based iteration index.
    pub k: usize,
    /// A_k on the first ray.
    pub a: ChartPoint,
    /// B_k on the second ray.
    pub b: ChartPoint,
    /// Arclength V–A_k.
    pub len_va: f64,
    /// Arclength V–B_k.
    pub len_vb: f64,
    /// Divided angle launching the k-th A-transversal (alpha_1 is the given
    /// full angle).
    pub alpha: f64,
    /// Divided angle launching the k-th B-transversal.
    pub beta: f64,
    /// Full measured angle at A_k before division (= alpha for k = 1).
    pub raw_alpha: f64,
    /// Full measured angle at B_k before division.
    pub raw_beta: f64,
    pub p_at_a: f64,
    pub q_at_b: f64,
    /// ∬K over the triangle A_k B_k A_{k+1}.
    pub int_aba: f64,
    /// ∬K over the triangle A_k B_k V.
    pub int_abv: f64,
    /// ∬|K| over the triangle A_k B_k V (not exported to CSV; bounds the
    /// integral terms of every later step, since each A_j B_j A_{j+1}
    /// region with j >= k nests inside this one).
    pub abs_int_abv: f64,
    /// |alpha_{k+1} - T(alpha_k)| against the plane fixed-point map at V.
    pub eps: f64,
    /// ∬K − (alpha_k + q beta_k − raw_alpha_{k+1}) over A_k B_k A_{k+1};
    /// zero in exact arithmetic.
    pub res_eq1: f64,
    /// ∬K − (alpha_k + raw_beta_k + mu − pi) over A_k B_k V; zero in exact
    /// arithmetic.
    pub res_eq2: f64,
}

/// Full record of a scheme run.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    pub steps: Vec<IterationStep>,
    /// Whether both |alpha_{k+1} - alpha_k| and |beta_{k+1} - beta_k| fell
    /// below conv_tol before the iteration cap.
    pub converged: bool,
    pub mu: f64,
    pub vertex: ChartPoint,
    pub p_at_v: f64,
    pub q_at_v: f64,
    /// Theoretical limit of alpha_k.
    pub alpha_limit: f64,
    /// Theoretical limit of beta_k.
    pub beta_limit: f64,
    /// Contraction factor of the fixed-point map at V.
    pub rho: f64,
}

impl IterationTrace {
    /// Last computed alpha (the final partial row's).
    pub fn final_alpha(&self) -> f64 {
        self.steps.last().map_or(f64::NAN, |s| s.alpha)
    }

    /// Last computed beta (the final complete row's).
    pub fn final_beta(&self) -> f64 {
        self.steps
            .iter()
            .rev()
            .find(|s| !s.beta.is_nan())
            .map_or(f64::NAN, |s| s.beta)
    }

    /// Error if the run stopped on the iteration cap instead of converging.
    pub fn ensure_converged(&self) -> Result<&Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(GeodivError::NoConvergence {
                iterations: self.steps.len().saturating_sub(1),
            })
        }
    }

    /// Largest |res_eq1| and |res_eq2| over complete rows.
    pub fn max_residuals(&self) -> (f64, f64) {
        let mut r1 = 0.0_f64;
        let mut r2 = 0.0_f64;
        for s in &self.steps {
            if !s.res_eq1.is_nan() {
                r1 = r1.max(s.res_eq1.abs());
            }
            if !s.res_eq2.is_nan() {
                r2 = r2.max(s.res_eq2.abs());
            }
        }
        (r1, r2)
    }

    /// Residuals of the two recurrences in divided-angle form, one pair per
    /// complete step: |alpha_{k+1} − (alpha_k + q beta_k − ∬K)/(1+p)| over
    /// A_k B_k A_{k+1}, and |beta_k − (pi − mu − alpha_k + ∬K)/(1+q)| over
    /// A_k B_k V.
    pub fn verify_recurrence(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for w in self.steps.windows(2) {
            let (s, next) = (&w[0], &w[1]);
            if s.beta.is_nan() {
                break;
            }
            let rhs1 = (s.alpha + s.q_at_b * s.beta - s.int_aba) / (1.0 + next.p_at_a);
            let rhs2 = (PI - self.mu - s.alpha + s.int_abv) / (1.0 + s.q_at_b);
            out.push(((next.alpha - rhs1).abs(), (s.beta - rhs2).abs()));
        }
        out
    }

    /// Per complete step: (epsilon_k, ratio_k) where ratio_k =
    /// |alpha_{k+1} − alpha_inf| / |alpha_k − alpha_inf|. The ratio is NaN
    /// where the denominator vanishes; near the limit it is noise-dominated,
    /// so use [`IterationTrace::contraction_ratios`] with a floor for
    /// assertions.
    pub fn contraction_diagnostics(&self) -> Vec<(f64, f64)> {
        self.steps
            .windows(2)
            .take_while(|w| !w[0].eps.is_nan())
            .map(|w| {
                let d0 = (w[0].alpha - self.alpha_limit).abs();
                let d1 = (w[1].alpha - self.alpha_limit).abs();
                (w[0].eps, if d0 > 0.0 { d1 / d0 } else { f64::NAN })
            })
            .collect()
    }

    /// Per-step ratios |alpha_{k+1} - alpha_inf| / |alpha_k - alpha_inf|,
    /// skipping steps where the denominator is below `floor` (too close to
    /// the limit for the quotient to mean anything).
    pub fn contraction_ratios(&self, floor: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for w in self.steps.windows(2) {
            let d0 = (w[0].alpha - self.alpha_limit).abs();
            let d1 = (w[1].alpha - self.alpha_limit).abs();
            if d0 > floor && d1 > 0.0 {
                out.push(d1 / d0);
            }
        }
        out
    }

    /// Write the iteration table as CSV (17 significant digits, NaN for the
    /// final row's missing fields).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "k,au,av,bu,bv,len_VA,len_VB,alpha,beta,raw_alpha,raw_beta,int_ABA,int_ABV,eps,res_eq1,res_eq2"
        )?;
        for s in &self.steps {
            let cells = [
                s.a.u,
                s.a.v,
                s.b.u,
                s.b.v,
                s.len_va,
                s.len_vb,
                s.alpha,
                s.beta,
                s.raw_alpha,
                s.raw_beta,
                s.int_aba,
                s.int_abv,
                s.eps,
                s.res_eq1,
                s.res_eq2,
            ];
            write!(w, "{}", s.k)?;
            for c in cells {
                write!(w, ",{}", fmt_float(c))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }
}

/// 17 significant digits: round-trips f64 exactly.
pub(crate) fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Limits of the divided angles for weights (p, q) at V and opening mu.
pub fn theoretical_limits(mu: f64, p: f64, q: f64) -> (f64, f64) {
    let d = p + q + p * q;
    (q * (PI - mu) / d, p * (PI - mu) / d)
}

/// Contraction factor of the fixed-point map at V.
pub fn contraction_rho(p: f64, q: f64) -> f64 {
    1.0 / ((1.0 + p) * (1.0 + q))
}

/// The plane fixed-point map T(phi).
pub fn plane_map(mu: f64, p: f64, q: f64, phi: f64) -> f64 {
    (phi + q * (PI - mu)) / ((1.0 + p) * (1.0 + q))
}

/// Closed-form angle sequences on the plane with constant weights:
/// beta_k = (pi - mu - alpha_k)/(1+q), alpha_{k+1} = T(alpha_k).
/// Returns (alpha_1..alpha_{iters+1}, beta_1..beta_iters).
pub fn plane_oracle(mu: f64, alpha1: f64, p: f64, q: f64, iters: usize) -> (Vec<f64>, Vec<f64>) {
    let mut alphas = Vec::with_capacity(iters + 1);
    let mut betas = Vec::with_capacity(iters);
    let mut a = alpha1;
    alphas.push(a);
    for _ in 0..iters {
        betas.push((PI - mu - a) / (1.0 + q));
        a = plane_map(mu, p, q, a);
        alphas.push(a);
    }
    (alphas, betas)
}

fn run_scheme(cfg: &TriangleConfig, div: &DivisionFunctions) -> Result<IterationTrace> {
    cfg.validate()?;
    let surface = &cfg.surface;
    let step = cfg.step;

    // Rays from V: the first along ray_dir, the second rotated ccw by mu.
    // Because the second ray is the ccw one, A-side transversals open
    // clockwise (toward the wedge) and B-side ones counterclockwise.
    let dir_a = crate::geodesic::TangentVector::new(cfg.vertex, cfg.ray_dir.0, cfg.ray_dir.1);
    let dir_b = rotate_tangent(surface, &dir_a, cfg.mu)?;
    let ray_a = integrate_clipped(surface, dir_a, 1.05 * cfg.a1, step)?;
    if ray_a.length() < cfg.a1 {
        return Err(GeodivError::ChartBoundaryExceeded {
            s: ray_a.length(),
            u: ray_a.end().u,
            v: ray_a.end().v,
        });
    }
    let ray_b = integrate_clipped(surface, dir_b, 25.0 * cfg.a1, step)?;

    let p_at_v = div.p_at(cfg.vertex)?;
    let q_at_v = div.q_at(cfg.vertex)?;
    let (alpha_limit, beta_limit) = theoretical_limits(cfg.mu, p_at_v, q_at_v);
    let rho = contraction_rho(p_at_v, q_at_v);

    let mut steps: Vec<IterationStep> = Vec::new();
    let mut converged = false;

    let mut s_a = cfg.a1;
    let mut alpha = cfg.alpha1;
    let mut raw_alpha = cfg.alpha1;
    let mut prev_beta = f64::NAN;
    let mut budget = 50.0 * cfg.a1;

    for k in 1..=cfg.max_iters {
        let a_pt = ray_a.point_at(s_a);
        let p_at_a = div.p_at(a_pt)?;

        // A-side transversal: rotate the toward-V direction clockwise by
        // alpha so the shot opens into the wedge between the rays.
        let toward_v = ray_a.tangent_at(s_a).negated();
        let launch_a = rotate_tangent(surface, &toward_v, -alpha)?;
        let (shot_a, hit_b) = shoot_first_intersection(surface, launch_a, &ray_b, budget, step)?;
        let s_b = hit_b.s_second;
        let b_pt = hit_b.point;
        let q_at_b = div.q_at(b_pt)?;

        // Full angle at B_k between the segment toward V and the incoming
        // transversal.
        let down_ray_b = ray_b.tangent_at(s_b).negated();
        let incoming_a = shot_a.end().tangent().negated();
        let raw_beta = angle_between(surface, &down_ray_b, &incoming_a)?;
        if !(ANGLE_GUARD..=PI - ANGLE_GUARD).contains(&raw_beta) {
            return Err(GeodivError::DivisionDomain { angle: raw_beta });
        }
        let beta = raw_beta / (1.0 + q_at_b);

        // Triangle A_k B_k V: the transversal, back down the second ray,
        // then out along the first.
        let side_b_to_v = integrate(surface, down_ray_b, s_b, step)?;
        let side_v_to_a = ray_a.truncated(s_a)?;
        let region_abv = ChartPolygon::new(vec![shot_a.clone(), side_b_to_v, side_v_to_a])?;
        let int_abv = region_abv.curvature_integral()?;
        let abs_int_abv = region_abv.abs_curvature_integral()?;
        let res_eq2 = int_abv - (alpha + raw_beta + cfg.mu - PI);

        // B-side transversal: rotate the toward-V direction
        // counterclockwise by beta.
        let launch_b = rotate_tangent(surface, &down_ray_b, beta)?;
        let (shot_b, hit_a) = shoot_first_intersection(surface, launch_b, &ray_a, budget, step)?;
        let s_a_next = hit_a.s_second;
        let a_next = hit_a.point;

        let down_ray_a_next = ray_a.tangent_at(s_a_next).negated();
        let incoming_b = shot_b.end().tangent().negated();
        let raw_alpha_next = angle_between(surface, &down_ray_a_next, &incoming_b)?;
        if !(ANGLE_GUARD..=PI - ANGLE_GUARD).contains(&raw_alpha_next) {
            return Err(GeodivError::DivisionDomain {
                angle: raw_alpha_next,
            });
        }
        let p_next = div.p_at(a_next)?;
        let alpha_next = raw_alpha_next / (1.0 + p_next);

        // Triangle A_k B_k A_{k+1}: the two transversals and the stretch of
        // the first ray between the crossings.
        let up_ray = integrate(surface, ray_a.tangent_at(s_a_next), s_a - s_a_next, step)?;
        let int_aba =
            ChartPolygon::new(vec![shot_a.clone(), shot_b, up_ray])?.curvature_integral()?;
        let res_eq1 = int_aba - (alpha + q_at_b * beta - raw_alpha_next);

        let eps = (alpha_next - plane_map(cfg.mu, p_at_v, q_at_v, alpha)).abs();

        steps.push(IterationStep {
            k,
            a: a_pt,
            b: b_pt,
            len_va: s_a,
            len_vb: s_b,
            alpha,
            beta,
            raw_alpha,
            raw_beta,
            p_at_a,
            q_at_b,
            int_aba,
            int_abv,
            abs_int_abv,
            eps,
            res_eq1,
            res_eq2,
        });

        budget = 10.0 * (s_a + s_b + shot_a.length());
        let delta_alpha = (alpha_next - alpha).abs();
        let delta_beta = (beta - prev_beta).abs();
        prev_beta = beta;
        s_a = s_a_next;
        raw_alpha = raw_alpha_next;
        alpha = alpha_next;

        // Both angle sequences must have settled (delta_beta is NaN on the
        // first pass, so a run never stops after a single iteration).
        if delta_alpha < cfg.conv_tol && delta_beta < cfg.conv_tol {
            converged = true;
            break;
        }
    }

    // Final partial row: the last A-point, with no B-side data.
    let a_pt = ray_a.point_at(s_a);
    steps.push(IterationStep {
        k: steps.len() + 1,
        a: a_pt,
        b: ChartPoint::new(f64::NAN, f64::NAN),
        len_va: s_a,
        len_vb: f64::NAN,
        alpha,
        beta: f64::NAN,
        raw_alpha,
        raw_beta: f64::NAN,
        p_at_a: div.p_at(a_pt)?,
        q_at_b: f64::NAN,
        int_aba: f64::NAN,
        int_abv: f64::NAN,
        abs_int_abv: f64::NAN,
        eps: f64::NAN,
        res_eq1: f64::NAN,
        res_eq2: f64::NAN,
    });

    Ok(IterationTrace {
        steps,
        converged,
        mu: cfg.mu,
        vertex: cfg.vertex,
        p_at_v,
        q_at_v,
        alpha_limit,
        beta_limit,
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::gallery;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn plane_config(mu: f64, alpha1: f64) -> TriangleConfig {
        TriangleConfig::new(gallery::plane(), ChartPoint::new(0.0, 0.0), mu)
            .with_a1(1.0)
            .with_alpha1(alpha1)
            .with_step(2e-3)
            .with_conv_tol(1e-12)
    }

    #[test]
    fn limits_and_rho_formulas() {
        let (a, b) = theoretical_limits(FRAC_PI_2, 1.0, 1.0);
        assert_abs_diff_eq!(a, FRAC_PI_2 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, FRAC_PI_2 / 3.0, epsilon = 1e-15);
        // p = q: both limits collapse to (pi - mu)/(2 + p).
        let (a, b) = theoretical_limits(0.8, 3.0, 3.0);
        assert_abs_diff_eq!(a, (PI - 0.8) / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a, b, epsilon = 1e-15);
        // Fixed point of the plane map is the alpha limit.
        let (p, q) = (1.7, 0.4);
        let (a, _) = theoretical_limits(1.1, p, q);
        assert_abs_diff_eq!(plane_map(1.1, p, q, a), a, epsilon = 1e-15);
        assert_abs_diff_eq!(contraction_rho(1.0, 2.0), 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn plane_run_matches_the_closed_form_recurrence() {
        let (p, q) = (1.0, 2.0);
        let mu = FRAC_PI_2;
        let alpha1 = 0.3 * (PI - mu);
        let cfg = plane_config(mu, alpha1);
        let trace = cfg
            .run(&DivisionFunctions::constant(p, q).unwrap())
            .unwrap();
        assert!(trace.converged);
        let iters = trace.steps.len() - 1;
        let (alphas, betas) = plane_oracle(mu, alpha1, p, q, iters);
        for (i, s) in trace.steps.iter().enumerate() {
            assert_abs_diff_eq!(s.alpha, alphas[i], epsilon = 1e-8);
            if !s.beta.is_nan() {
                assert_abs_diff_eq!(s.beta, betas[i], epsilon = 1e-8);
            }
        }
        assert_abs_diff_eq!(trace.final_alpha(), trace.alpha_limit, epsilon = 1e-9);
        assert_abs_diff_eq!(trace.final_beta(), trace.beta_limit, epsilon = 1e-8);
        // mu = pi/2, p=1, q=2: alpha -> 2(pi/2)/5 = pi/5, beta -> pi/10.
        assert_abs_diff_eq!(trace.alpha_limit, PI / 5.0, epsilon = 1e-15);
        assert_abs_diff_eq!(trace.beta_limit, PI / 10.0, epsilon = 1e-15);
    }

    #[test]
    fn plane_bisection_converges_to_a_third() {
        let mu = 1.0;
        let cfg = plane_config(mu, 0.6 * (PI - mu));
        let trace = cfg.run(&DivisionFunctions::bisection()).unwrap();
        assert!(trace.converged);
        assert_abs_diff_eq!(trace.final_alpha(), (PI - mu) / 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(trace.final_beta(), (PI - mu) / 3.0, epsilon = 1e-8);
    }

    #[test]
    fn plane_residuals_and_eps_are_noise() {
        let cfg = plane_config(FRAC_PI_2, 0.5);
        let trace = cfg
            .run(&DivisionFunctions::constant(1.0, 2.0).unwrap())
            .unwrap();
        let (r1, r2) = trace.max_residuals();
        assert!(r1 < 1e-9, "eq1 residual {r1:.3e}");
        assert!(r2 < 1e-9, "eq2 residual {r2:.3e}");
        // On the plane the iteration IS the fixed-point map.
        for s in &trace.steps {
            if !s.eps.is_nan() {
                assert!(s.eps < 1e-9, "eps {:.3e} at k={}", s.eps, s.k);
            }
        }
    }

    #[test]
    fn plane_contraction_ratio_equals_rho_exactly() {
        let (p, q) = (1.0, 2.0);
        let cfg = plane_config(FRAC_PI_2, 0.5);
        let trace = cfg
            .run(&DivisionFunctions::constant(p, q).unwrap())
            .unwrap();
        let ratios = trace.contraction_ratios(1e-6);
        assert!(ratios.len() >= 3);
        for r in ratios {
            assert_abs_diff_eq!(r, contraction_rho(p, q), epsilon = 1e-4);
        }
    }

    #[test]
    fn sphere_run_converges_to_the_closed_form_limits() {
        let s = gallery::sphere(1.0);
        let cfg = TriangleConfig::new(s, ChartPoint::new(1.1, 0.4), FRAC_PI_2)
            .with_a1(0.25)
            .with_step(5e-4)
            .with_conv_tol(1e-8);
        let div = DivisionFunctions::constant(1.0, 2.0).unwrap();
        let trace = cfg.run(&div).unwrap();
        assert!(trace.converged);
        assert_abs_diff_eq!(trace.final_alpha(), trace.alpha_limit, epsilon = 1e-6);
        assert_abs_diff_eq!(trace.final_beta(), trace.beta_limit, epsilon = 1e-6);
        // Lengths contract toward V.
        let l0 = trace.steps[0].len_va;
        let l_last = trace.steps.last().unwrap().len_va;
        assert!(l_last < 0.5 * l0);
        let (r1, r2) = trace.max_residuals();
        assert!(r1 < 1e-6, "eq1 residual {r1:.3e}");
        assert!(r2 < 1e-6, "eq2 residual {r2:.3e}");
    }

    #[test]
    fn saddle_run_with_position_dependent_weights() {
        // Weights vary along the rays; the limits use their values at V.
        let s = gallery::saddle();
        let div = DivisionFunctions::new(
            |x: ChartPoint| 1.0 + x.u * x.u + x.v * x.v,
            |x: ChartPoint| 2.0 + x.u.abs(),
            "quadratic",
        );
        let v = ChartPoint::new(0.2, 0.1);
        let cfg = TriangleConfig::new(s, v, 1.2)
            .with_a1(0.2)
            .with_step(4e-4)
            .with_conv_tol(1e-8);
        let trace = cfg.run(&div).unwrap();
        assert!(trace.converged);
        let p_v = 1.0 + 0.2 * 0.2 + 0.1 * 0.1;
        let q_v = 2.2;
        assert_abs_diff_eq!(trace.p_at_v, p_v, epsilon = 1e-15);
        assert_abs_diff_eq!(trace.q_at_v, q_v, epsilon = 1e-15);
        let (al, bl) = theoretical_limits(1.2, p_v, q_v);
        assert_abs_diff_eq!(trace.final_alpha(), al, epsilon = 1e-5);
        assert_abs_diff_eq!(trace.final_beta(), bl, epsilon = 1e-5);
    }

    #[test]
    fn exhausting_the_cap_reports_no_convergence() {
        let cfg = plane_config(FRAC_PI_2, 0.5)
            .with_max_iters(3)
            .with_conv_tol(1e-30);
        let trace = cfg.run(&DivisionFunctions::bisection()).unwrap();
        assert!(!trace.converged);
        assert_eq!(trace.steps.len(), 4); // 3 complete + final partial
        assert!(matches!(
            trace.ensure_converged(),
            Err(GeodivError::NoConvergence { iterations: 3 })
        ));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mk = || TriangleConfig::new(gallery::plane(), ChartPoint::new(0.0, 0.0), FRAC_PI_2);
        assert!(mk()
            .with_alpha1(PI)
            .run(&DivisionFunctions::bisection())
            .is_err());
        assert!(mk()
            .with_alpha1(-0.1)
            .run(&DivisionFunctions::bisection())
            .is_err());
        assert!(mk()
            .with_a1(0.0)
            .run(&DivisionFunctions::bisection())
            .is_err());
        let mut bad_mu = mk();
        bad_mu.mu = PI;
        assert!(bad_mu.run(&DivisionFunctions::bisection()).is_err());
        assert!(DivisionFunctions::constant(0.0, 1.0).is_err());
        assert!(DivisionFunctions::constant(1.0, -2.0).is_err());
    }

    #[test]
    fn too_wide_initial_angle_fails_at_run_time() {
        // alpha1 within (0, pi) passes validation, but on the plane a shot
        // at >= pi - mu never reaches the second ray.
        let cfg = TriangleConfig::new(gallery::plane(), ChartPoint::new(0.0, 0.0), FRAC_PI_2)
            .with_a1(0.5)
            .with_alpha1(FRAC_PI_2 + 0.2)
            .with_step(5e-2);
        assert!(matches!(
            cfg.run(&DivisionFunctions::bisection()),
            Err(GeodivError::NoIntersection { .. })
        ));
    }

    #[test]
    fn csv_round_trips_and_marks_the_final_row() {
        let cfg = plane_config(FRAC_PI_2, 0.5)
            .with_max_iters(4)
            .with_conv_tol(1e-30);
        let trace = cfg.run(&DivisionFunctions::bisection()).unwrap();
        let csv = trace.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "k,au,av,bu,bv,len_VA,len_VB,alpha,beta,raw_alpha,raw_beta,int_ABA,int_ABV,eps,res_eq1,res_eq2"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), trace.steps.len());
        // Numeric cells parse back to the exact stored values.
        let first: Vec<&str> = rows[0].split(',').collect();
        assert_eq!(first[0], "1");
        assert_eq!(first[7].parse::<f64>().unwrap(), trace.steps[0].alpha);
        assert_eq!(first[5].parse::<f64>().unwrap(), trace.steps[0].len_va);
        // Final row has NaN in the B-side cells.
        let last: Vec<&str> = rows.last().unwrap().split(',').collect();
        assert_eq!(last[3], "NaN");
        assert_eq!(last[8], "NaN");
        assert!(last[7].parse::<f64>().unwrap().is_finite());
    }

    #[test]
    fn recurrence_residuals_are_the_scaled_row_residuals() {
        let s = gallery::sphere(1.0);
        let cfg = TriangleConfig::new(s, ChartPoint::new(1.1, 0.4), FRAC_PI_2)
            .with_a1(0.25)
            .with_step(1e-3)
            .with_conv_tol(1e-7);
        let trace = cfg
            .run(&DivisionFunctions::constant(2.0, 3.0).unwrap())
            .unwrap();
        let residuals = trace.verify_recurrence();
        assert_eq!(residuals.len(), trace.steps.len() - 1);
        for (i, (r1, r2)) in residuals.iter().enumerate() {
            let s = &trace.steps[i];
            let next = &trace.steps[i + 1];
            assert_abs_diff_eq!(*r1, s.res_eq1.abs() / (1.0 + next.p_at_a), epsilon = 1e-12);
            assert_abs_diff_eq!(*r2, s.res_eq2.abs() / (1.0 + s.q_at_b), epsilon = 1e-12);
            assert!(*r1 < 1e-5 && *r2 < 1e-5);
        }
    }

    #[test]
    fn integral_terms_nest_inside_the_first_region() {
        // Each A_k B_k A_{k+1} sits inside A_1 B_1 V, and the regions are
        // pairwise disjoint, so the series of integral terms is dominated
        // by the first region's total absolute curvature.
        let s = gallery::sphere(1.0);
        let cfg = TriangleConfig::new(s, ChartPoint::new(1.1, 0.4), FRAC_PI_2)
            .with_a1(0.3)
            .with_step(1e-3)
            .with_conv_tol(1e-9);
        let trace = cfg.run(&DivisionFunctions::bisection()).unwrap();
        let total: f64 = trace
            .steps
            .iter()
            .filter(|s| !s.int_aba.is_nan())
            .map(|s| s.int_aba.abs())
            .sum();
        assert!(trace.steps[0].abs_int_abv > 0.0);
        assert!(
            total <= trace.steps[0].abs_int_abv + 1e-8,
            "sum {total:.3e} vs bound {:.3e}",
            trace.steps[0].abs_int_abv
        );
        for s in &trace.steps {
            if !s.int_aba.is_nan() {
                assert!(s.int_aba.abs() <= s.abs_int_abv + 1e-12);
            }
        }
    }

    #[test]
    fn tiny_sphere_triangles_follow_the_plane_recurrence() {
        // Curvature terms scale with triangle area, so a diameter-1e-3
        // construction tracks the flat recurrence to ~1e-6.
        let s = gallery::sphere(1.0);
        let cfg = TriangleConfig::new(s, ChartPoint::new(1.1, 0.4), FRAC_PI_2)
            .with_a1(1e-3)
            .with_alpha1(PI / 4.0)
            .with_max_iters(4)
            .with_conv_tol(1e-30);
        let trace = cfg.run(&DivisionFunctions::bisection()).unwrap();
        let (alphas, betas) = plane_oracle(FRAC_PI_2, PI / 4.0, 1.0, 1.0, 4);
        for (i, s) in trace.steps.iter().enumerate() {
            assert_abs_diff_eq!(s.alpha, alphas[i], epsilon = 1e-6);
            if !s.beta.is_nan() {
                assert_abs_diff_eq!(s.beta, betas[i], epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn limits_do_not_depend_on_the_initial_transversal() {
        let run = |a1: f64, alpha1: f64| {
            TriangleConfig::new(gallery::plane(), ChartPoint::new(0.0, 0.0), 1.0)
                .with_a1(a1)
                .with_alpha1(alpha1)
                .with_step(a1 / 200.0)
                .with_conv_tol(1e-10)
                .run(&DivisionFunctions::constant(1.0, 2.0).unwrap())
                .unwrap()
        };
        let t1 = run(1.0, 0.4);
        let t2 = run(0.6, 1.3);
        assert!(t1.converged && t2.converged);
        assert!((t1.final_alpha() - t2.final_alpha()).abs() < 10.0 * 1e-10);
        assert!((t1.final_beta() - t2.final_beta()).abs() < 10.0 * 1e-10);
    }

    #[test]
    fn trace_exposes_monotone_length_contraction() {
        let cfg = plane_config(FRAC_PI_2, 0.5);
        let trace = cfg
            .run(&DivisionFunctions::constant(2.0, 3.0).unwrap())
            .unwrap();
        for w in trace.steps.windows(2) {
            assert!(w[1].len_va < w[0].len_va);
            if !w[1].len_vb.is_nan() {
                assert!(w[1].len_vb < w[0].len_vb);
            }
        }
    }
}
