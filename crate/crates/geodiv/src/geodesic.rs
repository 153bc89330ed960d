//! Unit-speed geodesics by fixed-step RK4.
//!
//! The geodesic equation in chart coordinates,
//!
//! ```text
//! u'' = -(Γ^u_uu u'^2 + 2 Γ^u_uv u'v' + Γ^u_vv v'^2)
//! v'' = -(Γ^v_uu u'^2 + 2 Γ^v_uv u'v' + Γ^v_vv v'^2)
//! ```
//!
//! is integrated as a first-order system in (u, v, u', v') with the classic
//! fourth-order Runge-Kutta scheme. Initial velocities are normalized to
//! unit metric speed, so arclength equals the integration parameter.
//! Between stored nodes a path is evaluated by cubic Hermite interpolation,
//! which keeps positions at O(h^4) and tangents at O(h^3) — the same order
//! as the integrator itself.

use crate::error::{GeodivError, Result};
use crate::surface::Surface;

/// Vectors shorter than this (in metric norm) cannot define a direction.
pub const ZERO_NORM_TOL: f64 = 1e-12;
/// Chart-distance tolerance for [`connect`].
pub const CONNECT_TOL: f64 = 1e-10;
/// Iteration cap for [`connect`].
pub const CONNECT_MAX_ITERS: usize = 100;

/// A point in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub u: f64,
    pub v: f64,
}

impl ChartPoint {
    pub fn new(u: f64, v: f64) -> Self {
        ChartPoint { u, v }
    }

    /// Euclidean distance in chart coordinates (not metric distance).
    pub fn chart_distance(&self, other: &ChartPoint) -> f64 {
        ((self.u - other.u).powi(2) + (self.v - other.v).powi(2)).sqrt()
    }
}

/// A tangent vector (du, dv) based at a chart point.
#[derive(Debug, Clone, Copy)]
pub struct TangentVector {
    pub at: ChartPoint,
    pub du: f64,
    pub dv: f64,
}

impl TangentVector {
    pub fn new(at: ChartPoint, du: f64, dv: f64) -> Self {
        TangentVector { at, du, dv }
    }

    pub fn negated(&self) -> TangentVector {
        TangentVector {
            at: self.at,
            du: -self.du,
            dv: -self.dv,
        }
    }
}

/// One integration node: arclength, position, and chart velocity.
#[derive(Debug, Clone, Copy)]
pub struct GeodesicState {
    pub s: f64,
    pub u: f64,
    pub v: f64,
    pub du: f64,
    pub dv: f64,
}

impl GeodesicState {
    pub fn point(&self) -> ChartPoint {
        ChartPoint {
            u: self.u,
            v: self.v,
        }
    }

    pub fn tangent(&self) -> TangentVector {
        TangentVector {
            at: self.point(),
            du: self.du,
            dv: self.dv,
        }
    }
}

/// 2x2 determinant of two chart vectors; sign gives chart orientation.
pub(crate) fn chart_cross(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

/// Metric inner product of two chart vectors at a point.
pub fn metric_inner(
    surface: &Surface,
    at: ChartPoint,
    w1: (f64, f64),
    w2: (f64, f64),
) -> Result<f64> {
    let (e, f, g) = surface.first_form(at.u, at.v)?;
    Ok(e * w1.0 * w2.0 + f * (w1.0 * w2.1 + w1.1 * w2.0) + g * w1.1 * w2.1)
}

/// Metric norm of a chart vector at a point.
pub fn metric_norm(surface: &Surface, at: ChartPoint, w: (f64, f64)) -> Result<f64> {
    Ok(metric_inner(surface, at, w, w)?.max(0.0).sqrt())
}

/// Unsigned angle in [0, pi] between two tangent vectors at the same point.
///
/// The base point of `w1` supplies the metric; callers are expected to pass
/// vectors that live at the same point.
pub fn angle_between(surface: &Surface, w1: &TangentVector, w2: &TangentVector) -> Result<f64> {
    let (e, f, g) = surface.first_form(w1.at.u, w1.at.v)?;
    let dot = |a: &TangentVector, b: &TangentVector| {
        e * a.du * b.du + f * (a.du * b.dv + a.dv * b.du) + g * a.dv * b.dv
    };
    let n1 = dot(w1, w1).max(0.0).sqrt();
    let n2 = dot(w2, w2).max(0.0).sqrt();
    if n1 <= ZERO_NORM_TOL || n2 <= ZERO_NORM_TOL {
        return Err(GeodivError::ZeroVector { norm: n1.min(n2) });
    }
    Ok((dot(w1, w2) / (n1 * n2)).clamp(-1.0, 1.0).acos())
}

/// Rotate a tangent vector by `angle` counterclockwise with respect to the
/// chart orientation (positive angles turn from r_u toward r_v). The metric
/// norm is preserved.
pub fn rotate_tangent(surface: &Surface, w: &TangentVector, angle: f64) -> Result<TangentVector> {
    let (e, f, g) = surface.first_form(w.at.u, w.at.v)?;
    let det = (e * g - f * f).sqrt();
    let norm = (e * w.du * w.du + 2.0 * f * w.du * w.dv + g * w.dv * w.dv)
        .max(0.0)
        .sqrt();
    if norm <= ZERO_NORM_TOL {
        return Err(GeodivError::ZeroVector { norm });
    }
    // J w = rotation of w by +pi/2: metric-orthogonal, same norm, positive
    // chart determinant with w.
    let jw_u = -(f * w.du + g * w.dv) / det;
    let jw_v = (e * w.du + f * w.dv) / det;
    let (c, s) = (angle.cos(), angle.sin());
    Ok(TangentVector {
        at: w.at,
        du: c * w.du + s * jw_u,
        dv: c * w.dv + s * jw_v,
    })
}

fn accel(surface: &Surface, u: f64, v: f64, du: f64, dv: f64) -> Result<(f64, f64)> {
    let ch = surface.christoffel_unchecked(u, v)?;
    Ok((
        -(ch.u_uu * du * du + 2.0 * ch.u_uv * du * dv + ch.u_vv * dv * dv),
        -(ch.v_uu * du * du + 2.0 * ch.v_uv * du * dv + ch.v_vv * dv * dv),
    ))
}

fn rk4_step(surface: &Surface, y: [f64; 4], h: f64) -> Result<[f64; 4]> {
    let f = |y: [f64; 4]| -> Result<[f64; 4]> {
        let (au, av) = accel(surface, y[0], y[1], y[2], y[3])?;
        Ok([y[2], y[3], au, av])
    };
    let add = |y: [f64; 4], k: [f64; 4], c: f64| {
        [
            y[0] + c * k[0],
            y[1] + c * k[1],
            y[2] + c * k[2],
            y[3] + c * k[3],
        ]
    };
    let k1 = f(y)?;
    let k2 = f(add(y, k1, 0.5 * h))?;
    let k3 = f(add(y, k2, 0.5 * h))?;
    let k4 = f(add(y, k3, h))?;
    Ok([
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        y[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
        y[3] + h / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]),
    ])
}

/// A geodesic integrated over [0, length], sampled at fixed arclength steps.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    surface: Surface,
    states: Vec<GeodesicState>,
    step: f64,
}

impl GeodesicPath {
    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    pub fn states(&self) -> &[GeodesicState] {
        &self.states
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn length(&self) -> f64 {
        self.states.last().map_or(0.0, |st| st.s)
    }

    pub fn start(&self) -> GeodesicState {
        self.states[0]
    }

    pub fn end(&self) -> GeodesicState {
        *self.states.last().unwrap()
    }

    /// State at arclength `s` (clamped to [0, length]) by cubic Hermite
    /// interpolation inside the containing step cell.
    pub fn state_at(&self, s: f64) -> GeodesicState {
        let s = s.clamp(0.0, self.length());
        let n = self.states.len();
        if n == 1 {
            return self.states[0];
        }
        // Nodes are uniform except possibly the last cell.
        let mut i = ((s / self.step) as usize).min(n - 2);
        while i > 0 && self.states[i].s > s {
            i -= 1;
        }
        while i + 2 < n && self.states[i + 1].s < s {
            i += 1;
        }
        let (a, b) = (&self.states[i], &self.states[i + 1]);
        let h = b.s - a.s;
        if h <= 0.0 {
            return *a;
        }
        let t = ((s - a.s) / h).clamp(0.0, 1.0);
        let t2 = t * t;
        let t3 = t2 * t;
        let (h00, h10, h01, h11) = (
            2.0 * t3 - 3.0 * t2 + 1.0,
            t3 - 2.0 * t2 + t,
            -2.0 * t3 + 3.0 * t2,
            t3 - t2,
        );
        let (d00, d10, d01, d11) = (
            (6.0 * t2 - 6.0 * t) / h,
            (3.0 * t2 - 4.0 * t + 1.0),
            (-6.0 * t2 + 6.0 * t) / h,
            (3.0 * t2 - 2.0 * t),
        );
        GeodesicState {
            s,
            u: h00 * a.u + h10 * h * a.du + h01 * b.u + h11 * h * b.du,
            v: h00 * a.v + h10 * h * a.dv + h01 * b.v + h11 * h * b.dv,
            du: d00 * a.u + d10 * a.du + d01 * b.u + d11 * b.du,
            dv: d00 * a.v + d10 * a.dv + d01 * b.v + d11 * b.dv,
        }
    }

    pub fn point_at(&self, s: f64) -> ChartPoint {
        self.state_at(s).point()
    }

    pub fn tangent_at(&self, s: f64) -> TangentVector {
        self.state_at(s).tangent()
    }

    /// Same geodesic re-integrated over [0, s_end].
    pub fn truncated(&self, s_end: f64) -> Result<GeodesicPath> {
        let s_end = s_end.clamp(0.0, self.length());
        integrate(&self.surface, self.start().tangent(), s_end, self.step)
    }

    /// The same curve traversed end to start, re-integrated from the
    /// reversed end tangent (so it matches the forward curve to integrator
    /// accuracy, not exactly).
    pub fn reversed(&self) -> Result<GeodesicPath> {
        integrate(
            &self.surface,
            self.end().tangent().negated(),
            self.length(),
            self.step,
        )
    }
}

fn validate_start(surface: &Surface, start: &TangentVector, step: f64) -> Result<(f64, f64)> {
    if !step.is_finite() || step <= 0.0 {
        return Err(GeodivError::InvalidParameter(format!(
            "integration step must be positive, got {step}"
        )));
    }
    if !surface.contains(start.at.u, start.at.v) {
        return Err(GeodivError::OutOfDomain {
            u: start.at.u,
            v: start.at.v,
        });
    }
    let norm = metric_norm(surface, start.at, (start.du, start.dv))?;
    if norm <= ZERO_NORM_TOL {
        return Err(GeodivError::ZeroVector { norm });
    }
    Ok((start.du / norm, start.dv / norm))
}

fn integrate_impl(
    surface: &Surface,
    start: TangentVector,
    length: f64,
    step: f64,
    clip: bool,
) -> Result<GeodesicPath> {
    if !length.is_finite() || length < 0.0 {
        return Err(GeodivError::InvalidParameter(format!(
            "integration length must be non-negative, got {length}"
        )));
    }
    let (du, dv) = validate_start(surface, &start, step)?;
    let mut states = vec![GeodesicState {
        s: 0.0,
        u: start.at.u,
        v: start.at.v,
        du,
        dv,
    }];
    let mut y = [start.at.u, start.at.v, du, dv];
    let mut s = 0.0;
    let eps = 1e-12 * step.max(length);
    while s + eps < length {
        let h = step.min(length - s);
        let y_new = rk4_step(surface, y, h)?;
        if !surface.contains(y_new[0], y_new[1]) {
            if !clip {
                return Err(GeodivError::ChartBoundaryExceeded {
                    s: s + h,
                    u: y_new[0],
                    v: y_new[1],
                });
            }
            // Bisect the last step to land just inside the boundary.
            let (mut lo, mut hi) = (0.0, h);
            let mut y_lo = y;
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                let y_mid = rk4_step(surface, y, mid)?;
                if surface.contains(y_mid[0], y_mid[1]) {
                    lo = mid;
                    y_lo = y_mid;
                } else {
                    hi = mid;
                }
            }
            if lo > 0.0 {
                states.push(GeodesicState {
                    s: s + lo,
                    u: y_lo[0],
                    v: y_lo[1],
                    du: y_lo[2],
                    dv: y_lo[3],
                });
            }
            return Ok(GeodesicPath {
                surface: surface.clone(),
                states,
                step,
            });
        }
        y = y_new;
        s += h;
        states.push(GeodesicState {
            s,
            u: y[0],
            v: y[1],
            du: y[2],
            dv: y[3],
        });
    }
    Ok(GeodesicPath {
        surface: surface.clone(),
        states,
        step,
    })
}

/// Integrate the unit-speed geodesic with initial direction `start` over
/// arclength `length`. Leaving the chart rectangle is an error.
pub fn integrate(
    surface: &Surface,
    start: TangentVector,
    length: f64,
    step: f64,
) -> Result<GeodesicPath> {
    integrate_impl(surface, start, length, step, false)
}

/// Like [`integrate`], but a path that exits the chart rectangle is clipped
/// at the boundary instead of failing; compare `length()` with the request
/// to detect clipping.
pub fn integrate_clipped(
    surface: &Surface,
    start: TangentVector,
    length: f64,
    step: f64,
) -> Result<GeodesicPath> {
    integrate_impl(surface, start, length, step, true)
}

/// Exponential map: follow the geodesic with initial velocity `w` for
/// arclength equal to the metric norm of `w`.
pub fn exp_map(surface: &Surface, w: &TangentVector, step: f64) -> Result<ChartPoint> {
    let r = metric_norm(surface, w.at, (w.du, w.dv))?;
    if r <= ZERO_NORM_TOL {
        return Ok(w.at);
    }
    Ok(integrate(surface, *w, r, step)?.end().point())
}

/// Arclength of the straight chart segment from `a` to `b` under the metric
/// (composite midpoint rule); a cheap upper-ballpark for geodesic distance.
fn chart_segment_length(surface: &Surface, a: ChartPoint, b: ChartPoint) -> Result<f64> {
    let n = 64;
    let (du, dv) = (b.u - a.u, b.v - a.v);
    let mut total = 0.0;
    for i in 0..n {
        let t = (i as f64 + 0.5) / n as f64;
        let p = ChartPoint::new(a.u + t * du, a.v + t * dv);
        total += metric_norm(surface, p, (du, dv))?;
    }
    Ok(total / n as f64)
}

/// Closest approach of a path to a target chart point: returns (s, distance).
fn closest_approach(path: &GeodesicPath, target: ChartPoint) -> (f64, f64) {
    let d2 = |s: f64| {
        let p = path.point_at(s);
        (p.u - target.u).powi(2) + (p.v - target.v).powi(2)
    };
    let states = path.states();
    let mut best = (0usize, f64::INFINITY);
    for (i, st) in states.iter().enumerate() {
        let d = (st.u - target.u).powi(2) + (st.v - target.v).powi(2);
        if d < best.1 {
            best = (i, d);
        }
    }
    let lo = if best.0 == 0 {
        0.0
    } else {
        states[best.0 - 1].s
    };
    let hi = if best.0 + 1 >= states.len() {
        path.length()
    } else {
        states[best.0 + 1].s
    };
    // Golden-section minimization; d2 is smooth and unimodal on the bracket.
    let phi = 0.5 * (3.0 - 5.0_f64.sqrt());
    let (mut a, mut b) = (lo, hi);
    let mut x1 = a + phi * (b - a);
    let mut x2 = b - phi * (b - a);
    let (mut f1, mut f2) = (d2(x1), d2(x2));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + phi * (b - a);
            f1 = d2(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = b - phi * (b - a);
            f2 = d2(x2);
        }
    }
    let s = 0.5 * (a + b);
    (s, d2(s).sqrt())
}

/// Geodesic from `from` to `to` by single shooting.
///
/// The launch direction starts at the chart-space difference and is refined
/// by secant iteration on the signed lateral miss at the point of closest
/// approach. Succeeds when the endpoint lands within [`CONNECT_TOL`] in
/// chart distance; gives up with `NoConvergence` after
/// [`CONNECT_MAX_ITERS`] refinements.
pub fn connect(
    surface: &Surface,
    from: ChartPoint,
    to: ChartPoint,
    step: f64,
) -> Result<GeodesicPath> {
    if !surface.contains(to.u, to.v) {
        return Err(GeodivError::OutOfDomain { u: to.u, v: to.v });
    }
    let base = TangentVector::new(from, to.u - from.u, to.v - from.v);
    let norm = metric_norm(surface, from, (base.du, base.dv))?;
    if norm <= ZERO_NORM_TOL {
        return Err(GeodivError::ZeroVector { norm });
    }
    let l_est = chart_segment_length(surface, from, to)?;
    let mut l_int = 1.6 * l_est;

    // Returns (signed lateral miss, chart distance, s at closest approach).
    let shoot = |phi: f64, l_int: f64| -> Result<(f64, f64, f64)> {
        let w = rotate_tangent(surface, &base, phi)?;
        let path = integrate_clipped(surface, w, l_int, step)?;
        let (s_star, dist) = closest_approach(&path, to);
        let st = path.state_at(s_star);
        let sign = chart_cross((st.du, st.dv), (to.u - st.u, to.v - st.v)).signum();
        Ok((sign * dist, dist, s_star))
    };

    let mut phi_prev = 0.0;
    let (mut miss_prev, mut dist, mut s_star) = shoot(phi_prev, l_int)?;
    let mut phi = if dist <= CONNECT_TOL {
        let w = rotate_tangent(surface, &base, phi_prev)?;
        return integrate(surface, w, s_star, step);
    } else {
        phi_prev + (miss_prev / l_est).clamp(-0.3, 0.3)
    };
    for it in 0..CONNECT_MAX_ITERS {
        let (miss, d, s) = shoot(phi, l_int)?;
        dist = d;
        s_star = s;
        if dist <= CONNECT_TOL {
            let w = rotate_tangent(surface, &base, phi)?;
            return integrate(surface, w, s_star, step);
        }
        // Closest approach at the far end means the shot was too short.
        if s_star > 0.95 * l_int && it < CONNECT_MAX_ITERS - 1 && l_int < 64.0 * l_est {
            l_int *= 2.0;
            let (m2, d2, s2) = shoot(phi, l_int)?;
            dist = d2;
            s_star = s2;
            if dist <= CONNECT_TOL {
                let w = rotate_tangent(surface, &base, phi)?;
                return integrate(surface, w, s_star, step);
            }
            let denom = m2 - miss_prev;
            let next = if denom.abs() < 1e-300 {
                phi + 0.1
            } else {
                phi - m2 * (phi - phi_prev) / denom
            };
            phi_prev = phi;
            miss_prev = m2;
            phi = next.clamp(phi - 0.5, phi + 0.5);
            continue;
        }
        let denom = miss - miss_prev;
        let next = if denom.abs() < 1e-300 {
            phi + 0.1
        } else {
            phi - miss * (phi - phi_prev) / denom
        };
        phi_prev = phi;
        miss_prev = miss;
        phi = next.clamp(phi - 0.5, phi + 0.5);
    }
    Err(GeodivError::NoConvergence {
        iterations: CONNECT_MAX_ITERS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::gallery;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector3;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn rng() -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(0xd1ce)
    }

    #[test]
    fn plane_geodesics_are_straight() {
        let s = gallery::plane();
        let w = TangentVector::new(ChartPoint::new(1.0, -2.0), 3.0, 4.0);
        let path = integrate(&s, w, 10.0, 0.01).unwrap();
        let end = path.end();
        // Direction (3,4)/5; length 10.
        assert_abs_diff_eq!(end.u, 1.0 + 6.0, epsilon = 1e-10);
        assert_abs_diff_eq!(end.v, -2.0 + 8.0, epsilon = 1e-10);
        let mid = path.state_at(5.0);
        assert_abs_diff_eq!(mid.u, 4.0, epsilon = 1e-10);
        assert_abs_diff_eq!(mid.v, 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(mid.du, 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(mid.dv, 0.8, epsilon = 1e-12);
    }

    /// Ambient great-circle formula for the unit sphere chart.
    fn sphere_ambient(u: f64, v: f64) -> Vector3<f64> {
        Vector3::new(u.sin() * v.cos(), u.sin() * v.sin(), u.cos())
    }

    #[test]
    fn sphere_great_circle_matches_ambient_oracle() {
        let s = gallery::sphere(1.0);
        let start = ChartPoint::new(FRAC_PI_2, 0.0);
        // Launch 40 degrees north of east.
        let w = rotate_tangent(&s, &TangentVector::new(start, 0.0, 1.0), -0.7).unwrap();
        let path = integrate(&s, w, 1.5, 1e-3).unwrap();
        // Ambient: p(s) = cos(s) p0 + sin(s) t0.
        let p0 = sphere_ambient(start.u, start.v);
        let ru = Vector3::new(0.0, 0.0, -1.0);
        let rv = Vector3::new(0.0, 1.0, 0.0);
        let t0 = ru * w.du + rv * w.dv;
        for st in path.states().iter().step_by(100) {
            let got = sphere_ambient(st.u, st.v);
            let want = p0 * st.s.cos() + t0 * st.s.sin();
            assert_abs_diff_eq!((got - want).norm(), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn rk4_is_fourth_order_on_the_sphere() {
        let s = gallery::sphere(1.0);
        let start = ChartPoint::new(FRAC_PI_2, 0.0);
        let w = rotate_tangent(&s, &TangentVector::new(start, 0.0, 1.0), -0.7).unwrap();
        let p0 = sphere_ambient(start.u, start.v);
        let t0 = Vector3::new(0.0, 0.0, -1.0) * w.du + Vector3::new(0.0, 1.0, 0.0) * w.dv;
        let len = 1.28;
        let err_at = |h: f64| {
            let end = integrate(&s, w, len, h).unwrap().end();
            let want = p0 * len.cos() + t0 * len.sin();
            (sphere_ambient(end.u, end.v) - want).norm()
        };
        let mut prev = err_at(3.2e-2);
        for h in [1.6e-2, 8e-3, 4e-3] {
            let e = err_at(h);
            // Order 4 gives a factor 16 per halving; allow slack to 12.
            assert!(
                prev / e >= 12.0,
                "halving to h={h} shrank error only by {}",
                prev / e
            );
            prev = e;
        }
    }

    #[test]
    fn unit_speed_is_preserved() {
        let mut rng = rng();
        for s in gallery::all_default() {
            for _ in 0..5 {
                let (u, v) = gallery::interior_point(&s, rng.gen(), rng.gen());
                let theta = rng.gen_range(0.0..2.0 * PI);
                let w = TangentVector::new(ChartPoint::new(u, v), theta.cos(), theta.sin());
                let path = match integrate_clipped(&s, w, 1.0, 1e-3) {
                    Ok(p) => p,
                    Err(_) => continue,
                };
                for st in path.states().iter().step_by(50) {
                    let n = metric_norm(&s, st.point(), (st.du, st.dv)).unwrap();
                    assert_abs_diff_eq!(n, 1.0, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn leaving_the_chart_is_an_error_unless_clipped() {
        let s = gallery::plane();
        let w = TangentVector::new(ChartPoint::new(99.0, 0.0), 1.0, 0.0);
        let err = integrate(&s, w, 5.0, 0.01).unwrap_err();
        assert!(matches!(err, GeodivError::ChartBoundaryExceeded { .. }));
        let clipped = integrate_clipped(&s, w, 5.0, 0.01).unwrap();
        assert!(clipped.length() < 5.0);
        // Clipped endpoint hugs the boundary from inside.
        let end = clipped.end();
        assert!(end.u < 100.0 && end.u > 100.0 - 1e-6);
    }

    #[test]
    fn exp_map_distance_on_the_sphere() {
        let s = gallery::sphere(1.0);
        let at = ChartPoint::new(1.0, 0.5);
        let r = 0.8;
        let w = TangentVector::new(at, 0.0, r / 1.0_f64.sin().powi(1)); // metric norm r
        let got = exp_map(&s, &w, 1e-3).unwrap();
        let cosang = sphere_ambient(at.u, at.v).dot(&sphere_ambient(got.u, got.v));
        assert_abs_diff_eq!(cosang.acos(), r, epsilon = 1e-9);
    }

    #[test]
    fn angle_between_basics() {
        let s = gallery::plane();
        let at = ChartPoint::new(0.0, 0.0);
        let e1 = TangentVector::new(at, 1.0, 0.0);
        let e2 = TangentVector::new(at, 0.0, 2.0);
        assert_abs_diff_eq!(
            angle_between(&s, &e1, &e2).unwrap(),
            FRAC_PI_2,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(angle_between(&s, &e1, &e1).unwrap(), 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(
            angle_between(&s, &e1, &e1.negated()).unwrap(),
            PI,
            epsilon = 1e-7
        );
        assert!(matches!(
            angle_between(&s, &e1, &TangentVector::new(at, 0.0, 0.0)),
            Err(GeodivError::ZeroVector { .. })
        ));
    }

    #[test]
    fn angle_between_matches_the_ambient_angle() {
        // Independent oracle: push both chart directions to R^3 by finite
        // differences of the position map and measure the angle there.
        let mut rng = rng();
        for s in gallery::all_default() {
            for _ in 0..5 {
                let (u, v) = gallery::interior_point(&s, rng.gen(), rng.gen());
                let at = ChartPoint::new(u, v);
                let h = 1e-6;
                let ru =
                    (s.evaluate(u + h, v).unwrap() - s.evaluate(u - h, v).unwrap()) / (2.0 * h);
                let rv =
                    (s.evaluate(u, v + h).unwrap() - s.evaluate(u, v - h).unwrap()) / (2.0 * h);
                let w1 = TangentVector::new(at, 1.0, -0.4);
                let w2 = TangentVector::new(at, 0.3, 1.0);
                let a1 = ru * w1.du + rv * w1.dv;
                let a2 = ru * w2.du + rv * w2.dv;
                let ambient = (a1.dot(&a2) / (a1.norm() * a2.norm()))
                    .clamp(-1.0, 1.0)
                    .acos();
                let got = angle_between(&s, &w1, &w2).unwrap();
                assert_abs_diff_eq!(got, ambient, epsilon = 1e-6);
            }
        }
        // Rotation charts are orthogonal: coordinate directions at right angles.
        for name in ["plane", "sphere", "cylinder", "torus"] {
            let s = gallery::by_name(name).unwrap();
            let (u, v) = gallery::interior_point(&s, 0.3, 0.7);
            let at = ChartPoint::new(u, v);
            let a = angle_between(
                &s,
                &TangentVector::new(at, 1.0, 0.0),
                &TangentVector::new(at, 0.0, 1.0),
            )
            .unwrap();
            assert_abs_diff_eq!(a, FRAC_PI_2, epsilon = 1e-9);
        }
    }

    #[test]
    fn rotation_is_counterclockwise_in_the_chart() {
        let s = gallery::plane();
        let w = TangentVector::new(ChartPoint::new(0.0, 0.0), 1.0, 0.0);
        let r = rotate_tangent(&s, &w, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(r.du, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.dv, 1.0, epsilon = 1e-15);
        // Small positive rotation turns toward +v: positive chart cross.
        let r = rotate_tangent(&s, &w, 0.1).unwrap();
        assert!(chart_cross((w.du, w.dv), (r.du, r.dv)) > 0.0);
    }

    #[test]
    fn rotation_preserves_norm_and_realizes_the_angle() {
        let mut rng = rng();
        for s in gallery::all_default() {
            for _ in 0..10 {
                let (u, v) = gallery::interior_point(&s, rng.gen(), rng.gen());
                let at = ChartPoint::new(u, v);
                let w = TangentVector::new(at, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if metric_norm(&s, at, (w.du, w.dv)).unwrap() < 1e-3 {
                    continue;
                }
                let theta = rng.gen_range(0.01..PI - 0.01);
                let r = rotate_tangent(&s, &w, theta).unwrap();
                assert_abs_diff_eq!(
                    metric_norm(&s, at, (r.du, r.dv)).unwrap(),
                    metric_norm(&s, at, (w.du, w.dv)).unwrap(),
                    epsilon = 1e-10
                );
                assert_abs_diff_eq!(angle_between(&s, &w, &r).unwrap(), theta, epsilon = 1e-10);
                // Undo.
                let back = rotate_tangent(&s, &r, -theta).unwrap();
                assert_abs_diff_eq!(back.du, w.du, epsilon = 1e-10);
                assert_abs_diff_eq!(back.dv, w.dv, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn truncation_matches_interpolation() {
        let s = gallery::torus(2.0, 1.0);
        let w = TangentVector::new(ChartPoint::new(0.3, 0.2), 1.0, 0.7);
        let path = integrate(&s, w, 2.0, 1e-3).unwrap();
        let cut = path.truncated(1.234).unwrap();
        assert_abs_diff_eq!(cut.length(), 1.234, epsilon = 1e-12);
        let a = cut.end();
        let b = path.state_at(1.234);
        assert_abs_diff_eq!(a.u, b.u, epsilon = 1e-10);
        assert_abs_diff_eq!(a.v, b.v, epsilon = 1e-10);
    }

    #[test]
    fn connect_on_the_plane_is_the_straight_segment() {
        let s = gallery::plane();
        let path = connect(
            &s,
            ChartPoint::new(0.0, 0.0),
            ChartPoint::new(3.0, 4.0),
            0.01,
        )
        .unwrap();
        assert_abs_diff_eq!(path.length(), 5.0, epsilon = 1e-8);
        let end = path.end();
        assert!(end.point().chart_distance(&ChartPoint::new(3.0, 4.0)) <= 1e-9);
    }

    #[test]
    fn connect_matches_great_circle_distance() {
        let s = gallery::sphere(1.0);
        let a = ChartPoint::new(1.2, 0.3);
        let b = ChartPoint::new(0.9, 1.1);
        let path = connect(&s, a, b, 1e-3).unwrap();
        assert!(path.end().point().chart_distance(&b) <= 1e-8);
        let want = sphere_ambient(a.u, a.v)
            .dot(&sphere_ambient(b.u, b.v))
            .clamp(-1.0, 1.0)
            .acos();
        assert_abs_diff_eq!(path.length(), want, epsilon = 1e-8);
    }

    #[test]
    fn connect_works_across_the_gallery() {
        let mut rng = rng();
        for s in gallery::all_default() {
            let (u, v) = gallery::interior_point(&s, 0.45, 0.55);
            let a = ChartPoint::new(u, v);
            for _ in 0..3 {
                let d = s.domain();
                let scale = 0.03 * (d.u_max - d.u_min).min(d.v_max - d.v_min);
                let b = ChartPoint::new(
                    u + rng.gen_range(-1.0..1.0) * scale,
                    v + rng.gen_range(-1.0..1.0) * scale,
                );
                let path = connect(&s, a, b, 1e-3).unwrap();
                assert!(
                    path.end().point().chart_distance(&b) <= 1e-9,
                    "{}: missed by {}",
                    s.name(),
                    path.end().point().chart_distance(&b)
                );
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn plane_endpoint_is_start_plus_length_times_direction(
            x in -50.0..50.0f64,
            y in -50.0..50.0f64,
            theta in 0.0..(2.0 * PI),
            len in 0.1..20.0f64,
        ) {
            let s = gallery::plane();
            let w = TangentVector::new(ChartPoint::new(x, y), theta.cos(), theta.sin());
            let path = integrate_clipped(&s, w, len, 0.05).unwrap();
            let got = path.end();
            let l = path.length();
            prop_assert!((got.u - (x + l * theta.cos())).abs() < 1e-9);
            prop_assert!((got.v - (y + l * theta.sin())).abs() < 1e-9);
        }

        #[test]
        fn rotating_by_quarter_turn_twice_reverses(
            du in -2.0..2.0f64,
            dv in -2.0..2.0f64,
        ) {
            prop_assume!(du * du + dv * dv > 1e-4);
            let s = gallery::sphere(1.0);
            let at = ChartPoint::new(1.0, 0.5);
            let w = TangentVector::new(at, du, dv);
            let r = rotate_tangent(&s, &w, FRAC_PI_2).unwrap();
            let rr = rotate_tangent(&s, &r, FRAC_PI_2).unwrap();
            prop_assert!((rr.du + w.du).abs() < 1e-9);
            prop_assert!((rr.dv + w.dv).abs() < 1e-9);
        }
    }

    #[test]
    fn forty_five_degree_launch_draws_the_diagonal() {
        let s = gallery::plane();
        let w = rotate_tangent(
            &s,
            &TangentVector::new(ChartPoint::new(0.0, 0.0), 1.0, 0.0),
            FRAC_PI_4,
        )
        .unwrap();
        let end = integrate(&s, w, 2.0_f64.sqrt(), 1e-3).unwrap().end();
        assert_abs_diff_eq!(end.u, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(end.v, 1.0, epsilon = 1e-10);
    }
}
