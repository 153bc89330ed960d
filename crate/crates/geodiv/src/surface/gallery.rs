//! Built-in surfaces with analytic derivatives.
//!
//! Each constructor returns a [`Surface`] in analytic mode. Domains are
//! chosen so every chart is regular on the closure of its rectangle:
//! the sphere and ellipsoid exclude the poles, the torus rectangle covers
//! both the inner and the outer equator, and the cylinder's angular range
//! spans two turns so geodesics can wind without leaving the chart.

use std::f64::consts::PI;

use nalgebra::Vector3;

use super::{Chart, DerivativeMode, Domain, Surface};
use crate::error::{GeodivError, Result};

/// Flat plane z = 0 with the identity chart.
pub fn plane() -> Surface {
    struct Plane;
    impl Chart for Plane {
        fn position(&self, u: f64, v: f64) -> Vector3<f64> {
            Vector3::new(u, v, 0.0)
        }
        fn first_derivatives(&self, _u: f64, _v: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
            Some((Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0)))
        }
        fn second_derivatives(
            &self,
            _u: f64,
            _v: f64,
        ) -> Option<(Vector3<f64>, Vector3<f64>, Vector3<f64>)> {
            Some((Vector3::zeros(), Vector3::zeros(), Vector3::zeros()))
        }
    }
    Surface::new(
        Plane,
        Domain::new(-100.0, 100.0, -100.0, 100.0),
        DerivativeMode::Analytic,
        "plane",
    )
}

/// Sphere of radius `r` in colatitude/longitude coordinates:
/// (r sin u cos v, r sin u sin v, r cos u), u in (0.01, pi - 0.01).
pub fn sphere(r: f64) -> Surface {
    struct Sphere {
        r: f64,
    }
    impl Chart for Sphere {
        fn position(&self, u: f64, v: f64) -> Vector3<f64> {
            let r = self.r;
            Vector3::new(r * u.sin() * v.cos(), r * u.sin() * v.sin(), r * u.cos())
        }
        fn first_derivatives(&self, u: f64, v: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
            let r = self.r;
            Some((
                Vector3::new(r * u.cos() * v.cos(), r * u.cos() * v.sin(), -r * u.sin()),
                Vector3::new(-r * u.sin() * v.sin(), r * u.sin() * v.cos(), 0.0),
            ))
        }
        fn second_derivatives(
            &self,
            u: f64,
            v: f64,
        ) -> Option<(Vector3<f64>, Vector3<f64>, Vector3<f64>)> {
            let r = self.r;
            Some((
                Vector3::new(-r * u.sin() * v.cos(), -r * u.sin() * v.sin(), -r * u.cos()),
                Vector3::new(-r * u.cos() * v.sin(), r * u.cos() * v.cos(), 0.0),
                Vector3::new(-r * u.sin() * v.cos(), -r * u.sin() * v.sin(), 0.0),
            ))
        }
    }
    assert!(r > 0.0, "sphere radius must be positive");
    Surface::new(
        Sphere { r },
        Domain::new(0.01, PI - 0.01, -PI, PI),
        DerivativeMode::Analytic,
        "sphere",
    )
}

/// Circular cylinder of radius `a`: (a cos u, a sin u, v). The angular
/// coordinate spans two full turns so paths can wind past a seam.
pub fn cylinder(a: f64) -> Surface {
    struct Cylinder {
        a: f64,
    }
    impl Chart for Cylinder {
        fn position(&self, u: f64, v: f64) -> Vector3<f64> {
            Vector3::new(self.a * u.cos(), self.a * u.sin(), v)
        }
        fn first_derivatives(&self, u: f64, _v: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
            Some((
                Vector3::new(-self.a * u.sin(), self.a * u.cos(), 0.0),
                Vector3::new(0.0, 0.0, 1.0),
            ))
        }
        fn second_derivatives(
            &self,
            u: f64,
            _v: f64,
        ) -> Option<(Vector3<f64>, Vector3<f64>, Vector3<f64>)> {
            Some((
                Vector3::new(-self.a * u.cos(), -self.a * u.sin(), 0.0),
                Vector3::zeros(),
                Vector3::zeros(),
            ))
        }
    }
    assert!(a > 0.0, "cylinder radius must be positive");
    Surface::new(
        Cylinder { a },
        Domain::new(-2.0 * PI, 2.0 * PI, -50.0, 50.0),
        DerivativeMode::Analytic,
        "cylinder",
    )
}

/// Torus with tube radius `r` around a circle of radius `big_r`:
/// ((R + r cos u) cos v, (R + r cos u) sin v, r sin u).
/// u in (-pi/2, 3pi/2) so both equators (u = 0 outer, u = pi inner) are
/// interior points of the rectangle.
pub fn torus(big_r: f64, r: f64) -> Surface {
    struct Torus {
        big_r: f64,
        r: f64,
    }
    impl Chart for Torus {
        fn position(&self, u: f64, v: f64) -> Vector3<f64> {
            let w = self.big_r + self.r * u.cos();
            Vector3::new(w * v.cos(), w * v.sin(), self.r * u.sin())
        }
        fn first_derivatives(&self, u: f64, v: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
            let r = self.r;
            let w = self.big_r + r * u.cos();
            Some((
                Vector3::new(-r * u.sin() * v.cos(), -r * u.sin() * v.sin(), r * u.cos()),
                Vector3::new(-w * v.sin(), w * v.cos(), 0.0),
            ))
        }
        fn second_derivatives(
            &self,
            u: f64,
            v: f64,
        ) -> Option<(Vector3<f64>, Vector3<f64>, Vector3<f64>)> {
            let r = self.r;
            let w = self.big_r + r * u.cos();
            Some((
                Vector3::new(-r * u.cos() * v.cos(), -r * u.cos() * v.sin(), -r * u.sin()),
                Vector3::new(r * u.sin() * v.sin(), -r * u.sin() * v.cos(), 0.0),
                Vector3::new(-w * v.cos(), -w * v.sin(), 0.0),
            ))
        }
    }
    assert!(
        big_r > r && r > 0.0,
        "torus requires R > r > 0 for a regular embedding"
    );
    Surface::new(
        Torus { big_r, r },
        Domain::new(-0.5 * PI, 1.5 * PI, -PI, PI),
        DerivativeMode::Analytic,
        "torus",
    )
}

/// Hyperbolic paraboloid z = u^2 - v^2 as a Monge patch.
pub fn saddle() -> Surface {
    struct Saddle;
    impl Chart for Saddle {
        fn position(&self, u: f64, v: f64) -> Vector3<f64> {
            Vector3::new(u, v, u * u - v * v)
        }
        fn first_derivatives(&self, u: f64, v: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
            Some((
                Vector3::new(1.0, 0.0, 2.0 * u),
                Vector3::new(0.0, 1.0, -2.0 * v),
            ))
        }
        fn second_derivatives(
            &self,
            _u: f64,
            _v: f64,
        ) -> Option<(Vector3<f64>, Vector3<f64>, Vector3<f64>)> {
            Some((
                Vector3::new(0.0, 0.0, 2.0),
                Vector3::zeros(),
                Vector3::new(0.0, 0.0, -2.0),
            ))
        }
    }
    Surface::new(
        Saddle,
        Domain::new(-10.0, 10.0, -10.0, 10.0),
        DerivativeMode::Analytic,
        "saddle",
    )
}

/// Triaxial ellipsoid (a sin u cos v, b sin u sin v, c cos u) with the
/// sphere's coordinate domain.
pub fn ellipsoid(a: f64, b: f64, c: f64) -> Surface {
    struct Ellipsoid {
        a: f64,
        b: f64,
        c: f64,
    }
    impl Chart for Ellipsoid {
        fn position(&self, u: f64, v: f64) -> Vector3<f64> {
            Vector3::new(
                self.a * u.sin() * v.cos(),
                self.b * u.sin() * v.sin(),
                self.c * u.cos(),
            )
        }
        fn first_derivatives(&self, u: f64, v: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
            Some((
                Vector3::new(
                    self.a * u.cos() * v.cos(),
                    self.b * u.cos() * v.sin(),
                    -self.c * u.sin(),
                ),
                Vector3::new(-self.a * u.sin() * v.sin(), self.b * u.sin() * v.cos(), 0.0),
            ))
        }
        fn second_derivatives(
            &self,
            u: f64,
            v: f64,
        ) -> Option<(Vector3<f64>, Vector3<f64>, Vector3<f64>)> {
            Some((
                Vector3::new(
                    -self.a * u.sin() * v.cos(),
                    -self.b * u.sin() * v.sin(),
                    -self.c * u.cos(),
                ),
                Vector3::new(-self.a * u.cos() * v.sin(), self.b * u.cos() * v.cos(), 0.0),
                Vector3::new(
                    -self.a * u.sin() * v.cos(),
                    -self.b * u.sin() * v.sin(),
                    0.0,
                ),
            ))
        }
    }
    assert!(
        a > 0.0 && b > 0.0 && c > 0.0,
        "ellipsoid semi-axes must be positive"
    );
    Surface::new(
        Ellipsoid { a, b, c },
        Domain::new(0.01, PI - 0.01, -PI, PI),
        DerivativeMode::Analytic,
        "ellipsoid",
    )
}

/// Monkey saddle z = u^3 - 3 u v^2; K < 0 away from the origin and K = 0
/// exactly at it, so classification there is genuinely degenerate.
pub fn monkey_saddle() -> Surface {
    struct Monkey;
    impl Chart for Monkey {
        fn position(&self, u: f64, v: f64) -> Vector3<f64> {
            Vector3::new(u, v, u * u * u - 3.0 * u * v * v)
        }
        fn first_derivatives(&self, u: f64, v: f64) -> Option<(Vector3<f64>, Vector3<f64>)> {
            Some((
                Vector3::new(1.0, 0.0, 3.0 * (u * u - v * v)),
                Vector3::new(0.0, 1.0, -6.0 * u * v),
            ))
        }
        fn second_derivatives(
            &self,
            u: f64,
            v: f64,
        ) -> Option<(Vector3<f64>, Vector3<f64>, Vector3<f64>)> {
            Some((
                Vector3::new(0.0, 0.0, 6.0 * u),
                Vector3::new(0.0, 0.0, -6.0 * v),
                Vector3::new(0.0, 0.0, -6.0 * u),
            ))
        }
    }
    Surface::new(
        Monkey,
        Domain::new(-10.0, 10.0, -10.0, 10.0),
        DerivativeMode::Analytic,
        "monkey-saddle",
    )
}

/// Default shape parameters used by [`by_name`] and [`all_default`].
pub const SPHERE_RADIUS: f64 = 1.0;
pub const CYLINDER_RADIUS: f64 = 1.0;
pub const TORUS_MAJOR: f64 = 2.0;
pub const TORUS_MINOR: f64 = 1.0;
pub const ELLIPSOID_SEMI_AXES: (f64, f64, f64) = (1.5, 1.0, 0.75);

/// Names accepted by [`by_name`], in gallery order.
pub const NAMES: [&str; 7] = [
    "plane",
    "sphere",
    "cylinder",
    "torus",
    "saddle",
    "ellipsoid",
    "monkey-saddle",
];

/// One-line description per gallery entry, aligned with [`NAMES`].
pub const DESCRIPTIONS: [&str; 7] = [
    "flat plane z = 0, identity chart",
    "round sphere, colatitude/longitude chart",
    "circular cylinder, angle/height chart",
    "torus of revolution, tube-angle/axis-angle chart",
    "hyperbolic paraboloid z = u^2 - v^2",
    "triaxial ellipsoid, polar-style chart",
    "monkey saddle z = u^3 - 3uv^2",
];

/// Look up a gallery surface by name with default shape parameters.
pub fn by_name(name: &str) -> Result<Surface> {
    match name {
        "plane" => Ok(plane()),
        "sphere" => Ok(sphere(SPHERE_RADIUS)),
        "cylinder" => Ok(cylinder(CYLINDER_RADIUS)),
        "torus" => Ok(torus(TORUS_MAJOR, TORUS_MINOR)),
        "saddle" => Ok(saddle()),
        "ellipsoid" => {
            let (a, b, c) = ELLIPSOID_SEMI_AXES;
            Ok(ellipsoid(a, b, c))
        }
        "monkey-saddle" => Ok(monkey_saddle()),
        other => Err(GeodivError::InvalidParameter(format!(
            "unknown surface '{other}' (expected one of: {})",
            NAMES.join(", ")
        ))),
    }
}

/// All gallery surfaces with default parameters, in [`NAMES`] order.
pub fn all_default() -> Vec<Surface> {
    NAMES.iter().map(|n| by_name(n).unwrap()).collect()
}

/// Map unit-square coordinates (x, y) in [0, 1]^2 to an interior point,
/// padded away from the rectangle edge so finite-difference probes and short
/// geodesic hops stay inside. Feed it uniform samples to draw random points.
pub fn interior_point(s: &Surface, x: f64, y: f64) -> (f64, f64) {
    let d = s.domain();
    let pu = 0.05 * (d.u_max - d.u_min);
    let pv = 0.05 * (d.v_max - d.v_min);
    (
        d.u_min + pu + x.clamp(0.0, 1.0) * (d.u_max - d.u_min - 2.0 * pu),
        d.v_min + pv + y.clamp(0.0, 1.0) * (d.v_max - d.v_min - 2.0 * pv),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    #[test]
    fn names_round_trip() {
        for (name, s) in NAMES.iter().zip(all_default()) {
            assert_eq!(*name, s.name());
        }
        assert!(by_name("klein-bottle").is_err());
    }

    #[test]
    fn cylinder_curvatures() {
        let s = cylinder(1.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let (u, v) = interior_point(&s, rand::Rng::gen(&mut rng), rand::Rng::gen(&mut rng));
            let c = s.curvature(u, v).unwrap();
            assert_abs_diff_eq!(c.k, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.k1, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.k2, -1.0, epsilon = 1e-12);
        }
        let wide = cylinder(2.5);
        let c = wide.curvature(0.3, 1.0).unwrap();
        assert_abs_diff_eq!(c.k2, -1.0 / 2.5, epsilon = 1e-12);
    }

    #[test]
    fn torus_gaussian_curvature_formula() {
        // K = cos u / (r (R + r cos u)) for this chart.
        let (big_r, r) = (2.0, 1.0);
        let s = torus(big_r, r);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let (u, v) = interior_point(&s, rand::Rng::gen(&mut rng), rand::Rng::gen(&mut rng));
            let c = s.curvature(u, v).unwrap();
            let expect = u.cos() / (r * (big_r + r * u.cos()));
            assert_abs_diff_eq!(c.k, expect, epsilon = 1e-10 * (1.0 + expect.abs()));
        }
        // Outer equator u = 0; inner equator u = pi.
        assert_abs_diff_eq!(
            s.curvature(0.0, 0.3).unwrap().k,
            1.0 / (r * (big_r + r)),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            s.curvature(PI, 0.3).unwrap().k,
            -1.0 / (r * (big_r - r)),
            epsilon = 1e-12
        );
    }

    #[test]
    fn saddle_closed_form_curvature() {
        // W^2 = 1 + 4u^2 + 4v^2; K = -4/W^4, H = 4(v^2 - u^2)/W^3.
        let s = saddle();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..30 {
            let u = rand::Rng::gen_range(&mut rng, -3.0..3.0);
            let v = rand::Rng::gen_range(&mut rng, -3.0..3.0);
            let w2 = 1.0 + 4.0 * u * u + 4.0 * v * v;
            let c = s.curvature(u, v).unwrap();
            assert_abs_diff_eq!(c.k, -4.0 / (w2 * w2), epsilon = 1e-12);
            assert_abs_diff_eq!(c.h, 4.0 * (v * v - u * u) / w2.powf(1.5), epsilon = 1e-11);
        }
    }

    #[test]
    fn monkey_saddle_closed_form_curvature() {
        // W^2 = 1 + 9(u^2 + v^2)^2; K = -36(u^2 + v^2)/W^4.
        let s = monkey_saddle();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(14);
        for _ in 0..30 {
            let u = rand::Rng::gen_range(&mut rng, -2.0..2.0);
            let v = rand::Rng::gen_range(&mut rng, -2.0..2.0);
            let q = u * u + v * v;
            let w2 = 1.0 + 9.0 * q * q;
            let c = s.curvature(u, v).unwrap();
            assert_abs_diff_eq!(c.k, -36.0 * q / (w2 * w2), epsilon = 1e-11 * (1.0 + q));
        }
        assert_abs_diff_eq!(s.curvature(0.0, 0.0).unwrap().k, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn ellipsoid_implicit_surface_curvature() {
        // For x^2/a^2 + y^2/b^2 + z^2/c^2 = 1:
        // K = 1 / (a^2 b^2 c^2 (x^2/a^4 + y^2/b^4 + z^2/c^4)^2).
        let (a, b, c) = ELLIPSOID_SEMI_AXES;
        let s = ellipsoid(a, b, c);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(15);
        for _ in 0..30 {
            let (u, v) = interior_point(&s, rand::Rng::gen(&mut rng), rand::Rng::gen(&mut rng));
            let p = s.evaluate(u, v).unwrap();
            let q = p.x * p.x / a.powi(4) + p.y * p.y / b.powi(4) + p.z * p.z / c.powi(4);
            let expect = 1.0 / (a * a * b * b * c * c * q * q);
            let got = s.curvature(u, v).unwrap().k;
            assert_abs_diff_eq!(got, expect, epsilon = 1e-9 * expect);
        }
    }

    #[test]
    fn ellipsoid_with_equal_axes_is_a_sphere() {
        let s = ellipsoid(1.0, 1.0, 1.0);
        let c = s.curvature(0.7, 2.1).unwrap();
        assert_abs_diff_eq!(c.k, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.k1, c.k2, epsilon = 1e-7);
    }
}
