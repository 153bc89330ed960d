//! Curvature integrals over regions bounded by geodesics, and the
//! angle-excess identity they satisfy.
//!
//! For a simple region bounded by geodesic arcs meeting at interior angles
//! θ_1..θ_n, Gauss-Bonnet reduces to
//!
//! ```text
//! ∬ K dA = Σ θ_i - (n - 2) π
//! ```
//!
//! because the geodesic sides contribute no line integral. The left side is
//! computed here by quadrature in chart coordinates (dA = sqrt(EG - F^2)
//! du dv) and the right side from tangent-space angle measurements, so
//! comparing them cross-checks the integrator, the interpolation, and the
//! angle arithmetic against each other.
//!
//! The quadrature strategy: downsample each side's fine polyline to a
//! coarse polygon, triangulate that (centroid fan when star-shaped, ear
//! clipping otherwise), integrate each triangle with an adaptively refined
//! degree-5 rule, then add exact sliver corrections for the area between
//! each coarse chord and the fine polyline it replaced.

use crate::error::{GeodivError, Result};
use crate::geodesic::{angle_between, chart_cross, ChartPoint, GeodesicPath};
use crate::surface::Surface;

/// Sides whose endpoints differ by more than this (chart distance) do not
/// form a closed boundary.
pub const CLOSURE_TOL: f64 = 1e-6;
/// Absolute tolerance for the adaptive triangle quadrature.
const QUAD_TOL: f64 = 1e-10;
/// Target chart length of a coarse polygon edge.
const COARSE_EDGE: f64 = 0.01;
/// Lower bound on coarse edges per side, so small regions keep shape.
const MIN_EDGES_PER_SIDE: usize = 12;
/// Recursion cap for quadrature refinement (4^10 leaf triangles at worst).
const MAX_DEPTH: usize = 10;

/// Degree-5 rule on the unit triangle: centroid + two symmetric orbits.
const QUAD_POINTS: [(f64, f64, f64); 7] = {
    const A: f64 = 0.101_286_507_323_456;
    const WA: f64 = 0.125_939_180_544_827;
    const B: f64 = 0.470_142_064_105_115;
    const WB: f64 = 0.132_394_152_788_506;
    [
        (1.0 / 3.0, 1.0 / 3.0, 0.225),
        (1.0 - 2.0 * A, A, WA),
        (A, 1.0 - 2.0 * A, WA),
        (A, A, WA),
        (1.0 - 2.0 * B, B, WB),
        (B, 1.0 - 2.0 * B, WB),
        (B, B, WB),
    ]
};

/// A region bounded by geodesic sides laid head to tail around a loop.
#[derive(Debug, Clone)]
pub struct ChartPolygon {
    sides: Vec<GeodesicPath>,
}

impl ChartPolygon {
    /// Validates that consecutive sides (and last-to-first) join within
    /// [`CLOSURE_TOL`] in chart distance.
    pub fn new(sides: Vec<GeodesicPath>) -> Result<Self> {
        if sides.len() < 2 {
            return Err(GeodivError::InvalidParameter(
                "a polygon needs at least two sides".into(),
            ));
        }
        for (i, side) in sides.iter().enumerate() {
            let next = &sides[(i + 1) % sides.len()];
            debug_assert!(side.surface().same_chart(next.surface()));
            let gap = side.end().point().chart_distance(&next.start().point());
            if gap > CLOSURE_TOL {
                return Err(GeodivError::InvalidParameter(format!(
                    "side {i} ends {gap:.3e} away from the start of side {}",
                    (i + 1) % sides.len()
                )));
            }
        }
        Ok(ChartPolygon { sides })
    }

    pub fn sides(&self) -> &[GeodesicPath] {
        &self.sides
    }

    pub fn surface(&self) -> &Surface {
        self.sides[0].surface()
    }

    /// Interior angles at the side joints, in boundary order; the angle at
    /// joint i is between side i-1 (incoming) and side i (outgoing).
    pub fn interior_angles(&self) -> Result<Vec<f64>> {
        let n = self.sides.len();
        let mut angles = Vec::with_capacity(n);
        for i in 0..n {
            let incoming = &self.sides[(i + n - 1) % n];
            let outgoing = &self.sides[i];
            let a = angle_between(
                self.surface(),
                &outgoing.start().tangent(),
                &incoming.end().tangent().negated(),
            )?;
            angles.push(a);
        }
        Ok(angles)
    }

    /// Σ θ_i - (n - 2) π from measured interior angles.
    pub fn angle_excess(&self) -> Result<f64> {
        let angles = self.interior_angles()?;
        let n = angles.len() as f64;
        Ok(angles.iter().sum::<f64>() - (n - 2.0) * std::f64::consts::PI)
    }

    /// ∬ K dA over the enclosed region.
    pub fn curvature_integral(&self) -> Result<f64> {
        let surface = self.surface().clone();
        self.integrate(&move |u, v| {
            let (c, ff) = surface.curvature_and_forms(u, v)?;
            Ok(c.k * ff.det().sqrt())
        })
    }

    /// ∬ |K| dA over the enclosed region.
    pub fn abs_curvature_integral(&self) -> Result<f64> {
        let surface = self.surface().clone();
        self.integrate(&move |u, v| {
            let (c, ff) = surface.curvature_and_forms(u, v)?;
            Ok(c.k.abs() * ff.det().sqrt())
        })
    }

    /// Surface area of the enclosed region.
    pub fn area(&self) -> Result<f64> {
        let surface = self.surface().clone();
        self.integrate(&move |u, v| {
            let (e, f, g) = surface.first_form(u, v)?;
            Ok((e * g - f * f).sqrt())
        })
    }

    /// Curvature integral minus angle excess; zero in exact arithmetic.
    pub fn residual(&self) -> Result<f64> {
        Ok(self.curvature_integral()? - self.angle_excess()?)
    }

    /// ∬ f du dv over the enclosed region (f already includes any metric
    /// factor).
    fn integrate(&self, f: &dyn Fn(f64, f64) -> Result<f64>) -> Result<f64> {
        // Fine polylines per side, oriented counterclockwise in the chart.
        let mut polys: Vec<Vec<ChartPoint>> = self
            .sides
            .iter()
            .map(|s| s.states().iter().map(|st| st.point()).collect())
            .collect();
        if loop_signed_area(&polys) < 0.0 {
            polys.reverse();
            for p in &mut polys {
                p.reverse();
            }
        }

        // Coarse polygon: downsampled, side corners always kept.
        let mut coarse: Vec<ChartPoint> = Vec::new();
        let mut side_coarse: Vec<Vec<ChartPoint>> = Vec::with_capacity(polys.len());
        for poly in &polys {
            let picks = downsample(poly);
            coarse.extend_from_slice(&picks[..picks.len() - 1]);
            side_coarse.push(picks);
        }
        let area = shoelace(&coarse);
        let perimeter: f64 = coarse
            .iter()
            .zip(coarse.iter().cycle().skip(1))
            .map(|(a, b)| a.chart_distance(b))
            .sum();
        if area.abs() < 1e-9 * perimeter * perimeter {
            return Err(GeodivError::NonSimplePolygon);
        }
        if !is_simple(&coarse) {
            return Err(GeodivError::NonSimplePolygon);
        }

        let triangles = triangulate(&coarse)?;
        let total_area: f64 = triangles.iter().map(|t| tri_area(t).abs()).sum();
        let mut total = 0.0;
        for t in &triangles {
            let tol = QUAD_TOL * (tri_area(t).abs() / total_area).max(1e-3);
            total += adaptive_tri(f, t, tol, 0)?;
        }

        // Sliver corrections: signed area between each coarse chord and the
        // fine arc it replaced, fanned into sub-triangles small enough that
        // a one-point rule is exact for all practical purposes.
        for (poly, picks) in polys.iter().zip(&side_coarse) {
            let mut fine_i = 0usize;
            for w in picks.windows(2) {
                let anchor = w[0];
                // Advance to the fine index of the next pick.
                let start_i = fine_i;
                while fine_i + 1 < poly.len() && poly[fine_i] != w[1] {
                    fine_i += 1;
                }
                for j in start_i..fine_i {
                    let (p, q) = (poly[j], poly[j + 1]);
                    let a2 = chart_cross(
                        (p.u - anchor.u, p.v - anchor.v),
                        (q.u - anchor.u, q.v - anchor.v),
                    );
                    if a2 == 0.0 {
                        continue;
                    }
                    let cu = (anchor.u + p.u + q.u) / 3.0;
                    let cv = (anchor.v + p.v + q.v) / 3.0;
                    total += 0.5 * a2 * f(cu, cv)?;
                }
            }
        }
        Ok(total)
    }
}

// Signed areas are always accumulated about a local origin taken from the
// point set itself. Cross products of absolute chart coordinates lose all
// significance once the region is much smaller than its distance from the
// chart origin (a polygon with 1e-9 sides near u = 1 rounds to exactly zero
// area), while differences from a nearby origin stay at the polygon's own
// scale.

fn loop_signed_area(polys: &[Vec<ChartPoint>]) -> f64 {
    let o = polys[0][0];
    let mut a2 = 0.0;
    for poly in polys {
        for w in poly.windows(2) {
            a2 += chart_cross((w[0].u - o.u, w[0].v - o.v), (w[1].u - o.u, w[1].v - o.v));
        }
    }
    // Sides join head to tail, so the per-side sums already close the loop
    // up to the joint gaps (within CLOSURE_TOL).
    0.5 * a2
}

fn shoelace(pts: &[ChartPoint]) -> f64 {
    let o = pts[0];
    let mut a2 = 0.0;
    for i in 0..pts.len() {
        let p = pts[i];
        let q = pts[(i + 1) % pts.len()];
        a2 += chart_cross((p.u - o.u, p.v - o.v), (q.u - o.u, q.v - o.v));
    }
    0.5 * a2
}

fn tri_area(t: &[ChartPoint; 3]) -> f64 {
    0.5 * chart_cross(
        (t[1].u - t[0].u, t[1].v - t[0].v),
        (t[2].u - t[0].u, t[2].v - t[0].v),
    )
}

/// Pick coarse vertices out of a fine polyline: endpoints always, interior
/// points at roughly COARSE_EDGE spacing, at least MIN_EDGES_PER_SIDE edges.
fn downsample(poly: &[ChartPoint]) -> Vec<ChartPoint> {
    let n = poly.len();
    if n <= MIN_EDGES_PER_SIDE + 1 {
        return poly.to_vec();
    }
    let len: f64 = poly.windows(2).map(|w| w[0].chart_distance(&w[1])).sum();
    let edges = ((len / COARSE_EDGE).ceil() as usize)
        .max(MIN_EDGES_PER_SIDE)
        .min(n - 1);
    let target = len / edges as f64;
    let mut picks = vec![poly[0]];
    let mut acc = 0.0;
    for w in poly.windows(2) {
        acc += w[0].chart_distance(&w[1]);
        if acc >= target * picks.len() as f64 && picks.len() < edges {
            picks.push(w[1]);
        }
    }
    picks.push(poly[n - 1]);
    // The accumulated pick may duplicate the endpoint.
    if picks.len() >= 2 && picks[picks.len() - 2] == picks[picks.len() - 1] {
        picks.pop();
    }
    picks
}

/// Proper-crossing test for non-adjacent coarse edges. O(n^2) but n is the
/// coarse vertex count.
fn is_simple(pts: &[ChartPoint]) -> bool {
    let n = pts.len();
    let seg = |i: usize| (pts[i], pts[(i + 1) % n]);
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue; // adjacent around the loop
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            let d1 = chart_cross((b.u - a.u, b.v - a.v), (c.u - a.u, c.v - a.v));
            let d2 = chart_cross((b.u - a.u, b.v - a.v), (d.u - a.u, d.v - a.v));
            let d3 = chart_cross((d.u - c.u, d.v - c.v), (a.u - c.u, a.v - c.v));
            let d4 = chart_cross((d.u - c.u, d.v - c.v), (b.u - c.u, b.v - c.v));
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return false;
            }
        }
    }
    true
}

/// Split a counterclockwise simple polygon into triangles: a centroid fan
/// when the centroid sees every edge, ear clipping otherwise.
fn triangulate(pts: &[ChartPoint]) -> Result<Vec<[ChartPoint; 3]>> {
    let n = pts.len();
    let area = shoelace(pts);
    // Area centroid, accumulated about a local origin like the areas.
    let o = pts[0];
    let (mut cu, mut cv) = (0.0, 0.0);
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        let (pu, pv) = (p.u - o.u, p.v - o.v);
        let (qu, qv) = (q.u - o.u, q.v - o.v);
        let w = chart_cross((pu, pv), (qu, qv));
        cu += (pu + qu) * w;
        cv += (pv + qv) * w;
    }
    let c = ChartPoint::new(o.u + cu / (6.0 * area), o.v + cv / (6.0 * area));
    let star = (0..n).all(|i| {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        chart_cross((q.u - p.u, q.v - p.v), (c.u - p.u, c.v - p.v)) > 0.0
    });
    if star {
        return Ok((0..n).map(|i| [c, pts[i], pts[(i + 1) % n]]).collect());
    }

    // Ear clipping.
    let mut idx: Vec<usize> = (0..n).collect();
    let mut tris = Vec::with_capacity(n - 2);
    let eps = 1e-12 * area.abs();
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for k in 0..m {
            let (i0, i1, i2) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let (a, b, c) = (pts[i0], pts[i1], pts[i2]);
            let convex = chart_cross((b.u - a.u, b.v - a.v), (c.u - b.u, c.v - b.v)) > -eps;
            if !convex {
                continue;
            }
            let ear = [a, b, c];
            let blocked = idx.iter().any(|&j| {
                if j == i0 || j == i1 || j == i2 {
                    return false;
                }
                point_strictly_inside(&ear, pts[j])
            });
            if !blocked {
                if tri_area(&ear).abs() > eps {
                    tris.push(ear);
                }
                idx.remove(k);
                clipped = true;
                break;
            }
        }
        if !clipped {
            return Err(GeodivError::NonSimplePolygon);
        }
    }
    tris.push([pts[idx[0]], pts[idx[1]], pts[idx[2]]]);
    Ok(tris)
}

fn point_strictly_inside(t: &[ChartPoint; 3], p: ChartPoint) -> bool {
    let s =
        |a: ChartPoint, b: ChartPoint| chart_cross((b.u - a.u, b.v - a.v), (p.u - a.u, p.v - a.v));
    let (d0, d1, d2) = (s(t[0], t[1]), s(t[1], t[2]), s(t[2], t[0]));
    (d0 > 0.0 && d1 > 0.0 && d2 > 0.0) || (d0 < 0.0 && d1 < 0.0 && d2 < 0.0)
}

fn rule(f: &dyn Fn(f64, f64) -> Result<f64>, t: &[ChartPoint; 3]) -> Result<f64> {
    let area = tri_area(t);
    let mut acc = 0.0;
    for &(l1, l2, w) in &QUAD_POINTS {
        let l3 = 1.0 - l1 - l2;
        let u = l1 * t[0].u + l2 * t[1].u + l3 * t[2].u;
        let v = l1 * t[0].v + l2 * t[1].v + l3 * t[2].v;
        acc += w * f(u, v)?;
    }
    Ok(area * acc)
}

fn adaptive_tri(
    f: &dyn Fn(f64, f64) -> Result<f64>,
    t: &[ChartPoint; 3],
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let whole = rule(f, t)?;
    let mid = |a: ChartPoint, b: ChartPoint| ChartPoint::new(0.5 * (a.u + b.u), 0.5 * (a.v + b.v));
    let (m01, m12, m20) = (mid(t[0], t[1]), mid(t[1], t[2]), mid(t[2], t[0]));
    let parts = [
        [t[0], m01, m20],
        [m01, t[1], m12],
        [m20, m12, t[2]],
        [m01, m12, m20],
    ];
    let mut sum = 0.0;
    for p in &parts {
        sum += rule(f, p)?;
    }
    if (whole - sum).abs() <= tol || depth >= MAX_DEPTH {
        return Ok(sum);
    }
    let mut refined = 0.0;
    for p in &parts {
        refined += adaptive_tri(f, p, 0.25 * tol, depth + 1)?;
    }
    Ok(refined)
}

/// A geodesic triangle: three connecting sides plus measured interior
/// angles.
#[derive(Debug, Clone)]
pub struct GeodesicTriangle {
    polygon: ChartPolygon,
    vertices: [ChartPoint; 3],
    angles: [f64; 3],
}

impl GeodesicTriangle {
    /// Build from three sides already laid head to tail (a→b, b→c, c→a).
    pub fn from_sides(sides: [GeodesicPath; 3]) -> Result<Self> {
        let vertices = [
            sides[0].start().point(),
            sides[1].start().point(),
            sides[2].start().point(),
        ];
        let polygon = ChartPolygon::new(sides.to_vec())?;
        let angles = polygon.interior_angles()?;
        Ok(GeodesicTriangle {
            polygon,
            vertices,
            angles: [angles[0], angles[1], angles[2]],
        })
    }

    /// Build by connecting three vertices with shooting geodesics.
    pub fn connect(
        surface: &Surface,
        a: ChartPoint,
        b: ChartPoint,
        c: ChartPoint,
        step: f64,
    ) -> Result<Self> {
        let ab = crate::geodesic::connect(surface, a, b, step)?;
        let bc = crate::geodesic::connect(surface, b, c, step)?;
        let ca = crate::geodesic::connect(surface, c, a, step)?;
        GeodesicTriangle::from_sides([ab, bc, ca])
    }

    pub fn vertices(&self) -> [ChartPoint; 3] {
        self.vertices
    }

    pub fn sides(&self) -> &[GeodesicPath] {
        self.polygon.sides()
    }

    /// Interior angles at the three vertices, in vertex order.
    pub fn angles(&self) -> [f64; 3] {
        self.angles
    }

    /// α + β + γ - π.
    pub fn angle_excess(&self) -> f64 {
        self.angles.iter().sum::<f64>() - std::f64::consts::PI
    }

    pub fn curvature_integral(&self) -> Result<f64> {
        self.polygon.curvature_integral()
    }

    pub fn abs_curvature_integral(&self) -> Result<f64> {
        self.polygon.abs_curvature_integral()
    }

    pub fn area(&self) -> Result<f64> {
        self.polygon.area()
    }

    /// ∬ K dA - (α + β + γ - π); zero in exact arithmetic.
    pub fn residual(&self) -> Result<f64> {
        Ok(self.curvature_integral()? - self.angle_excess())
    }

    pub fn polygon(&self) -> &ChartPolygon {
        &self.polygon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::{connect, integrate, rotate_tangent, TangentVector};
    use crate::surface::gallery;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn plane_triangle_has_zero_excess_and_euclidean_area() {
        let s = gallery::plane();
        let t = GeodesicTriangle::connect(
            &s,
            ChartPoint::new(0.0, 0.0),
            ChartPoint::new(1.0, 0.0),
            ChartPoint::new(0.0, 1.0),
            1e-3,
        )
        .unwrap();
        let angles = t.angles();
        assert_abs_diff_eq!(angles[0], FRAC_PI_2, epsilon = 1e-9);
        assert_abs_diff_eq!(angles[1], FRAC_PI_4, epsilon = 1e-9);
        assert_abs_diff_eq!(angles[2], FRAC_PI_4, epsilon = 1e-9);
        assert_abs_diff_eq!(t.angle_excess(), 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(t.curvature_integral().unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.area().unwrap(), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(t.residual().unwrap(), 0.0, epsilon = 1e-9);
    }

    /// Spherical excess by L'Huilier's theorem from the three side arcs.
    fn lhuilier_excess(a: f64, b: f64, c: f64) -> f64 {
        let s = 0.5 * (a + b + c);
        4.0 * ((s / 2.0).tan()
            * ((s - a) / 2.0).tan()
            * ((s - b) / 2.0).tan()
            * ((s - c) / 2.0).tan())
        .sqrt()
        .atan()
    }

    #[test]
    fn sphere_triangle_matches_lhuilier() {
        let s = gallery::sphere(1.0);
        let va = ChartPoint::new(FRAC_PI_2, 0.0);
        let vb = ChartPoint::new(FRAC_PI_2, PI / 8.0);
        let vc = ChartPoint::new(FRAC_PI_2 - PI / 8.0, 0.0);
        let t = GeodesicTriangle::connect(&s, va, vb, vc, 2.5e-4).unwrap();
        // Side arcs from ambient dot products.
        let amb = |p: ChartPoint| s.evaluate(p.u, p.v).unwrap();
        let arc = |p: ChartPoint, q: ChartPoint| amb(p).dot(&amb(q)).clamp(-1.0, 1.0).acos();
        let oracle = lhuilier_excess(arc(va, vb), arc(vb, vc), arc(vc, va));
        assert_abs_diff_eq!(t.angle_excess(), oracle, epsilon = 1e-9);
        assert_abs_diff_eq!(t.curvature_integral().unwrap(), oracle, epsilon = 1e-8);
        // On the unit sphere the area equals the excess.
        assert_abs_diff_eq!(t.area().unwrap(), oracle, epsilon = 1e-8);
        assert_abs_diff_eq!(t.residual().unwrap(), 0.0, epsilon = 1e-8);
        // Side lengths equal the arcs.
        assert_abs_diff_eq!(t.sides()[0].length(), arc(va, vb), epsilon = 1e-8);
    }

    #[test]
    fn lune_integral_is_twice_the_opening_angle() {
        // A 2-gon bounded by two great-circle arcs between antipodes.
        let s = gallery::sphere(1.0);
        let p = ChartPoint::new(FRAC_PI_2, -FRAC_PI_2);
        let east = TangentVector::new(p, 0.0, 1.0);
        let delta = 0.4;
        let w1 = rotate_tangent(&s, &east, 0.5 * delta).unwrap();
        let w2 = rotate_tangent(&s, &east, -0.5 * delta).unwrap();
        let side1 = integrate(&s, w1, PI, 1e-3).unwrap();
        let side2 = integrate(&s, w2, PI, 1e-3).unwrap().reversed().unwrap();
        let poly = ChartPolygon::new(vec![side1, side2]).unwrap();
        assert_abs_diff_eq!(
            poly.curvature_integral().unwrap(),
            2.0 * delta,
            epsilon = 1e-7
        );
        assert_abs_diff_eq!(poly.angle_excess().unwrap(), 2.0 * delta, epsilon = 1e-7);
        let angles = poly.interior_angles().unwrap();
        assert_abs_diff_eq!(angles[0], delta, epsilon = 1e-8);
        assert_abs_diff_eq!(angles[1], delta, epsilon = 1e-8);
    }

    #[test]
    fn splitting_by_a_cevian_preserves_the_integral() {
        let s = gallery::saddle();
        let a = ChartPoint::new(0.1, 0.4);
        let b = ChartPoint::new(-0.4, -0.3);
        let c = ChartPoint::new(0.6, -0.2);
        let whole = GeodesicTriangle::connect(&s, a, b, c, 5e-4).unwrap();
        let bc = connect(&s, b, c, 5e-4).unwrap();
        let m = bc.point_at(0.5 * bc.length());
        let left = GeodesicTriangle::connect(&s, a, b, m, 5e-4).unwrap();
        let right = GeodesicTriangle::connect(&s, a, m, c, 5e-4).unwrap();
        let sum = left.curvature_integral().unwrap() + right.curvature_integral().unwrap();
        assert_abs_diff_eq!(whole.curvature_integral().unwrap(), sum, epsilon = 1e-8);
        let area_sum = left.area().unwrap() + right.area().unwrap();
        assert_abs_diff_eq!(whole.area().unwrap(), area_sum, epsilon = 1e-8);
    }

    #[test]
    fn bowtie_is_rejected() {
        let s = gallery::plane();
        let seg = |a: (f64, f64), b: (f64, f64)| {
            connect(
                &s,
                ChartPoint::new(a.0, a.1),
                ChartPoint::new(b.0, b.1),
                1e-2,
            )
            .unwrap()
        };
        let sides = vec![
            seg((0.0, 0.0), (1.0, 1.0)),
            seg((1.0, 1.0), (1.0, 0.0)),
            seg((1.0, 0.0), (0.0, 1.0)),
            seg((0.0, 1.0), (0.0, 0.0)),
        ];
        let poly = ChartPolygon::new(sides).unwrap();
        assert!(matches!(
            poly.curvature_integral(),
            Err(GeodivError::NonSimplePolygon)
        ));
    }

    #[test]
    fn gaping_sides_are_rejected_up_front() {
        let s = gallery::plane();
        let a = connect(
            &s,
            ChartPoint::new(0.0, 0.0),
            ChartPoint::new(1.0, 0.0),
            1e-2,
        )
        .unwrap();
        let b = connect(
            &s,
            ChartPoint::new(2.0, 0.0),
            ChartPoint::new(0.0, 0.0),
            1e-2,
        )
        .unwrap();
        assert!(matches!(
            ChartPolygon::new(vec![a, b]),
            Err(GeodivError::InvalidParameter(_))
        ));
    }

    #[test]
    fn reversing_the_boundary_does_not_change_the_integrals() {
        let s = gallery::sphere(1.0);
        let a = ChartPoint::new(1.0, 0.2);
        let b = ChartPoint::new(1.3, 0.8);
        let c = ChartPoint::new(0.8, 0.9);
        let fwd = GeodesicTriangle::connect(&s, a, b, c, 5e-4).unwrap();
        let rev = GeodesicTriangle::connect(&s, c, b, a, 5e-4).unwrap();
        assert_abs_diff_eq!(
            fwd.curvature_integral().unwrap(),
            rev.curvature_integral().unwrap(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(fwd.area().unwrap(), rev.area().unwrap(), epsilon = 1e-9);
        assert_abs_diff_eq!(fwd.angle_excess(), rev.angle_excess(), epsilon = 1e-9);
    }

    #[test]
    fn mixed_sign_curvature_shows_up_in_the_absolute_integral() {
        // A triangle straddling the torus top circle (K = 0 line) has
        // |∬K| < ∬|K|; one inside a single-sign region has equality.
        let s = gallery::torus(2.0, 1.0);
        let straddle = GeodesicTriangle::connect(
            &s,
            ChartPoint::new(FRAC_PI_2 - 0.4, 0.0),
            ChartPoint::new(FRAC_PI_2 + 0.4, 0.25),
            ChartPoint::new(FRAC_PI_2 + 0.4, -0.25),
            5e-4,
        )
        .unwrap();
        let signed = straddle.curvature_integral().unwrap();
        let total = straddle.abs_curvature_integral().unwrap();
        assert!(total > signed.abs() + 1e-3);
        let outer = GeodesicTriangle::connect(
            &s,
            ChartPoint::new(-0.3, 0.0),
            ChartPoint::new(0.3, 0.25),
            ChartPoint::new(0.3, -0.25),
            5e-4,
        )
        .unwrap();
        let signed = outer.curvature_integral().unwrap();
        let total = outer.abs_curvature_integral().unwrap();
        assert_abs_diff_eq!(total, signed.abs(), epsilon = 1e-9);
        assert!(signed > 0.0);
    }

    #[test]
    fn residuals_are_tiny_across_curved_surfaces() {
        for (name, pts) in [
            ("sphere", [(1.1, 0.4), (1.4, 0.7), (0.9, 0.9)]),
            ("saddle", [(0.2, 0.1), (-0.3, -0.2), (0.5, -0.4)]),
            ("torus", [(0.7, 0.2), (1.1, 0.5), (0.4, 0.6)]),
            ("ellipsoid", [(1.2, 0.3), (1.5, 0.6), (1.0, 0.8)]),
        ] {
            let s = gallery::by_name(name).unwrap();
            let t = GeodesicTriangle::connect(
                &s,
                ChartPoint::new(pts[0].0, pts[0].1),
                ChartPoint::new(pts[1].0, pts[1].1),
                ChartPoint::new(pts[2].0, pts[2].1),
                5e-4,
            )
            .unwrap();
            let r = t.residual().unwrap();
            assert!(r.abs() < 1e-7, "{name}: residual {r:.3e}");
        }
    }
}
