//! Earliest transversal crossing of two geodesic paths.
//!
//! Each integration cell of a path is a cubic Hermite arc; rewritten in
//! Bezier form its control points give an exact bounding box (convex hull
//! property), so a box-overlap prescreen never discards a true crossing.
//! Candidate cell pairs are refined by Newton iteration on
//! `A(t) - B(w) = 0` using the interpolated positions and tangents.
//!
//! Crossings are reported in increasing arclength along the first path;
//! hits coinciding with either path's ends (within [`ENDPOINT_TOL`] in
//! arclength) and crossings flatter than [`ANGLE_FLOOR`] are rejected as
//! errors, because neither angle measurement nor region construction is
//! meaningful there.

use crate::error::{GeodivError, Result};
use crate::geodesic::{
    angle_between, chart_cross, integrate_clipped, ChartPoint, GeodesicPath, TangentVector,
};
use crate::surface::Surface;

/// A crossing within this arclength of a path end is an endpoint hit, not a
/// transversal crossing. The band is flat and machine-scale on purpose:
/// iterative constructions legitimately produce true crossings arbitrarily
/// close to (but distinct from) a path end, while exact end-on-curve
/// coincidences land many orders of magnitude closer than this.
pub const ENDPOINT_TOL: f64 = 1e-12;
/// Minimum transversal angle: crossings flatter than this (or within the
/// same margin of pi) are tangential.
pub const ANGLE_FLOOR: f64 = 1e-6;
/// Cells per prescreen block.
const BLOCK: usize = 32;
/// Steps integrated per chunk while shooting toward a target.
const CHUNK_STEPS: usize = 200;

/// A transversal crossing of two paths.
#[derive(Debug, Clone, Copy)]
pub struct Intersection {
    /// Arclength along the first path.
    pub s_first: f64,
    /// Arclength along the second path.
    pub s_second: f64,
    pub point: ChartPoint,
    /// Crossing angle in (0, pi).
    pub angle: f64,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    s0: f64,
    s1: f64,
    lo: (f64, f64),
    hi: (f64, f64),
}

impl Cell {
    fn overlaps(&self, other: &Cell) -> bool {
        self.lo.0 <= other.hi.0
            && other.lo.0 <= self.hi.0
            && self.lo.1 <= other.hi.1
            && other.lo.1 <= self.hi.1
    }
}

/// Exact per-cell bounds from the Bezier control points of the Hermite arc.
fn cells_of(path: &GeodesicPath, from_state: usize) -> Vec<Cell> {
    let states = path.states();
    let mut cells = Vec::with_capacity(states.len().saturating_sub(from_state + 1));
    for pair in states[from_state..].windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let h = b.s - a.s;
        if h <= 0.0 {
            continue;
        }
        let pad = 1e-12;
        let us = [a.u, a.u + h / 3.0 * a.du, b.u - h / 3.0 * b.du, b.u];
        let vs = [a.v, a.v + h / 3.0 * a.dv, b.v - h / 3.0 * b.dv, b.v];
        let fold = |xs: &[f64; 4]| {
            (
                xs.iter().cloned().fold(f64::INFINITY, f64::min),
                xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            )
        };
        let (ulo, uhi) = fold(&us);
        let (vlo, vhi) = fold(&vs);
        cells.push(Cell {
            s0: a.s,
            s1: b.s,
            lo: (ulo - pad, vlo - pad),
            hi: (uhi + pad, vhi + pad),
        });
    }
    cells
}

/// Merged bounds over `BLOCK`-sized runs of cells.
fn blocks_of(cells: &[Cell]) -> Vec<(usize, usize, Cell)> {
    cells
        .chunks(BLOCK)
        .enumerate()
        .map(|(i, run)| {
            let mut merged = run[0];
            for c in &run[1..] {
                merged.lo.0 = merged.lo.0.min(c.lo.0);
                merged.lo.1 = merged.lo.1.min(c.lo.1);
                merged.hi.0 = merged.hi.0.max(c.hi.0);
                merged.hi.1 = merged.hi.1.max(c.hi.1);
            }
            merged.s0 = run[0].s0;
            merged.s1 = run[run.len() - 1].s1;
            (i * BLOCK, i * BLOCK + run.len(), merged)
        })
        .collect()
}

/// Newton refinement of a crossing inside a cell pair. Returns parameters
/// and the crossing point, or None when the cells do not actually cross.
fn refine(
    a: &GeodesicPath,
    ca: &Cell,
    b: &GeodesicPath,
    cb: &Cell,
) -> Option<(f64, f64, ChartPoint)> {
    // Chord intersection as the initial guess when the chords cross;
    // otherwise start from the cell midpoints.
    let (a0, a1) = (a.state_at(ca.s0), a.state_at(ca.s1));
    let (b0, b1) = (b.state_at(cb.s0), b.state_at(cb.s1));
    let da = (a1.u - a0.u, a1.v - a0.v);
    let db = (b1.u - b0.u, b1.v - b0.v);
    let denom = chart_cross(da, db);
    let (mut ta, mut tb) = if denom.abs() > 1e-300 {
        let rhs = (b0.u - a0.u, b0.v - a0.v);
        let x = chart_cross(rhs, db) / denom;
        let y = chart_cross(rhs, da) / denom;
        if !(-0.5..=1.5).contains(&x) || !(-0.5..=1.5).contains(&y) {
            (0.5 * (ca.s0 + ca.s1), 0.5 * (cb.s0 + cb.s1))
        } else {
            (
                ca.s0 + x.clamp(0.0, 1.0) * (ca.s1 - ca.s0),
                cb.s0 + y.clamp(0.0, 1.0) * (cb.s1 - cb.s0),
            )
        }
    } else {
        (0.5 * (ca.s0 + ca.s1), 0.5 * (cb.s0 + cb.s1))
    };
    let (ha, hb) = (ca.s1 - ca.s0, cb.s1 - cb.s0);
    let margin = 0.25;
    let (ta_lo, ta_hi) = (ca.s0 - margin * ha, ca.s1 + margin * ha);
    let (tb_lo, tb_hi) = (cb.s0 - margin * hb, cb.s1 + margin * hb);
    let mut converged = false;
    for _ in 0..60 {
        let sa = a.state_at(ta);
        let sb = b.state_at(tb);
        let r = (sa.u - sb.u, sa.v - sb.v);
        let det = sa.du * (-sb.dv) - (-sb.du) * sa.dv;
        if det.abs() < 1e-300 {
            return None;
        }
        let dt = (-r.0 * (-sb.dv) - (-sb.du) * (-r.1)) / det;
        let dw = (sa.du * (-r.1) - (-r.0) * sa.dv) / det;
        ta = (ta + dt).clamp(ta_lo, ta_hi);
        tb = (tb + dw).clamp(tb_lo, tb_hi);
        if dt.abs() + dw.abs() < 1e-13 * (1.0 + ta.abs() + tb.abs()) {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    // Reject boundary-clamped pseudo-solutions and near misses.
    if ta <= ta_lo || ta >= ta_hi || tb <= tb_lo || tb >= tb_hi {
        return None;
    }
    let sa = a.state_at(ta);
    let sb = b.state_at(tb);
    let dist = sa.point().chart_distance(&sb.point());
    if dist > 1e-10 {
        return None;
    }
    // Attribute the crossing to this cell only (neighbors will own theirs).
    if ta < ca.s0 - 1e-12 * (1.0 + ca.s0.abs()) || ta > ca.s1 + 1e-12 * (1.0 + ca.s1.abs()) {
        return None;
    }
    let pt = ChartPoint::new(0.5 * (sa.u + sb.u), 0.5 * (sa.v + sb.v));
    Some((ta, tb, pt))
}

fn scan(
    surface: &Surface,
    a: &GeodesicPath,
    a_from_state: usize,
    b: &GeodesicPath,
) -> Result<Option<Intersection>> {
    let a_cells = cells_of(a, a_from_state);
    let b_cells = cells_of(b, 0);
    if a_cells.is_empty() || b_cells.is_empty() {
        return Ok(None);
    }
    let b_blocks = blocks_of(&b_cells);
    for ca in &a_cells {
        let mut best: Option<(f64, f64, ChartPoint)> = None;
        for (lo, hi, bb) in &b_blocks {
            if !ca.overlaps(bb) {
                continue;
            }
            for cb in &b_cells[*lo..*hi] {
                if !ca.overlaps(cb) {
                    continue;
                }
                if let Some(hit) = refine(a, ca, b, cb) {
                    if best.is_none_or(|(t, _, _)| hit.0 < t) {
                        best = Some(hit);
                    }
                }
            }
        }
        if let Some((ta, tb, pt)) = best {
            if ta < ENDPOINT_TOL || ta > a.length() - ENDPOINT_TOL {
                return Err(GeodivError::EndpointHit {
                    t: ta,
                    length: a.length(),
                });
            }
            if tb < ENDPOINT_TOL || tb > b.length() - ENDPOINT_TOL {
                return Err(GeodivError::EndpointHit {
                    t: tb,
                    length: b.length(),
                });
            }
            let wa = a.tangent_at(ta);
            let wb = TangentVector {
                at: wa.at,
                ..b.tangent_at(tb)
            };
            let angle = angle_between(surface, &wa, &wb)?;
            if angle.min(std::f64::consts::PI - angle) < ANGLE_FLOOR {
                return Err(GeodivError::TangentialIntersection { angle });
            }
            return Ok(Some(Intersection {
                s_first: ta,
                s_second: tb,
                point: pt,
                angle,
            }));
        }
    }
    Ok(None)
}

/// Earliest transversal crossing of `a` and `b`, measured along `a`.
///
/// `NoIntersection` when the paths never cross; `EndpointHit` when the
/// earliest crossing coincides with either path's ends (within
/// [`ENDPOINT_TOL`] in arclength); `TangentialIntersection` when it is
/// flatter than [`ANGLE_FLOOR`].
pub fn first_intersection(a: &GeodesicPath, b: &GeodesicPath) -> Result<Intersection> {
    debug_assert!(a.surface().same_chart(b.surface()));
    match scan(a.surface(), a, 0, b)? {
        Some(hit) => Ok(hit),
        None => Err(GeodivError::NoIntersection {
            searched: a.length(),
        }),
    }
}

/// Integrate a geodesic from `start` until it first crosses `target`,
/// in chunks so at most one chunk is integrated past the crossing.
///
/// Returns the shot truncated at the crossing, plus the crossing itself
/// (`s_first` along the shot, `s_second` along `target`). The shot gives up
/// with `NoIntersection` after `budget` arclength or when it leaves the
/// chart rectangle first.
pub fn shoot_first_intersection(
    surface: &Surface,
    start: TangentVector,
    target: &GeodesicPath,
    budget: f64,
    step: f64,
) -> Result<(GeodesicPath, Intersection)> {
    if !budget.is_finite() || budget <= 0.0 {
        return Err(GeodivError::InvalidParameter(format!(
            "shot budget must be positive, got {budget}"
        )));
    }
    let chunk = CHUNK_STEPS as f64 * step;
    let mut len = chunk.min(budget);
    let mut scanned_cells = 0usize;
    loop {
        let shot = integrate_clipped(surface, start, len, step)?;
        let clipped = shot.length() < len - 1e-9;
        // Overlap one cell so a crossing on a chunk boundary is not missed.
        let from = scanned_cells.saturating_sub(1);
        if let Some(hit) = scan(surface, &shot, from, target)? {
            let path = shot.truncated(hit.s_first)?;
            return Ok((path, hit));
        }
        scanned_cells = shot.states().len().saturating_sub(1);
        if clipped || shot.length() >= budget - 1e-9 {
            return Err(GeodivError::NoIntersection {
                searched: shot.length(),
            });
        }
        len = (len + chunk).min(budget);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodesic::integrate;
    use crate::surface::gallery;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn line(s: &Surface, from: (f64, f64), dir: (f64, f64), len: f64) -> GeodesicPath {
        integrate(
            s,
            TangentVector::new(ChartPoint::new(from.0, from.1), dir.0, dir.1),
            len,
            0.01,
        )
        .unwrap()
    }

    #[test]
    fn plane_lines_cross_where_algebra_says() {
        let s = gallery::plane();
        // y = 1 - x and y = x - 1 cross at (1, 0).
        let a = line(&s, (0.0, 1.0), (1.0, -1.0), 3.0);
        let b = line(&s, (0.0, -1.0), (1.0, 1.0), 3.0);
        let hit = first_intersection(&a, &b).unwrap();
        assert_abs_diff_eq!(hit.point.u, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(hit.point.v, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(hit.s_first, 2.0_f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(hit.s_second, 2.0_f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(hit.angle, FRAC_PI_2, epsilon = 1e-9);
    }

    #[test]
    fn crossing_is_symmetric() {
        let s = gallery::plane();
        let a = line(&s, (-2.0, 0.3), (1.0, 0.1), 5.0);
        let b = line(&s, (0.0, -2.0), (0.05, 1.0), 5.0);
        let ab = first_intersection(&a, &b).unwrap();
        let ba = first_intersection(&b, &a).unwrap();
        assert_abs_diff_eq!(ab.s_first, ba.s_second, epsilon = 1e-9);
        assert_abs_diff_eq!(ab.s_second, ba.s_first, epsilon = 1e-9);
        assert_abs_diff_eq!(ab.point.u, ba.point.u, epsilon = 1e-10);
        assert_abs_diff_eq!(ab.angle, ba.angle, epsilon = 1e-9);
    }

    #[test]
    fn parallel_lines_never_cross() {
        let s = gallery::plane();
        let a = line(&s, (0.0, 0.0), (1.0, 0.0), 4.0);
        let b = line(&s, (0.0, 1.0), (1.0, 0.0), 4.0);
        assert!(matches!(
            first_intersection(&a, &b),
            Err(GeodivError::NoIntersection { .. })
        ));
    }

    #[test]
    fn earliest_of_two_sphere_crossings_is_reported() {
        // A great circle inclined by 0.3 rad starting a quarter turn west
        // of its ascending node crosses the equator at s = pi/2 and again
        // at s = 3pi/2; both lie inside the arcs below, and the report must
        // pick the first. Ambient check: starting due east from latitude
        // 0.3 at longitude -3, the descending node sits at longitude
        // -3 + pi/2 and the ascending one at -3 + 3pi/2.
        let s = gallery::sphere(1.0);
        let equator = line(&s, (FRAC_PI_2, -3.0), (0.0, 1.0), 5.9);
        let tilted = line(&s, (FRAC_PI_2 - 0.3, -3.0), (0.0, 1.0), 4.9);
        let hit = first_intersection(&equator, &tilted).unwrap();
        assert_abs_diff_eq!(hit.s_first, FRAC_PI_2, epsilon = 1e-6);
        assert_abs_diff_eq!(hit.s_second, FRAC_PI_2, epsilon = 1e-6);
        assert_abs_diff_eq!(hit.point.u, FRAC_PI_2, epsilon = 1e-6);
        assert_abs_diff_eq!(hit.point.v, -3.0 + FRAC_PI_2, epsilon = 1e-6);
        assert_abs_diff_eq!(hit.angle, 0.3, epsilon = 1e-6);
        // The second crossing really is in range (so something was skipped).
        let far = equator.point_at(3.0 * FRAC_PI_2);
        let min_d = tilted
            .states()
            .iter()
            .map(|st| far.chart_distance(&st.point()))
            .fold(f64::INFINITY, f64::min);
        assert!(min_d < 1e-2);
    }

    #[test]
    fn grazing_crossing_is_tangential() {
        let s = gallery::plane();
        let a = line(&s, (-1.0, 0.0), (1.0, 0.0), 2.0);
        let b = line(&s, (-1.0, -1e-8), (1.0, 1e-8), 2.0);
        match first_intersection(&a, &b) {
            Err(GeodivError::TangentialIntersection { angle }) => {
                assert!(angle < ANGLE_FLOOR);
            }
            other => panic!("expected tangential rejection, got {other:?}"),
        }
    }

    #[test]
    fn crossing_at_a_path_end_is_an_endpoint_hit() {
        let s = gallery::plane();
        let a = line(&s, (0.0, 0.0), (1.0, 0.0), 2.0);
        // b terminates exactly on a.
        let b = line(&s, (1.0, -1.0), (0.0, 1.0), 1.0);
        match first_intersection(&a, &b) {
            Err(GeodivError::EndpointHit { t, length }) => {
                assert_abs_diff_eq!(t, 1.0, epsilon = 1e-9);
                assert_abs_diff_eq!(length, 1.0, epsilon = 1e-12);
            }
            other => panic!("expected endpoint hit, got {other:?}"),
        }
    }

    #[test]
    fn shared_start_point_is_an_endpoint_hit() {
        let s = gallery::plane();
        let a = line(&s, (0.0, 0.0), (1.0, 0.0), 2.0);
        let b = line(&s, (0.0, 0.0), (0.0, 1.0), 2.0);
        assert!(matches!(
            first_intersection(&a, &b),
            Err(GeodivError::EndpointHit { .. })
        ));
    }

    #[test]
    fn shooting_hits_the_target_and_truncates_the_shot() {
        let s = gallery::plane();
        let target = line(&s, (0.0, 0.0), (1.0, 0.0), 3.0);
        let start = TangentVector::new(ChartPoint::new(1.0, 1.0), 0.2, -1.0);
        let (shot, hit) = shoot_first_intersection(&s, start, &target, 50.0, 0.01).unwrap();
        assert_abs_diff_eq!(hit.point.u, 1.2, epsilon = 1e-9);
        assert_abs_diff_eq!(hit.point.v, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(shot.length(), hit.s_first, epsilon = 1e-12);
        assert_abs_diff_eq!(hit.s_second, 1.2, epsilon = 1e-9);
        let end = shot.end().point();
        assert!(end.chart_distance(&hit.point) < 1e-9);
    }

    #[test]
    fn shooting_across_many_chunks_finds_a_far_crossing() {
        let s = gallery::plane();
        let target = line(&s, (80.0, -5.0), (0.0, 1.0), 10.0);
        let start = TangentVector::new(ChartPoint::new(0.0, 0.0), 1.0, 0.0);
        // step 0.05 -> chunk length 10; the crossing at x = 80 needs 8 chunks.
        let (shot, hit) = shoot_first_intersection(&s, start, &target, 120.0, 0.05).unwrap();
        assert_abs_diff_eq!(hit.point.u, 80.0, epsilon = 1e-9);
        assert_abs_diff_eq!(hit.point.v, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(shot.length(), 80.0, epsilon = 1e-8);
    }

    #[test]
    fn exhausted_budget_reports_no_intersection() {
        let s = gallery::plane();
        let target = line(&s, (50.0, -5.0), (0.0, 1.0), 10.0);
        let start = TangentVector::new(ChartPoint::new(0.0, 0.0), 1.0, 0.0);
        match shoot_first_intersection(&s, start, &target, 20.0, 0.05) {
            Err(GeodivError::NoIntersection { searched }) => {
                assert_abs_diff_eq!(searched, 20.0, epsilon = 1e-9);
            }
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn leaving_the_chart_stops_the_shot() {
        let s = gallery::plane();
        let target = line(&s, (0.0, 5.0), (1.0, 0.0), 3.0);
        let start = TangentVector::new(ChartPoint::new(90.0, 0.0), 1.0, 0.0);
        match shoot_first_intersection(&s, start, &target, 100.0, 0.05) {
            Err(GeodivError::NoIntersection { searched }) => {
                assert!(searched < 11.0);
            }
            other => panic!("expected clipped shot, got {other:?}"),
        }
    }

    #[test]
    fn curved_chart_crossing_on_the_torus() {
        let s = gallery::torus(2.0, 1.0);
        let a = line(&s, (0.0, -0.5), (0.3, 1.0), 3.0);
        let b = line(&s, (-0.8, 0.4), (1.0, -0.2), 3.0);
        let hit = first_intersection(&a, &b).unwrap();
        let pa = a.point_at(hit.s_first);
        let pb = b.point_at(hit.s_second);
        assert!(pa.chart_distance(&pb) < 1e-10);
        assert!(hit.angle > ANGLE_FLOOR && hit.angle < PI - ANGLE_FLOOR);
        // Ambient positions coincide too.
        let xa = s.evaluate(pa.u, pa.v).unwrap();
        let xb = s.evaluate(pb.u, pb.v).unwrap();
        assert!((xa - xb).norm() < 1e-9);
    }
}
