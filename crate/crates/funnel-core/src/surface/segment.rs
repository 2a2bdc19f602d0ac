use super::point::{
    cross3, dot3, norm3, sphere_angle, wrap_angle_diff, SurfacePoint, INCIDENCE_TOL,
};
use std::f64::consts::TAU;

/// Outcome of intersecting two geodesic segments of the same space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentCrossing {
    None,
    /// Exactly one transversal interior crossing.
    Proper,
    /// Some endpoint lies within the incidence tolerance of the other
    /// segment (or the segments are collinear and touch); parity undecidable.
    Ambiguous,
}

/// Intersect two segments. The conservative rule: whenever any endpoint of
/// one segment comes within `INCIDENCE_TOL` of the other segment the result
/// is `Ambiguous`, so that crossing parities are never silently wrong.
pub fn segment_crossing(
    a1: &SurfacePoint,
    a2: &SurfacePoint,
    b1: &SurfacePoint,
    b2: &SurfacePoint,
) -> SegmentCrossing {
    match (a1, a2, b1, b2) {
        (
            SurfacePoint::Plane { x: ax1, y: ay1 },
            SurfacePoint::Plane { x: ax2, y: ay2 },
            SurfacePoint::Plane { x: bx1, y: by1 },
            SurfacePoint::Plane { x: bx2, y: by2 },
        ) => plane_crossing([*ax1, *ay1], [*ax2, *ay2], [*bx1, *by1], [*bx2, *by2]),
        (
            SurfacePoint::Cylinder { theta: at1, z: az1 },
            SurfacePoint::Cylinder { theta: at2, z: az2 },
            SurfacePoint::Cylinder { theta: bt1, z: bz1 },
            SurfacePoint::Cylinder { theta: bt2, z: bz2 },
        ) => {
            // unroll both segments into the plane; the shorter θ-representative
            // keeps every segment inside a window of width < π, so shifting one
            // segment by ±2π covers all interactions
            let a_end = at1 + wrap_angle_diff(*at1, *at2);
            let b_end = bt1 + wrap_angle_diff(*bt1, *bt2);
            let mut saw_proper = false;
            for k in [-1.0f64, 0.0, 1.0] {
                let s = k * TAU;
                match plane_crossing(
                    [*at1, *az1],
                    [a_end, *az2],
                    [bt1 + s, *bz1],
                    [b_end + s, *bz2],
                ) {
                    SegmentCrossing::Ambiguous => return SegmentCrossing::Ambiguous,
                    SegmentCrossing::Proper => saw_proper = true,
                    SegmentCrossing::None => {}
                }
            }
            if saw_proper {
                SegmentCrossing::Proper
            } else {
                SegmentCrossing::None
            }
        }
        (
            SurfacePoint::Sphere { v: p1 },
            SurfacePoint::Sphere { v: p2 },
            SurfacePoint::Sphere { v: q1 },
            SurfacePoint::Sphere { v: q2 },
        ) => sphere_crossing(p1, p2, q1, q2),
        _ => panic!("segment_crossing between points of different spaces"),
    }
}

fn plane_point_seg_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    let cx = a[0] + t * dx;
    let cy = a[1] + t * dy;
    (p[0] - cx).hypot(p[1] - cy)
}

fn plane_crossing(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> SegmentCrossing {
    // inflated bounding-box reject
    let tol = INCIDENCE_TOL;
    if p1[0].min(p2[0]) > q1[0].max(q2[0]) + tol
        || q1[0].min(q2[0]) > p1[0].max(p2[0]) + tol
        || p1[1].min(p2[1]) > q1[1].max(q2[1]) + tol
        || q1[1].min(q2[1]) > p1[1].max(p2[1]) + tol
    {
        return SegmentCrossing::None;
    }
    let dmin = plane_point_seg_distance(p1, q1, q2)
        .min(plane_point_seg_distance(p2, q1, q2))
        .min(plane_point_seg_distance(q1, p1, p2))
        .min(plane_point_seg_distance(q2, p1, p2));
    if dmin <= tol {
        return SegmentCrossing::Ambiguous;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| -> f64 {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
        SegmentCrossing::Proper
    } else {
        SegmentCrossing::None
    }
}

fn sphere_point_arc_distance(q: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let n = cross3(a, b);
    let nn = norm3(&n);
    if nn < 1e-15 {
        return sphere_angle(q, a).min(sphere_angle(q, b));
    }
    let n = [n[0] / nn, n[1] / nn, n[2] / nn];
    let qn = dot3(q, &n);
    let t = [q[0] - qn * n[0], q[1] - qn * n[1], q[2] - qn * n[2]];
    let tn = norm3(&t);
    if tn < 1e-15 {
        // q is a pole of the arc's great circle
        return std::f64::consts::FRAC_PI_2;
    }
    let c = [t[0] / tn, t[1] / tn, t[2] / tn];
    if on_arc(&c, a, b) {
        sphere_angle(q, &c)
    } else {
        sphere_angle(q, a).min(sphere_angle(q, b))
    }
}

/// Angle-sum membership test for arcs of angle < π.
fn on_arc(c: &[f64; 3], a: &[f64; 3], b: &[f64; 3]) -> bool {
    let ab = sphere_angle(a, b);
    sphere_angle(a, c) + sphere_angle(c, b) <= ab + 1e-9
}

fn sphere_crossing(
    p1: &[f64; 3],
    p2: &[f64; 3],
    q1: &[f64; 3],
    q2: &[f64; 3],
) -> SegmentCrossing {
    let tol = INCIDENCE_TOL;
    let dmin = sphere_point_arc_distance(p1, q1, q2)
        .min(sphere_point_arc_distance(p2, q1, q2))
        .min(sphere_point_arc_distance(q1, p1, p2))
        .min(sphere_point_arc_distance(q2, p1, p2));
    if dmin <= tol {
        return SegmentCrossing::Ambiguous;
    }
    let np = cross3(p1, p2);
    let nq = cross3(q1, q2);
    let npn = norm3(&np);
    let nqn = norm3(&nq);
    if npn < 1e-15 || nqn < 1e-15 {
        return SegmentCrossing::None; // degenerate arcs rejected upstream
    }
    let np = [np[0] / npn, np[1] / npn, np[2] / npn];
    let nq = [nq[0] / nqn, nq[1] / nqn, nq[2] / nqn];
    let d = cross3(&np, &nq);
    let dn = norm3(&d);
    if dn < 1e-12 {
        // same great circle; touching arcs were caught by the distance gate
        return SegmentCrossing::None;
    }
    for sign in [1.0f64, -1.0] {
        let c = [sign * d[0] / dn, sign * d[1] / dn, sign * d[2] / dn];
        let int_p = on_arc(&c, p1, p2)
            && sphere_angle(&c, p1) > tol
            && sphere_angle(&c, p2) > tol;
        let int_q = on_arc(&c, q1, q2)
            && sphere_angle(&c, q1) > tol
            && sphere_angle(&c, q2) > tol;
        if int_p && int_q {
            return SegmentCrossing::Proper;
        }
    }
    SegmentCrossing::None
}

/// Distance from a point to a geodesic segment of the same space.
pub fn point_segment_distance(p: &SurfacePoint, a: &SurfacePoint, b: &SurfacePoint) -> f64 {
    match (p, a, b) {
        (
            SurfacePoint::Plane { x, y },
            SurfacePoint::Plane { x: ax, y: ay },
            SurfacePoint::Plane { x: bx, y: by },
        ) => plane_point_seg_distance([*x, *y], [*ax, *ay], [*bx, *by]),
        (
            SurfacePoint::Cylinder { theta, z },
            SurfacePoint::Cylinder { theta: at, z: az },
            SurfacePoint::Cylinder { theta: bt, z: bz },
        ) => {
            let b_end = at + wrap_angle_diff(*at, *bt);
            let mut best = f64::INFINITY;
            for k in [-1.0f64, 0.0, 1.0] {
                best = best.min(plane_point_seg_distance(
                    [theta + k * TAU, *z],
                    [*at, *az],
                    [b_end, *bz],
                ));
            }
            best
        }
        (
            SurfacePoint::Sphere { v },
            SurfacePoint::Sphere { v: va },
            SurfacePoint::Sphere { v: vb },
        ) => sphere_point_arc_distance(v, va, vb),
        _ => panic!("point_segment_distance between points of different spaces"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::point::Space;

    fn pl(x: f64, y: f64) -> SurfacePoint {
        SurfacePoint::plane(x, y)
    }

    #[test]
    fn plane_proper_crossing() {
        let r = segment_crossing(&pl(0.0, -1.0), &pl(0.0, 1.0), &pl(-1.0, 0.0), &pl(1.0, 0.0));
        assert_eq!(r, SegmentCrossing::Proper);
    }

    #[test]
    fn plane_endpoint_touch_is_ambiguous() {
        let r = segment_crossing(&pl(0.0, 0.0), &pl(0.0, 1.0), &pl(-1.0, 0.0), &pl(1.0, 0.0));
        assert_eq!(r, SegmentCrossing::Ambiguous);
    }

    #[test]
    fn plane_disjoint() {
        let r = segment_crossing(&pl(0.0, 0.5), &pl(1.0, 0.5), &pl(0.0, 0.0), &pl(1.0, 0.0));
        assert_eq!(r, SegmentCrossing::None);
    }

    #[test]
    fn cylinder_crossing_across_wrap() {
        let a1 = SurfacePoint::cylinder(TAU - 0.1, -0.5).unwrap();
        let a2 = SurfacePoint::cylinder(0.1, 0.5).unwrap();
        let b1 = SurfacePoint::cylinder(TAU - 0.2, 0.0).unwrap();
        let b2 = SurfacePoint::cylinder(0.2, 0.0).unwrap();
        assert_eq!(segment_crossing(&a1, &a2, &b1, &b2), SegmentCrossing::Proper);
    }

    #[test]
    fn sphere_meridian_crosses_equator_arc() {
        let n = SurfacePoint::sphere([0.0, 0.0, 1.0]).unwrap();
        let s = SurfacePoint::sphere([0.0, 0.0, -1.0]).unwrap();
        let _ = (n, s); // meridian arcs of angle π are built from two segments
        let m1 = SurfacePoint::sphere([0.5, 0.0, 1.0]).unwrap();
        let m2 = SurfacePoint::sphere([0.5, 0.0, -1.0]).unwrap();
        let e1 = SurfacePoint::sphere([1.0, -0.5, 0.0]).unwrap();
        let e2 = SurfacePoint::sphere([1.0, 0.5, 0.0]).unwrap();
        assert_eq!(segment_crossing(&m1, &m2, &e1, &e2), SegmentCrossing::Proper);
    }

    #[test]
    fn point_segment_distance_wraps_on_cylinder() {
        let p = SurfacePoint::cylinder(TAU - 0.05, 0.0).unwrap();
        let a = SurfacePoint::cylinder(0.05, -0.5).unwrap();
        let b = SurfacePoint::cylinder(0.05, 0.5).unwrap();
        let d = point_segment_distance(&p, &a, &b);
        assert!((d - 0.1).abs() < 1e-12, "d = {d}");
        assert_eq!(p.space(), Space::Cylinder);
    }
}
