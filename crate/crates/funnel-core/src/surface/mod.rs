//! Points, polylines, Jordan curves and metric predicates on the plane, the
//! cylinder `S¹ × [−1, 1]` and the unit sphere `S²`.
//!
//! Curves are polygonal (piecewise-geodesic). Sphere segments are
//! great-circle arcs of angle < π; cylinder segments take the shorter
//! θ-representative and segments of θ-extent exactly π are rejected, so
//! every segment is a unique geodesic.

mod hausdorff;
mod jordan;
mod point;
mod polyline;
mod segment;

pub use hausdorff::{hausdorff_distance, hausdorff_polylines};
pub use jordan::{
    crossing_count, separates_poles, JordanCurve, Orientation, PolarPathCandidate,
};
pub use point::{distance, geodesic_point, wrap_angle_diff, Space, SurfacePoint, INCIDENCE_TOL};
pub use polyline::Polyline;
pub use segment::{point_segment_distance, segment_crossing, SegmentCrossing};

/// Minimum distance from a point to a polyline (over all its segments).
pub fn point_polyline_distance(p: &SurfacePoint, line: &Polyline) -> f64 {
    line.segments()
        .map(|(a, b)| point_segment_distance(p, &a, &b))
        .fold(f64::INFINITY, f64::min)
}

/// The latitude circle at height `z ∈ (−1, 1)` sampled at `n` vertices:
/// `{z = const}` on the cylinder, `{v_z = z}` on the sphere.
pub fn latitude_circle(space: Space, z: f64, n: usize) -> crate::Result<JordanCurve> {
    use std::f64::consts::TAU;
    if space == Space::Plane {
        return Err(crate::Error::InvalidInput(
            "latitude circles need a cylinder or sphere".into(),
        ));
    }
    if !(-1.0..=1.0).contains(&z) || z.abs() >= 1.0 {
        return Err(crate::Error::InvalidInput(format!(
            "latitude height {z} outside (-1, 1)"
        )));
    }
    let colat = z.acos();
    let pts = (0..n)
        .map(|i| {
            let theta = TAU * i as f64 / n as f64;
            match space {
                Space::Cylinder => SurfacePoint::cylinder(theta, z),
                Space::Sphere => Ok(SurfacePoint::sphere_lonlat(theta, colat)),
                Space::Plane => unreachable!(),
            }
        })
        .collect::<crate::Result<Vec<_>>>()?;
    JordanCurve::new(Polyline::closed(pts)?)
}

/// The equator sampled at `n` vertices.
pub fn equator(space: Space, n: usize) -> crate::Result<JordanCurve> {
    latitude_circle(space, 0.0, n)
}
