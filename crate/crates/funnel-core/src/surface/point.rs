use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};

/// Distances below this are treated as "on" a curve; crossing parities are
/// then undecidable and the caller must perturb.
pub const INCIDENCE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    Plane,
    Cylinder,
    Sphere,
}

impl Space {
    pub fn name(&self) -> &'static str {
        match self {
            Space::Plane => "plane",
            Space::Cylinder => "cylinder",
            Space::Sphere => "sphere",
        }
    }
}

/// A point on one of the three supported surfaces.
///
/// Cylinder points store θ in `[0, 2π)` and require `|z| ≤ 1`. Sphere points
/// are renormalized to unit length on construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SurfacePoint {
    Plane { x: f64, y: f64 },
    Cylinder { theta: f64, z: f64 },
    Sphere { v: [f64; 3] },
}

impl SurfacePoint {
    pub fn plane(x: f64, y: f64) -> Self {
        SurfacePoint::Plane { x, y }
    }

    pub fn cylinder(theta: f64, z: f64) -> Result<Self> {
        if !theta.is_finite() || !z.is_finite() {
            return Err(Error::InvalidInput("non-finite cylinder coordinate".into()));
        }
        if z.abs() > 1.0 + 1e-12 {
            return Err(Error::InvalidInput(format!(
                "cylinder z = {z} outside [-1, 1]"
            )));
        }
        Ok(SurfacePoint::Cylinder {
            theta: normalize_angle(theta),
            z: z.clamp(-1.0, 1.0),
        })
    }

    pub fn sphere(v: [f64; 3]) -> Result<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !n.is_finite() || n < 1e-9 {
            return Err(Error::InvalidInput(format!(
                "sphere vector with norm {n} cannot be normalized"
            )));
        }
        Ok(SurfacePoint::Sphere {
            v: [v[0] / n, v[1] / n, v[2] / n],
        })
    }

    /// Sphere point from longitude θ and colatitude φ (0 at the north pole).
    pub fn sphere_lonlat(theta: f64, colat: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = colat.sin_cos();
        SurfacePoint::Sphere {
            v: [ct * sp, st * sp, cp],
        }
    }

    pub fn north_pole(space: Space) -> Result<Self> {
        match space {
            Space::Cylinder => SurfacePoint::cylinder(0.0, 1.0),
            Space::Sphere => SurfacePoint::sphere([0.0, 0.0, 1.0]),
            Space::Plane => Err(Error::InvalidInput("the plane has no poles".into())),
        }
    }

    pub fn south_pole(space: Space) -> Result<Self> {
        match space {
            Space::Cylinder => SurfacePoint::cylinder(0.0, -1.0),
            Space::Sphere => SurfacePoint::sphere([0.0, 0.0, -1.0]),
            Space::Plane => Err(Error::InvalidInput("the plane has no poles".into())),
        }
    }

    pub fn space(&self) -> Space {
        match self {
            SurfacePoint::Plane { .. } => Space::Plane,
            SurfacePoint::Cylinder { .. } => Space::Cylinder,
            SurfacePoint::Sphere { .. } => Space::Sphere,
        }
    }

    /// Raw coordinates as serialized: `[x, y]`, `[theta, z]` or `[x, y, z]`.
    pub fn coords(&self) -> Vec<f64> {
        match *self {
            SurfacePoint::Plane { x, y } => vec![x, y],
            SurfacePoint::Cylinder { theta, z } => vec![theta, z],
            SurfacePoint::Sphere { v } => v.to_vec(),
        }
    }

    /// Embedding into R³ (the plane at z = 0, the cylinder as the unit
    /// cylinder). Used for conservative chordal bounding boxes.
    pub fn embed3(&self) -> [f64; 3] {
        match *self {
            SurfacePoint::Plane { x, y } => [x, y, 0.0],
            SurfacePoint::Cylinder { theta, z } => [theta.cos(), theta.sin(), z],
            SurfacePoint::Sphere { v } => v,
        }
    }
}

pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can return TAU for inputs just below zero
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Signed shortest angular difference b − a, in (−π, π].
pub fn wrap_angle_diff(a: f64, b: f64) -> f64 {
    let mut d = (b - a).rem_euclid(TAU);
    if d > PI {
        d -= TAU;
    }
    d
}

pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

pub(crate) fn sphere_angle(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    // atan2 form is accurate for both tiny and near-π angles
    norm3(&cross3(a, b)).atan2(dot3(a, b))
}

/// Metric distance between two points of the same space: Euclidean on the
/// plane, the flat metric with the shorter θ-representative on the cylinder,
/// the great-circle angle on the unit sphere.
///
/// Panics on mixed spaces; public operations validate spaces beforehand.
pub fn distance(a: &SurfacePoint, b: &SurfacePoint) -> f64 {
    match (a, b) {
        (SurfacePoint::Plane { x: x1, y: y1 }, SurfacePoint::Plane { x: x2, y: y2 }) => {
            (x2 - x1).hypot(y2 - y1)
        }
        (
            SurfacePoint::Cylinder { theta: t1, z: z1 },
            SurfacePoint::Cylinder { theta: t2, z: z2 },
        ) => wrap_angle_diff(*t1, *t2).hypot(z2 - z1),
        (SurfacePoint::Sphere { v: v1 }, SurfacePoint::Sphere { v: v2 }) => sphere_angle(v1, v2),
        _ => panic!("distance between points of different spaces"),
    }
}

/// Point at parameter `t ∈ [0, 1]` along the unique geodesic segment from
/// `a` to `b` (callers guarantee the segment is valid for its space).
pub fn geodesic_point(a: &SurfacePoint, b: &SurfacePoint, t: f64) -> SurfacePoint {
    match (a, b) {
        (SurfacePoint::Plane { x: x1, y: y1 }, SurfacePoint::Plane { x: x2, y: y2 }) => {
            SurfacePoint::Plane {
                x: x1 + t * (x2 - x1),
                y: y1 + t * (y2 - y1),
            }
        }
        (
            SurfacePoint::Cylinder { theta: t1, z: z1 },
            SurfacePoint::Cylinder { theta: t2, z: z2 },
        ) => {
            let dth = wrap_angle_diff(*t1, *t2);
            SurfacePoint::Cylinder {
                theta: normalize_angle(t1 + t * dth),
                z: z1 + t * (z2 - z1),
            }
        }
        (SurfacePoint::Sphere { v: va }, SurfacePoint::Sphere { v: vb }) => {
            let ang = sphere_angle(va, vb);
            if ang < 1e-14 {
                return *a;
            }
            let s = ang.sin();
            let wa = ((1.0 - t) * ang).sin() / s;
            let wb = (t * ang).sin() / s;
            let v = [
                wa * va[0] + wb * vb[0],
                wa * va[1] + wb * vb[1],
                wa * va[2] + wb * vb[2],
            ];
            let n = norm3(&v);
            SurfacePoint::Sphere {
                v: [v[0] / n, v[1] / n, v[2] / n],
            }
        }
        _ => panic!("geodesic between points of different spaces"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cylinder_normalizes_theta_and_bounds_z() {
        let p = SurfacePoint::cylinder(TAU + 0.5, 0.25).unwrap();
        match p {
            SurfacePoint::Cylinder { theta, z } => {
                assert_relative_eq!(theta, 0.5, epsilon = 1e-12);
                assert_relative_eq!(z, 0.25);
            }
            _ => unreachable!(),
        }
        assert!(SurfacePoint::cylinder(0.0, 1.5).is_err());
    }

    #[test]
    fn sphere_renormalizes() {
        let p = SurfacePoint::sphere([0.0, 0.0, 3.0]).unwrap();
        match p {
            SurfacePoint::Sphere { v } => assert!((norm3(&v) - 1.0).abs() < 1e-12),
            _ => unreachable!(),
        }
        assert!(SurfacePoint::sphere([0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn cylinder_distance_wraps() {
        let a = SurfacePoint::cylinder(0.1, 0.0).unwrap();
        let b = SurfacePoint::cylinder(TAU - 0.1, 0.0).unwrap();
        assert_relative_eq!(distance(&a, &b), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn sphere_distance_is_great_circle_angle() {
        let n = SurfacePoint::sphere([0.0, 0.0, 1.0]).unwrap();
        let e = SurfacePoint::sphere([1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(distance(&n, &e), PI / 2.0, epsilon = 1e-12);
    }
}
