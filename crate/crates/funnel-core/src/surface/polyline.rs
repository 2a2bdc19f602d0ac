use super::point::{distance, geodesic_point, wrap_angle_diff, Space, SurfacePoint};
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// An ordered piecewise-geodesic curve. All vertices share one space and
/// consecutive vertices are distinct; closed polylines also connect the last
/// vertex back to the first.
#[derive(Clone, Debug)]
pub struct Polyline {
    space: Space,
    vertices: Vec<SurfacePoint>,
    closed: bool,
}

impl Polyline {
    pub fn open(vertices: Vec<SurfacePoint>) -> Result<Self> {
        Self::new(vertices, false)
    }

    pub fn closed(vertices: Vec<SurfacePoint>) -> Result<Self> {
        Self::new(vertices, true)
    }

    pub fn new(vertices: Vec<SurfacePoint>, closed: bool) -> Result<Self> {
        let min = if closed { 3 } else { 2 };
        if vertices.len() < min {
            return Err(Error::InvalidInput(format!(
                "polyline needs at least {min} vertices, got {}",
                vertices.len()
            )));
        }
        let space = vertices[0].space();
        if vertices.iter().any(|v| v.space() != space) {
            return Err(Error::InvalidInput(
                "polyline vertices in mixed spaces".into(),
            ));
        }
        let line = Polyline {
            space,
            vertices,
            closed,
        };
        for (a, b) in line.segments() {
            let d = distance(&a, &b);
            if d <= 1e-12 {
                return Err(Error::InvalidInput(
                    "zero-length segment (consecutive vertices coincide)".into(),
                ));
            }
            match (a, b) {
                (SurfacePoint::Sphere { .. }, SurfacePoint::Sphere { .. }) => {
                    if d >= PI - 1e-9 {
                        return Err(Error::InvalidInput(
                            "antipodal consecutive sphere vertices have no unique geodesic"
                                .into(),
                        ));
                    }
                }
                (
                    SurfacePoint::Cylinder { theta: t1, .. },
                    SurfacePoint::Cylinder { theta: t2, .. },
                ) => {
                    if (wrap_angle_diff(t1, t2).abs() - PI).abs() < 1e-12 {
                        return Err(Error::InvalidInput(
                            "cylinder segment of θ-extent exactly π has no unique geodesic"
                                .into(),
                        ));
                    }
                }
                _ => {}
            }
        }
        Ok(line)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn vertices(&self) -> &[SurfacePoint] {
        &self.vertices
    }

    pub fn first(&self) -> &SurfacePoint {
        &self.vertices[0]
    }

    pub fn last(&self) -> &SurfacePoint {
        self.vertices.last().unwrap()
    }

    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.vertices.len()
        } else {
            self.vertices.len() - 1
        }
    }

    pub fn segments(&self) -> impl Iterator<Item = (SurfacePoint, SurfacePoint)> + '_ {
        let n = self.segment_count();
        (0..n).map(move |i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % self.vertices.len()];
            (a, b)
        })
    }

    /// Total metric length: the sum of per-segment geodesic lengths.
    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| distance(&a, &b)).sum()
    }

    /// Sample points along the polyline so that consecutive samples are at
    /// most `h` apart. Vertices are always included; for closed polylines the
    /// start vertex is not repeated at the end.
    pub fn densify(&self, h: f64) -> Vec<SurfacePoint> {
        let h = if h > 0.0 { h } else { f64::INFINITY };
        let mut out = Vec::new();
        for (a, b) in self.segments() {
            let len = distance(&a, &b);
            let steps = (len / h).ceil().max(1.0) as usize;
            for k in 0..steps {
                out.push(geodesic_point(&a, &b, k as f64 / steps as f64));
            }
        }
        if !self.closed {
            out.push(*self.last());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn plane_length_is_euclidean() {
        let p = Polyline::open(vec![SurfacePoint::plane(0.0, 0.0), SurfacePoint::plane(3.0, 4.0)])
            .unwrap();
        assert_relative_eq!(p.length(), 5.0);
    }

    #[test]
    fn sphere_meridian_length_is_pi() {
        // north to south pole sampled at 100 points
        let pts: Vec<_> = (0..=100)
            .map(|i| {
                let colat = PI * i as f64 / 100.0;
                SurfacePoint::sphere_lonlat(0.3, colat)
            })
            .collect();
        let p = Polyline::open(pts).unwrap();
        assert_relative_eq!(p.length(), PI, epsilon = 1e-4);
    }

    #[test]
    fn cylinder_vertical_segment_length() {
        let p = Polyline::open(vec![
            SurfacePoint::cylinder(0.0, 1.0).unwrap(),
            SurfacePoint::cylinder(0.0, -1.0).unwrap(),
        ])
        .unwrap();
        assert_relative_eq!(p.length(), 2.0);
    }

    #[test]
    fn degenerate_polyline_rejected() {
        assert!(Polyline::open(vec![SurfacePoint::plane(0.0, 0.0)]).is_err());
        assert!(Polyline::open(vec![
            SurfacePoint::plane(1.0, 1.0),
            SurfacePoint::plane(1.0, 1.0)
        ])
        .is_err());
    }

    #[test]
    fn antipodal_sphere_vertices_rejected() {
        assert!(Polyline::open(vec![
            SurfacePoint::sphere([0.0, 0.0, 1.0]).unwrap(),
            SurfacePoint::sphere([0.0, 0.0, -1.0]).unwrap(),
        ])
        .is_err());
    }

    #[test]
    fn length_invariant_under_vertex_insertion() {
        let a = SurfacePoint::plane(0.0, 0.0);
        let b = SurfacePoint::plane(2.0, 1.0);
        let c = SurfacePoint::plane(3.0, -1.0);
        let p = Polyline::open(vec![a, b, c]).unwrap();
        let mid = geodesic_point(&a, &b, 0.37);
        let q = Polyline::open(vec![a, mid, b, c]).unwrap();
        assert_relative_eq!(p.length(), q.length(), epsilon = 1e-12);
    }

    #[test]
    fn densify_respects_resolution() {
        let p = Polyline::open(vec![SurfacePoint::plane(0.0, 0.0), SurfacePoint::plane(1.0, 0.0)])
            .unwrap();
        let samples = p.densify(0.1);
        assert!(samples.len() >= 11);
        for w in samples.windows(2) {
            assert!(distance(&w[0], &w[1]) <= 0.1 + 1e-12);
        }
    }
}
