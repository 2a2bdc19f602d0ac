use super::point::{wrap_angle_diff, Space, SurfacePoint, INCIDENCE_TOL};
use super::polyline::Polyline;
use super::segment::{point_segment_distance, segment_crossing, SegmentCrossing};
use crate::error::{Error, Result};
use std::f64::consts::{PI, TAU};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
}

/// A simple closed polygonal curve.
///
/// Construction verifies simplicity by pairwise segment intersection:
/// non-adjacent segments must not intersect and adjacent segments meet only
/// at their shared vertex.
#[derive(Clone, Debug)]
pub struct JordanCurve {
    base: Polyline,
    orientation: Orientation,
}

/// Axis-aligned box around a segment in the R³ embedding, used as a
/// conservative prefilter (chordal distance never exceeds intrinsic).
#[derive(Clone, Copy, Debug)]
struct Bbox {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Bbox {
    fn of_segment(a: &SurfacePoint, b: &SurfacePoint) -> Bbox {
        let pa = a.embed3();
        let pb = b.embed3();
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        for i in 0..3 {
            lo[i] = pa[i].min(pb[i]);
            hi[i] = pa[i].max(pb[i]);
        }
        // geodesics on the sphere/cylinder bulge off the chord by at most
        // the chord length; inflating by half of it is a safe cover
        let diag = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2) + (hi[2] - lo[2]).powi(2))
            .sqrt();
        let pad = 0.5 * diag + 1e-9;
        for i in 0..3 {
            lo[i] -= pad;
            hi[i] += pad;
        }
        Bbox { lo, hi }
    }

    fn intersects(&self, other: &Bbox) -> bool {
        (0..3).all(|i| self.lo[i] <= other.hi[i] && other.lo[i] <= self.hi[i])
    }
}

impl JordanCurve {
    pub fn new(base: Polyline) -> Result<Self> {
        if !base.is_closed() {
            return Err(Error::InvalidInput("Jordan curve must be closed".into()));
        }
        Self::check_simple(&base)?;
        let orientation = Self::compute_orientation(&base);
        Ok(JordanCurve { base, orientation })
    }

    pub fn base(&self) -> &Polyline {
        &self.base
    }

    pub fn space(&self) -> Space {
        self.base.space()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    fn check_simple(base: &Polyline) -> Result<()> {
        let segs: Vec<_> = base.segments().collect();
        let n = segs.len();
        let boxes: Vec<_> = segs.iter().map(|(a, b)| Bbox::of_segment(a, b)).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if !boxes[i].intersects(&boxes[j]) {
                    continue;
                }
                let (a1, a2) = &segs[i];
                let (b1, b2) = &segs[j];
                match segment_crossing(a1, a2, b1, b2) {
                    SegmentCrossing::None => {}
                    _ => {
                        return Err(Error::InvalidInput(format!(
                            "curve is not simple: segments {i} and {j} intersect or touch"
                        )))
                    }
                }
            }
        }
        // adjacent segments: reject near-reversals that would fold the curve
        // back onto itself at the shared vertex
        for i in 0..n {
            let (a1, a2) = &segs[i];
            let (_, b2) = &segs[(i + 1) % n];
            let d = point_segment_distance(b2, a1, a2);
            if d <= INCIDENCE_TOL && super::point::distance(b2, a2) > INCIDENCE_TOL {
                return Err(Error::InvalidInput(format!(
                    "curve is not simple: segment {} folds back onto segment {i}",
                    (i + 1) % n
                )));
            }
        }
        Ok(())
    }

    fn compute_orientation(base: &Polyline) -> Orientation {
        let signed = match base.space() {
            Space::Plane => {
                // shoelace
                let mut area2 = 0.0;
                for (a, b) in base.segments() {
                    if let (SurfacePoint::Plane { x: x1, y: y1 }, SurfacePoint::Plane { x: x2, y: y2 }) =
                        (a, b)
                    {
                        area2 += x1 * y2 - x2 * y1;
                    }
                }
                area2
            }
            Space::Cylinder | Space::Sphere => {
                // net longitude winding
                let mut winding = 0.0;
                for (a, b) in base.segments() {
                    let (t1, t2) = (longitude(&a), longitude(&b));
                    winding += wrap_angle_diff(t1, t2);
                }
                winding
            }
        };
        if signed >= 0.0 {
            Orientation::Positive
        } else {
            Orientation::Negative
        }
    }
}

fn longitude(p: &SurfacePoint) -> f64 {
    match *p {
        SurfacePoint::Plane { x, y } => y.atan2(x),
        SurfacePoint::Cylinder { theta, .. } => theta,
        SurfacePoint::Sphere { v } => v[1].atan2(v[0]),
    }
}

/// Number of transversal intersections between a path and a Jordan curve,
/// counted with multiplicity.
///
/// Errors with `AmbiguousIncidence` when any vertex-on-curve situation within
/// the incidence tolerance is detected; the caller must perturb.
pub fn crossing_count(path: &Polyline, curve: &JordanCurve) -> Result<usize> {
    if path.space() != curve.space() {
        return Err(Error::InvalidInput(
            "path and curve live in different spaces".into(),
        ));
    }
    let curve_segs: Vec<_> = curve.base().segments().collect();
    let curve_boxes: Vec<_> = curve_segs
        .iter()
        .map(|(a, b)| Bbox::of_segment(a, b))
        .collect();
    let mut count = 0;
    for (p1, p2) in path.segments() {
        let pb = Bbox::of_segment(&p1, &p2);
        for (k, (c1, c2)) in curve_segs.iter().enumerate() {
            if !pb.intersects(&curve_boxes[k]) {
                continue;
            }
            match segment_crossing(&p1, &p2, c1, c2) {
                SegmentCrossing::None => {}
                SegmentCrossing::Proper => count += 1,
                SegmentCrossing::Ambiguous => {
                    return Err(Error::AmbiguousIncidence(
                        "path touches the curve within tolerance; perturb and retry".into(),
                    ))
                }
            }
        }
    }
    Ok(count)
}

/// Build a pole-to-pole meridian at longitude θ.
pub fn meridian(space: Space, theta: f64) -> Result<Polyline> {
    match space {
        Space::Cylinder => Polyline::open(vec![
            SurfacePoint::cylinder(theta, 1.0)?,
            SurfacePoint::cylinder(theta, -1.0)?,
        ]),
        Space::Sphere => Polyline::open(vec![
            SurfacePoint::sphere([0.0, 0.0, 1.0])?,
            SurfacePoint::sphere_lonlat(theta, PI / 3.0),
            SurfacePoint::sphere_lonlat(theta, 2.0 * PI / 3.0),
            SurfacePoint::sphere([0.0, 0.0, -1.0])?,
        ]),
        Space::Plane => Err(Error::InvalidInput("the plane has no poles".into())),
    }
}

/// True iff the curve separates the two poles (boundary circles on the
/// cylinder): a meridian has odd crossing count and neither pole lies on the
/// curve. The result does not depend on the meridian chosen; ambiguous
/// meridians are skipped deterministically.
pub fn separates_poles(curve: &JordanCurve) -> Result<bool> {
    let space = curve.space();
    if space == Space::Plane {
        return Err(Error::InvalidInput(
            "separates_poles needs a cylinder or sphere curve".into(),
        ));
    }
    for pole in [
        SurfacePoint::north_pole(space)?,
        SurfacePoint::south_pole(space)?,
    ] {
        let d = super::point_polyline_distance(&pole, curve.base());
        if d <= INCIDENCE_TOL {
            return Err(Error::AmbiguousIncidence("pole lies on the curve".into()));
        }
    }
    // golden-angle sequence of candidate meridians; skip ambiguous ones
    let golden = PI * (3.0 - 5.0_f64.sqrt());
    for k in 0..32 {
        let theta = (0.1234567 + golden * k as f64).rem_euclid(TAU);
        match crossing_count(&meridian(space, theta)?, curve) {
            Ok(c) => return Ok(c % 2 == 1),
            Err(Error::AmbiguousIncidence(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::AmbiguousIncidence(
        "no meridian avoids the curve within tolerance".into(),
    ))
}

/// A pole-to-pole path together with its crossing count against a designated
/// Jordan curve. The path is polar iff it crosses exactly once.
#[derive(Clone, Debug)]
pub struct PolarPathCandidate {
    pub path: Polyline,
    pub crossings: usize,
}

impl PolarPathCandidate {
    /// Endpoint tolerance for pole incidence.
    pub const ENDPOINT_TOL: f64 = 1e-9;

    pub fn new(path: Polyline, curve: &JordanCurve) -> Result<Self> {
        let space = path.space();
        if space == Space::Plane {
            return Err(Error::InvalidInput("polar paths need poles".into()));
        }
        let ok_end = |p: &SurfacePoint, top: bool| -> bool {
            match *p {
                SurfacePoint::Cylinder { z, .. } => {
                    if top {
                        (z - 1.0).abs() <= Self::ENDPOINT_TOL
                    } else {
                        (z + 1.0).abs() <= Self::ENDPOINT_TOL
                    }
                }
                SurfacePoint::Sphere { v } => {
                    if top {
                        (v[2] - 1.0).abs() <= Self::ENDPOINT_TOL
                    } else {
                        (v[2] + 1.0).abs() <= Self::ENDPOINT_TOL
                    }
                }
                SurfacePoint::Plane { .. } => false,
            }
        };
        let fwd = ok_end(path.first(), true) && ok_end(path.last(), false);
        let rev = ok_end(path.first(), false) && ok_end(path.last(), true);
        if !fwd && !rev {
            return Err(Error::InvalidInput(
                "path endpoints are not at the two poles".into(),
            ));
        }
        let crossings = crossing_count(&path, curve)?;
        Ok(PolarPathCandidate { path, crossings })
    }

    pub fn is_polar(&self) -> bool {
        self.crossings == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::point::distance;

    pub(crate) fn equator(space: Space, n: usize) -> JordanCurve {
        let pts: Vec<_> = (0..n)
            .map(|i| {
                let theta = TAU * i as f64 / n as f64;
                match space {
                    Space::Cylinder => SurfacePoint::cylinder(theta, 0.0).unwrap(),
                    Space::Sphere => SurfacePoint::sphere_lonlat(theta, PI / 2.0),
                    Space::Plane => unreachable!(),
                }
            })
            .collect();
        JordanCurve::new(Polyline::closed(pts).unwrap()).unwrap()
    }

    #[test]
    fn meridian_crosses_equator_once() {
        let eq = equator(Space::Sphere, 64);
        let m = meridian(Space::Sphere, 0.37).unwrap();
        assert_eq!(crossing_count(&m, &eq).unwrap(), 1);
    }

    #[test]
    fn annulus_boundary_crossed_twice() {
        // two latitude circles bound an annulus strictly above the equator;
        // a meridian enters and exits
        let band: Vec<_> = (0..64)
            .map(|i| SurfacePoint::sphere_lonlat(TAU * i as f64 / 64.0, 0.9))
            .collect();
        let upper = JordanCurve::new(Polyline::closed(band).unwrap()).unwrap();
        let m = meridian(Space::Sphere, 0.37).unwrap();
        // a single latitude circle is crossed once; the annulus boundary
        // (two circles) gives 1 + 1 = 2 transversal hits
        let band2: Vec<_> = (0..64)
            .map(|i| SurfacePoint::sphere_lonlat(TAU * i as f64 / 64.0, 1.1))
            .collect();
        let lower = JordanCurve::new(Polyline::closed(band2).unwrap()).unwrap();
        let c = crossing_count(&m, &upper).unwrap() + crossing_count(&m, &lower).unwrap();
        assert_eq!(c, 2);
    }

    #[test]
    fn path_above_equator_does_not_cross() {
        // out-and-back arc near the north pole
        let path = Polyline::open(vec![
            SurfacePoint::sphere_lonlat(0.0, 0.2),
            SurfacePoint::sphere_lonlat(1.0, 0.3),
            SurfacePoint::sphere_lonlat(2.0, 0.2),
        ])
        .unwrap();
        let eq = equator(Space::Sphere, 64);
        assert_eq!(crossing_count(&path, &eq).unwrap(), 0);
    }

    #[test]
    fn equator_separates_poles() {
        assert!(separates_poles(&equator(Space::Sphere, 64)).unwrap());
        assert!(separates_poles(&equator(Space::Cylinder, 64)).unwrap());
    }

    #[test]
    fn small_circle_away_from_poles_does_not_separate() {
        let pts: Vec<_> = (0..48)
            .map(|i| {
                let a = TAU * i as f64 / 48.0;
                // small circle of angular radius 0.2 around (1, 0, 0)
                let u = [0.0, 1.0, 0.0];
                let w = [0.0, 0.0, 1.0];
                let c = [1.0, 0.0, 0.0];
                let r = 0.2_f64;
                let v = [
                    c[0] * r.cos() + (u[0] * a.cos() + w[0] * a.sin()) * r.sin(),
                    c[1] * r.cos() + (u[1] * a.cos() + w[1] * a.sin()) * r.sin(),
                    c[2] * r.cos() + (u[2] * a.cos() + w[2] * a.sin()) * r.sin(),
                ];
                SurfacePoint::sphere(v).unwrap()
            })
            .collect();
        let c = JordanCurve::new(Polyline::closed(pts).unwrap()).unwrap();
        assert!(!separates_poles(&c).unwrap());
    }

    #[test]
    fn self_intersecting_curve_rejected() {
        let pts = vec![
            SurfacePoint::plane(0.0, 0.0),
            SurfacePoint::plane(2.0, 2.0),
            SurfacePoint::plane(2.0, 0.0),
            SurfacePoint::plane(0.0, 2.0),
        ];
        assert!(JordanCurve::new(Polyline::closed(pts).unwrap()).is_err());
    }

    #[test]
    fn polar_path_candidate_checks_endpoints() {
        let eq = equator(Space::Sphere, 64);
        let m = meridian(Space::Sphere, 0.37).unwrap();
        let cand = PolarPathCandidate::new(m, &eq).unwrap();
        assert!(cand.is_polar());
        assert!((cand.path.length() - PI).abs() < 1e-9);

        let not_polar = Polyline::open(vec![
            SurfacePoint::sphere_lonlat(0.0, 0.2),
            SurfacePoint::sphere_lonlat(0.0, 0.4),
        ])
        .unwrap();
        assert!(PolarPathCandidate::new(not_polar, &eq).is_err());
        let d = distance(
            &SurfacePoint::sphere([0.0, 0.0, 1.0]).unwrap(),
            &SurfacePoint::sphere_lonlat(0.0, 0.2),
        );
        assert!(d > 0.1);
    }
}
