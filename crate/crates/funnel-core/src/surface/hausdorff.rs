use super::point::{distance, SurfacePoint};
use super::polyline::Polyline;
use crate::error::{Error, Result};

fn directed(a: &[SurfacePoint], b: &[SurfacePoint]) -> f64 {
    let mut sup = 0.0_f64;
    for p in a {
        let mut best = f64::INFINITY;
        for q in b {
            let d = distance(p, q);
            if d < best {
                best = d;
                if best <= sup {
                    break; // cannot raise the supremum
                }
            }
        }
        if best > sup {
            sup = best;
        }
    }
    sup
}

/// Hausdorff distance between two nonempty point sets of the same space:
/// `max(sup_{a∈A} d(a, B), sup_{b∈B} d(b, A))` in the space's metric.
pub fn hausdorff_distance(a: &[SurfacePoint], b: &[SurfacePoint]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput(
            "hausdorff_distance needs nonempty sets".into(),
        ));
    }
    let space = a[0].space();
    if a.iter().chain(b.iter()).any(|p| p.space() != space) {
        return Err(Error::InvalidInput(
            "hausdorff_distance needs sets in one space".into(),
        ));
    }
    Ok(directed(a, b).max(directed(b, a)))
}

/// Hausdorff distance between two polylines densified to resolution `h`.
/// The result carries densification error at most `h`.
pub fn hausdorff_polylines(a: &Polyline, b: &Polyline, h: f64) -> Result<f64> {
    if h <= 0.0 {
        return Err(Error::InvalidInput("densification step must be > 0".into()));
    }
    hausdorff_distance(&a.densify(h), &b.densify(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn circle(r: f64, n: usize) -> Polyline {
        Polyline::closed(
            (0..n)
                .map(|i| {
                    let a = TAU * i as f64 / n as f64;
                    SurfacePoint::plane(r * a.cos(), r * a.sin())
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_sets_have_zero_distance() {
        let pts: Vec<_> = (0..32)
            .map(|i| SurfacePoint::sphere_lonlat(TAU * i as f64 / 32.0, std::f64::consts::FRAC_PI_2))
            .collect();
        assert_eq!(hausdorff_distance(&pts, &pts).unwrap(), 0.0);
    }

    #[test]
    fn concentric_circles_radial_gap() {
        // analytic oracle: concentric circles of radii 1 and 1.25 are at
        // Hausdorff distance exactly 0.25
        let d = hausdorff_polylines(&circle(1.0, 256), &circle(1.25, 256), 1e-2).unwrap();
        assert_relative_eq!(d, 0.25, epsilon = 1e-3);
    }

    #[test]
    fn single_point_sets() {
        let a = [SurfacePoint::plane(0.0, 0.0)];
        let b = [SurfacePoint::plane(3.0, 4.0)];
        assert_relative_eq!(hausdorff_distance(&a, &b).unwrap(), 5.0);
    }

    #[test]
    fn empty_or_mixed_inputs_rejected() {
        let a = [SurfacePoint::plane(0.0, 0.0)];
        assert!(hausdorff_distance(&a, &[]).is_err());
        let b = [SurfacePoint::cylinder(0.0, 0.0).unwrap()];
        assert!(hausdorff_distance(&a, &b).is_err());
    }
}
