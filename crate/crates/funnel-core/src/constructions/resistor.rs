//! Button curves and zippered resistor curves on the cylinder band.
//!
//! The resistor map is a two-phase band homeomorphism applied to the
//! equator:
//! 1. a comb flow turns the equator into a square wave of alternating
//!    pockets (the buttons): U-pockets opening upward, ∩-pockets opening
//!    downward, capped by the wave's horizontal runs;
//! 2. a twist shear `θ ↦ θ + D(z)` with a steep triangle-wave `D` folds
//!    every pocket into a long switchback corridor (the zippers).
//!
//! Every polar path must thread a full switchback corridor: crossing a wall
//! at switchback depth `s` costs ≈ `s` on one side and ≈ `Λ − s` on the
//! other, so the total is the corridor length `Λ` wherever the crossing
//! happens. `Λ` is sized to the requested resistance target.

use super::slide::{BandMap, BandOp, MovingAxis, PiecewiseLinear, Trapezoid};
use crate::diffeotopy::Diffeotopy;
use crate::error::{Error, Result};
use crate::surface::{JordanCurve, Polyline, Space, SurfacePoint};
use std::f64::consts::{PI, TAU};

/// Chart point (θ, ζ) to a surface point: ζ is the cylinder height or the
/// sphere latitude angle (colatitude π/2 − ζ).
pub(crate) fn band_point(space: Space, theta: f64, zeta: f64) -> Result<SurfacePoint> {
    match space {
        Space::Cylinder => SurfacePoint::cylinder(theta, zeta),
        Space::Sphere => Ok(SurfacePoint::sphere_lonlat(theta, PI / 2.0 - zeta)),
        Space::Plane => Err(Error::InvalidInput("band needs a cylinder or sphere".into())),
    }
}

/// The button curve: `n` semicircular bumps riding the equator, one per
/// square of the band `S¹ × [−1/n, 1/n]`.
pub fn button_curve(n: usize) -> Result<JordanCurve> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "button curve needs n ≥ 3 buttons, got {n}"
        )));
    }
    let a = 1.0 / n as f64;
    let delta = TAU / n as f64;
    let r = a / 2.0;
    let arc_steps = 12;
    let mut pts = Vec::new();
    for k in 0..n {
        let start = k as f64 * delta;
        let center = start + delta / 2.0;
        pts.push(SurfacePoint::cylinder(start, 0.0)?);
        pts.push(SurfacePoint::cylinder(center - r, 0.0)?);
        for i in 1..arc_steps {
            let phi = PI - PI * i as f64 / arc_steps as f64;
            pts.push(SurfacePoint::cylinder(
                center + r * phi.cos(),
                r * phi.sin(),
            )?);
        }
        pts.push(SurfacePoint::cylinder(center + r, 0.0)?);
    }
    JordanCurve::new(Polyline::closed(pts)?)
}

/// Tunable pieces of the resistor construction; [`ResistorParams::derive`]
/// picks defaults from the ε-neighborhood and resistance target.
#[derive(Clone, Debug)]
pub struct ResistorParams {
    pub space: Space,
    pub epsilon: f64,
    pub l_target: f64,
    /// number of pocket walls (even); pockets alternate U/∩
    pub walls: usize,
    /// comb amplitude as a fraction of the band half-height
    pub comb_frac: f64,
    /// twist amplitude (radians)
    pub twist_amplitude: f64,
    /// twist half-period in ζ
    pub twist_half_period: f64,
    /// curve sampling step along walls
    pub sample_step: f64,
}

impl ResistorParams {
    pub fn derive(space: Space, epsilon: f64, l_target: f64) -> Result<Self> {
        if epsilon <= 0.0 || l_target <= 0.0 {
            return Err(Error::InvalidInput(
                "resistor curve needs epsilon > 0 and L > 0".into(),
            ));
        }
        if epsilon > 0.9 {
            return Err(Error::InvalidInput(
                "epsilon too large: the band must stay clear of the poles".into(),
            ));
        }
        let band = 0.95 * epsilon;
        let walls = 4usize;
        let q = TAU / walls as f64;
        let comb_frac = 0.85;
        // a pocket is q' wide, so each twist swing forces only
        // `2·A_t − q'` of horizontal travel; size the pitch from that
        let pocket_width = q * (1.0 - 0.12);
        let twist_amplitude = 1.35;
        let gain = 2.0 * twist_amplitude - pocket_width;
        if gain <= 0.2 {
            return Err(Error::Internal(
                "twist amplitude does not clear the pocket width".into(),
            ));
        }
        // corridor height ≈ comb peak-to-peak; 1.5 half-periods are lost to
        // the mouth and floor; aim 50% above the requested resistance
        let corridor_height = 2.0 * comb_frac * band;
        let lambda_target = 1.5 * l_target;
        let half_periods = (lambda_target / gain + 1.5).ceil();
        let twist_half_period = corridor_height / half_periods;
        let min_half_period = (band / 600.0).max(1.2e-4);
        if twist_half_period < min_half_period {
            return Err(Error::ResolutionTooCoarse(format!(
                "epsilon = {epsilon} too small for resistance target {l_target}: \
                 switchback pitch {twist_half_period:.2e} below the grid floor; \
                 raise the grid density or epsilon"
            )));
        }
        Ok(ResistorParams {
            space,
            epsilon,
            l_target,
            walls,
            comb_frac,
            twist_amplitude,
            twist_half_period,
            sample_step: twist_half_period / 6.0,
        })
    }

    fn band(&self) -> f64 {
        0.95 * self.epsilon
    }

    /// The two-phase band map (comb, then twist).
    pub fn band_map(&self) -> Result<BandMap> {
        let band = self.band();
        let a_c = self.comb_frac * band;
        let q = TAU / self.walls as f64;
        let ramp = 0.12 * q;

        // comb amount: periodic square-ish wave, +a_c over ∩-pockets and
        // −a_c over U-pockets, ramping across each wall
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for j in 0..self.walls {
            let wall = j as f64 * q;
            let level = if j % 2 == 0 { -a_c } else { a_c };
            xs.push(wall - ramp / 2.0);
            ys.push(-level);
            xs.push(wall + ramp / 2.0);
            ys.push(level);
        }
        let comb_amount = PiecewiseLinear::new(xs, ys, Some(TAU))?;
        let comb_gate = Trapezoid::new(-0.94 * band, -0.81 * band, 0.81 * band, 0.94 * band)?;
        let comb = BandOp::Flow {
            axis: MovingAxis::Y,
            amount: comb_amount,
            gate: comb_gate,
        };

        // twist displacement: triangle wave in ζ tapering to zero at the
        // band edge
        let support = 0.88 * band;
        let mut zs = vec![-support];
        let mut ds = vec![0.0];
        let mut z = -support + self.twist_half_period / 2.0;
        let mut sign = 1.0;
        while z < support - self.twist_half_period / 4.0 {
            zs.push(z);
            ds.push(sign * self.twist_amplitude);
            sign = -sign;
            z += self.twist_half_period;
        }
        zs.push(support);
        ds.push(0.0);
        let twist = BandOp::Twist {
            axis: MovingAxis::X,
            displacement: PiecewiseLinear::new(zs, ds, None)?,
        };

        Ok(BandMap::new(vec![vec![comb], vec![twist]]))
    }

    /// Densified equator pulled through the band map, as a surface curve.
    fn mapped_equator(&self, map: &BandMap) -> Result<JordanCurve> {
        // sample the equator finely enough to resolve both the comb ramps
        // and the twist switchbacks
        let q = TAU / self.walls as f64;
        let ramp = 0.12 * q;
        let band = self.band();
        let a_c = self.comb_frac * band;
        // within a ramp the image climbs the full comb height across every
        // switchback; keep consecutive image points within a third of the
        // switchback pitch
        let p_h = self.twist_half_period;
        let wall_steps = ((12.0 * self.twist_amplitude * a_c / (p_h * p_h)).ceil() as usize)
            .clamp(48, 20_000);
        let flat_steps = 16usize;
        let mut pts: Vec<SurfacePoint> = Vec::new();
        let mut push = |theta: f64| -> Result<()> {
            let p = map.forward([theta, 0.0]);
            let sp = band_point(self.space, p[0], p[1])?;
            Ok(pts.push(sp))
        };
        for j in 0..self.walls {
            let wall = j as f64 * q;
            for i in 0..wall_steps {
                push(wall - ramp / 2.0 + ramp * i as f64 / wall_steps as f64)?;
            }
            for i in 0..flat_steps {
                push(wall + ramp / 2.0 + (q - ramp) * i as f64 / flat_steps as f64)?;
            }
        }
        // drop consecutive duplicates introduced by flat stretches
        let mut dedup: Vec<SurfacePoint> = Vec::with_capacity(pts.len());
        for p in pts {
            if dedup
                .last()
                .map_or(true, |l| crate::surface::distance(l, &p) > 1e-9)
            {
                dedup.push(p);
            }
        }
        if crate::surface::distance(&dedup[0], dedup.last().unwrap()) <= 1e-9 {
            dedup.pop();
        }
        JordanCurve::new(Polyline::closed(dedup)?)
    }

    /// The diffeotopy whose time-one map is the band map, as a chart map
    /// (θ periodic, ζ clamped to the band).
    pub fn diffeotopy(&self, map: &BandMap) -> Diffeotopy {
        let fwd_map = map.clone();
        let inv_map = map.clone();
        let speed = map.max_phase_displacement() * map.phases.len() as f64 * 1.5;
        Diffeotopy::from_closures(
            2,
            move |t, x| {
                let p = fwd_map.apply_at(t, [x[0], x[1]]);
                vec![p[0], p[1]]
            },
            move |t, x| {
                let p = inv_map.apply_at_inv(t, [x[0], x[1]]);
                vec![p[0], p[1]]
            },
            speed,
        )
    }
}

/// The zippered resistor curve: `J = φ(equator)` stays within the
/// ε-neighborhood of the equator, φ is the identity outside it, and the
/// resistance of `J` exceeds the target up to discretization slack.
pub fn resistor_curve(epsilon: f64, l_target: f64) -> Result<(JordanCurve, Diffeotopy)> {
    resistor_curve_in(Space::Cylinder, epsilon, l_target)
}

pub fn resistor_curve_in(
    space: Space,
    epsilon: f64,
    l_target: f64,
) -> Result<(JordanCurve, Diffeotopy)> {
    let params = ResistorParams::derive(space, epsilon, l_target)?;
    resistor_curve_with(&params)
}

pub fn resistor_curve_with(params: &ResistorParams) -> Result<(JordanCurve, Diffeotopy)> {
    let map = params.band_map()?;
    let curve = params.mapped_equator(&map)?;
    let phi = params.diffeotopy(&map);
    Ok((curve, phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{equator, hausdorff_polylines, separates_poles};

    #[test]
    fn button_curve_is_simple_and_separates() {
        let b = button_curve(8).unwrap();
        assert!(separates_poles(&b).unwrap());
        let eq = equator(Space::Cylinder, 128).unwrap();
        let d = hausdorff_polylines(b.base(), eq.base(), 0.02).unwrap();
        assert!(d <= 0.25, "d_H(B, equator) = {d} > 2a");
    }

    #[test]
    fn button_curve_many_buttons_hug_the_equator() {
        let b = button_curve(100).unwrap();
        let eq = equator(Space::Cylinder, 512).unwrap();
        let d = hausdorff_polylines(b.base(), eq.base(), 0.005).unwrap();
        assert!(d <= 0.02, "d_H = {d}");
    }

    #[test]
    fn too_few_buttons_rejected() {
        assert!(button_curve(2).is_err());
    }

    #[test]
    fn resistor_curve_is_simple_and_close_to_equator() {
        let (j, phi) = resistor_curve(0.1, 4.0).unwrap();
        assert!(separates_poles(&j).unwrap());
        let eq = equator(Space::Cylinder, 256).unwrap();
        let d = hausdorff_polylines(j.base(), eq.base(), 0.01).unwrap();
        assert!(d <= 0.1, "d_H(J, E) = {d} > ε");
        assert!(phi.speed_bound().is_finite());
    }

    #[test]
    fn resistor_map_identity_off_band() {
        let params = ResistorParams::derive(Space::Cylinder, 0.1, 4.0).unwrap();
        let map = params.band_map().unwrap();
        for theta in [0.0, 1.0, 2.5, 4.0, 6.0] {
            for z in [-0.5, -0.2, 0.2, 0.5, 0.9] {
                let p = map.forward([theta, z]);
                assert!(
                    (p[0] - theta).abs() < 1e-12 && (p[1] - z).abs() < 1e-12,
                    "map moved ({theta}, {z}) outside the band"
                );
            }
        }
    }

    #[test]
    fn resistor_map_round_trip() {
        let params = ResistorParams::derive(Space::Cylinder, 0.1, 4.0).unwrap();
        let map = params.band_map().unwrap();
        for i in 0..40 {
            for j in 0..20 {
                let p = [TAU * i as f64 / 40.0, -0.093 + 0.186 * j as f64 / 19.0];
                let q = map.forward(p);
                let b = map.inverse(q);
                assert!(
                    (b[0] - p[0]).abs() + (b[1] - p[1]).abs() < 1e-8,
                    "p={p:?} q={q:?} b={b:?}"
                );
            }
        }
    }

    #[test]
    fn small_target_trivially_satisfied() {
        // π > 0.1 already; the construction still returns a valid curve
        let (j, _) = resistor_curve(0.1, 0.1).unwrap();
        assert!(separates_poles(&j).unwrap());
    }
}
