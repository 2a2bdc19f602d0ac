//! The eye-shaped region, the eye-closing map Ψ and its flow realization.
//!
//! `S` is the region between the graphs of `−β` and `β` for a bump profile
//! `β`. The closing map Ψ sends each vertical segment `x × [β(x), 1]` onto
//! `x × [0, 1]` (and mirrors for negative y), fixes everything outside the
//! unit disc, and collapses the eye onto the slit. Its flow realization is
//! a field tangent to vertical lines whose time-one map is Ψ.

use crate::error::{Error, Result};
use crate::field::{smoothstep, smoothstep_derivative, FieldKind, SupportBox, TimeField};
use std::sync::Arc;

/// An even bump profile on [−1, 1] with `0 ≤ β < 1`, `β(±1) = 0`,
/// `β(0) > 0`, and `β(x) < √(1−x²)` so the eye stays inside the unit disc.
#[derive(Clone, Debug)]
pub enum BumpProfile {
    /// `β(x) = peak·(1 − x²)`
    Quadratic { peak: f64 },
    /// linear interpolation of symmetric samples over [0, 1]
    Samples { values: Vec<f64> },
}

impl BumpProfile {
    pub fn quadratic(peak: f64) -> Result<Self> {
        let b = BumpProfile::Quadratic { peak };
        b.validate()?;
        Ok(b)
    }

    /// Samples of β on the uniform grid over [0, 1] (even extension).
    pub fn from_samples(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidInput("bump profile needs ≥ 3 samples".into()));
        }
        let b = BumpProfile::Samples { values };
        b.validate()?;
        Ok(b)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        if x >= 1.0 {
            return 0.0;
        }
        match self {
            BumpProfile::Quadratic { peak } => peak * (1.0 - x * x),
            BumpProfile::Samples { values } => {
                let n = values.len() - 1;
                let s = x * n as f64;
                let i = (s.floor() as usize).min(n - 1);
                let frac = s - i as f64;
                values[i] * (1.0 - frac) + values[i + 1] * frac
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.eval(0.0) <= 0.0 {
            return Err(Error::InvalidInput("bump profile needs β(0) > 0".into()));
        }
        for k in 0..=400 {
            let x = k as f64 / 400.0;
            let b = self.eval(x);
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidInput(format!(
                    "bump profile out of [0, 1) at x = {x}"
                )));
            }
            let ceiling = (1.0 - x * x).max(0.0).sqrt();
            if b >= ceiling * (1.0 - 1e-9) && b > 0.0 {
                return Err(Error::InvalidInput(format!(
                    "bump profile touches the unit circle at x = {x}"
                )));
            }
        }
        if self.eval(1.0) != 0.0 {
            return Err(Error::InvalidInput("bump profile needs β(±1) = 0".into()));
        }
        Ok(())
    }
}

impl Default for BumpProfile {
    fn default() -> Self {
        BumpProfile::Quadratic { peak: 0.5 }
    }
}

/// The eye region together with the closing and opening maps.
#[derive(Clone, Debug)]
pub struct EyeRegion {
    beta: BumpProfile,
}

/// Build the eye region and its maps, validating the profile.
pub fn eye_maps(beta: BumpProfile) -> Result<EyeRegion> {
    beta.validate()?;
    Ok(EyeRegion { beta })
}

impl EyeRegion {
    pub fn beta(&self, x: f64) -> f64 {
        self.beta.eval(x)
    }

    pub fn profile(&self) -> &BumpProfile {
        &self.beta
    }

    /// Height of the unit circle above x (the identity zone starts there).
    fn ceiling(x: f64) -> f64 {
        (1.0 - x * x).max(0.0).sqrt()
    }

    /// The closing map: squeezes `x × [β(x), Y(x)]` onto `x × [0, Y(x)]`,
    /// identity outside the unit disc, odd in y. The closed eye maps onto
    /// the slit.
    pub fn psi(&self, p: [f64; 2]) -> [f64; 2] {
        let (x, y) = (p[0], p[1]);
        if x.abs() >= 1.0 {
            return p;
        }
        let ceil = Self::ceiling(x);
        let b = self.beta(x);
        let ay = y.abs();
        if ay >= ceil {
            return p;
        }
        let mapped = if ay <= b {
            0.0
        } else {
            ceil * (ay - b) / (ceil - b)
        };
        [x, mapped.copysign(y)]
    }

    /// The opening map, defined off the slit `(−1, 1) × {0}`; inverse to Ψ
    /// wherever Ψ is injective.
    pub fn psi_inv(&self, p: [f64; 2]) -> Result<[f64; 2]> {
        let (x, y) = (p[0], p[1]);
        if x.abs() >= 1.0 {
            return Ok(p);
        }
        if y == 0.0 {
            return Err(Error::InvalidInput(
                "Ψ⁻¹ is undefined on the slit (−1,1) × {0}".into(),
            ));
        }
        let ceil = Self::ceiling(x);
        let b = self.beta(x);
        let ay = y.abs();
        if ay >= ceil {
            return Ok(p);
        }
        let pre = b + ay * (ceil - b) / ceil;
        Ok([x, pre.copysign(y)])
    }

    /// Upper lip of the opened slit: `Ψ⁻¹(x, 0⁺) = (x, β(x))`.
    pub fn upper_lip(&self, x: f64) -> [f64; 2] {
        [x, self.beta(x)]
    }

    pub fn lower_lip(&self, x: f64) -> [f64; 2] {
        [x, -self.beta(x)]
    }
}

/// The eye-closing flow: a field tangent to vertical lines, supported in
/// `[1, 2]`, whose trajectory from `(1, x, y)` with `|y| ≥ β(x)` ends at
/// `(2, Ψ(x, y))`. Trajectories inside the eye reach the slit exactly at
/// t = 2 with vanishing terminal speed.
pub fn closing_flow(beta: &BumpProfile) -> Result<TimeField> {
    let eye = eye_maps(beta.clone())?;
    let eval = move |t: f64, p: &[f64], out: &mut [f64]| {
        out[0] = 0.0;
        out[1] = 0.0;
        let s = t - 1.0;
        if !(0.0..=1.0).contains(&s) {
            return;
        }
        let rho = smoothstep(s);
        let rho_d = smoothstep_derivative(s);
        if rho_d == 0.0 {
            return;
        }
        let (x, y) = (p[0], p[1]);
        if x.abs() >= 1.0 {
            return;
        }
        let ceil = EyeRegion::ceiling(x);
        let ay = y.abs();
        if ay >= ceil {
            return;
        }
        let b = eye.beta(x);
        // invert the homotopy H_ρ(y0) = y0 + ρ·(m(y0) − y0) for y0 ≥ 0:
        // piecewise linear with breakpoints at β and the circle height
        let y0 = if rho >= 1.0 - 1e-12 {
            // terminal time: speed is zero anyway
            ay
        } else if ay >= ceil - rho * 0.0 {
            ay
        } else {
            // candidate in the squeezed band [β, ceil]:
            // H(y0) = y0 + ρ·(ceil·(y0−β)/(ceil−β) − y0)
            let slope = 1.0 + rho * (ceil / (ceil - b) - 1.0);
            let at_b = b * (1.0 - rho);
            if ay >= at_b {
                b + (ay - at_b) / slope
            } else {
                // inside the collapsing eye: H(y0) = (1−ρ)·y0
                ay / (1.0 - rho)
            }
        };
        let m = if y0 <= b {
            0.0
        } else if y0 >= ceil {
            y0
        } else {
            ceil * (y0 - b) / (ceil - b)
        };
        out[1] = rho_d * (m - y0) * y.signum();
    };
    TimeField::new(
        2,
        SupportBox::symmetric(1.0, 2.0, 2, 2.5, 0.5)?,
        FieldKind::Dynamic(Arc::new(eval)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::integrate;
    use approx::assert_relative_eq;

    #[test]
    fn psi_closes_the_lips_onto_the_slit() {
        let eye = eye_maps(BumpProfile::default()).unwrap();
        for k in 0..=100 {
            let x = -0.99 + 1.98 * k as f64 / 100.0;
            let b = eye.beta(x);
            let up = eye.psi([x, b]);
            let dn = eye.psi([x, -b]);
            assert!(up[1].abs() < 1e-12 && dn[1].abs() < 1e-12);
            assert_relative_eq!(up[0], x);
        }
    }

    #[test]
    fn psi_identity_outside_unit_disc() {
        let eye = eye_maps(BumpProfile::default()).unwrap();
        for p in [[1.2f64, 0.1], [0.3, 1.1], [-0.8, -0.9], [2.0, 0.0]] {
            if p[0].hypot(p[1]) > 1.0 {
                assert_eq!(eye.psi(p), p);
            }
        }
    }

    #[test]
    fn psi_fixes_segment_tops() {
        let eye = eye_maps(BumpProfile::default()).unwrap();
        // the top of the vertical segment maps to itself
        let p = eye.psi([0.0, 1.0]);
        assert_relative_eq!(p[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn psi_inverse_round_trip() {
        let eye = eye_maps(BumpProfile::default()).unwrap();
        for k in 1..20 {
            for j in 1..10 {
                let x = -0.9 + 1.8 * k as f64 / 20.0;
                let y = 0.05 + 0.9 * j as f64 / 10.0;
                for sy in [y, -y] {
                    let q = eye.psi([x, sy]);
                    if q[1] != 0.0 {
                        let back = eye.psi_inv(q).unwrap();
                        assert!(
                            (back[0] - x).abs() + (back[1] - sy).abs() < 1e-9,
                            "x={x} y={sy}"
                        );
                    }
                }
            }
        }
        assert!(eye.psi_inv([0.5, 0.0]).is_err());
    }

    #[test]
    fn invalid_profiles_rejected() {
        assert!(BumpProfile::quadratic(0.0).is_err());
        assert!(BumpProfile::quadratic(1.2).is_err());
        assert!(BumpProfile::from_samples(vec![0.5, 0.6]).is_err());
        // odd-shaped samples violating β < √(1−x²) near the tip
        assert!(BumpProfile::from_samples(vec![0.5, 0.5, 0.5, 0.5, 0.4]).is_err());
    }

    #[test]
    fn closing_flow_realizes_psi() {
        let beta = BumpProfile::default();
        let eye = eye_maps(beta.clone()).unwrap();
        let g = closing_flow(&beta).unwrap();
        for (x, y) in [(0.9, 0.5), (0.3, 0.8), (-0.5, 0.6), (0.0, 1.0), (0.2, -0.7)] {
            let end = integrate(
                |t, p, out| g.eval(t, p, out),
                1.0,
                2.0,
                &[x, y],
                1e-3,
                10.0,
                |_, _| {},
            )
            .unwrap();
            let want = eye.psi([x, y]);
            assert!(
                (end[0] - want[0]).abs() + (end[1] - want[1]).abs() <= 1e-3,
                "flow endpoint {end:?} vs Ψ {want:?} from ({x}, {y})"
            );
        }
    }

    #[test]
    fn closing_flow_fixes_far_points() {
        let g = closing_flow(&BumpProfile::default()).unwrap();
        let end = integrate(
            |t, p, out| g.eval(t, p, out),
            1.0,
            2.0,
            &[1.4, 0.3],
            1e-3,
            10.0,
            |_, _| {},
        )
        .unwrap();
        assert_relative_eq!(end[0], 1.4);
        assert_relative_eq!(end[1], 0.3);
    }

    #[test]
    fn closing_flow_is_vertical() {
        let g = closing_flow(&BumpProfile::default()).unwrap();
        for (t, x, y) in [(1.3, 0.2, 0.5), (1.7, -0.6, 0.2), (1.5, 0.0, 0.9)] {
            let v = g.eval_vec(t, &[x, y]);
            assert_eq!(v[0], 0.0);
        }
    }
}
