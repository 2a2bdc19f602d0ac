//! Exact elementary homeomorphisms of a band or rectangle, composed into
//! the strip, zipper and resistor maps.
//!
//! Two primitives, both with closed-form inverses:
//! - [`ProfileFlow`]: the time-one map of `ẋ = c(q) · v(x)` along one axis,
//!   where `v` is a trapezoid gate in the moving coordinate and `c` a
//!   piecewise-linear amount in the transverse coordinate. Each line
//!   `q = const` flows within itself, so the map is a homeomorphism for any
//!   amplitude; the plateau of `v` translates rigidly.
//! - [`Twist`]: the shear `x ↦ x + d(q)` (displacement transverse to its
//!   argument), bijective for any displacement profile.
//!
//! The moving coordinate may be periodic (θ on the cylinder chart).

use crate::error::{Error, Result};

/// Piecewise-linear function given by increasing knots.
#[derive(Clone, Debug)]
pub struct PiecewiseLinear {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// period of the argument, if any (values outside the knot range wrap)
    pub period: Option<f64>,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, period: Option<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidInput("piecewise-linear needs ≥ 2 knots".into()));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "piecewise-linear knots must increase".into(),
            ));
        }
        if let Some(p) = period {
            if xs[xs.len() - 1] - xs[0] > p + 1e-12 {
                return Err(Error::InvalidInput(
                    "piecewise-linear knot range exceeds the period".into(),
                ));
            }
        }
        Ok(PiecewiseLinear { xs, ys, period })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let mut x = x;
        if let Some(p) = self.period {
            x = self.xs[0] + (x - self.xs[0]).rem_euclid(p);
            if x > self.xs[n - 1] {
                // in the gap between the last and (wrapped) first knot:
                // interpolate across the seam
                let gap = p - (self.xs[n - 1] - self.xs[0]);
                let frac = (x - self.xs[n - 1]) / gap;
                return self.ys[n - 1] * (1.0 - frac) + self.ys[0] * frac;
            }
        } else {
            if x <= self.xs[0] {
                return self.ys[0];
            }
            if x >= self.xs[n - 1] {
                return self.ys[n - 1];
            }
        }
        let i = match self
            .xs
            .binary_search_by(|v| v.partial_cmp(&x).unwrap())
        {
            Ok(i) => return self.ys[i],
            Err(i) => i - 1,
        };
        let frac = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.ys[i] * (1.0 - frac) + self.ys[i + 1] * frac
    }

    pub fn max_abs(&self) -> f64 {
        self.ys.iter().fold(0.0, |m, y| m.max(y.abs()))
    }
}

/// Trapezoid gate: 0 below `x0`, rises to 1 at `x1`, plateau to `x2`, falls
/// to 0 at `x3`.
#[derive(Clone, Copy, Debug)]
pub struct Trapezoid {
    pub x0: f64,
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl Trapezoid {
    pub fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Result<Self> {
        if !(x0 < x1 && x1 <= x2 && x2 < x3) {
            return Err(Error::InvalidInput(format!(
                "trapezoid knots must satisfy x0 < x1 ≤ x2 < x3, got {x0} {x1} {x2} {x3}"
            )));
        }
        Ok(Trapezoid { x0, x1, x2, x3 })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.x0 || x >= self.x3 {
            0.0
        } else if x < self.x1 {
            (x - self.x0) / (self.x1 - self.x0)
        } else if x <= self.x2 {
            1.0
        } else {
            (self.x3 - x) / (self.x3 - self.x2)
        }
    }

    /// Exact time-`tau` map of `ẋ = c · v(x)`: linear inside the plateau,
    /// exponential on the ramps, fixed outside the support. The flow never
    /// crosses the support boundary, so the map fixes `x0` and `x3` and is
    /// monotone (a homeomorphism of the line for every `c`, `tau`).
    pub fn flow(&self, x: f64, c: f64, tau: f64) -> f64 {
        if c == 0.0 || tau == 0.0 || x <= self.x0 || x >= self.x3 {
            return x;
        }
        let mut x = x;
        let mut t_rem = c.abs() * tau; // time rescaled so |c| = 1
        let right = c > 0.0;
        let w_up = self.x1 - self.x0;
        let w_dn = self.x3 - self.x2;
        for _ in 0..8 {
            if t_rem <= 0.0 {
                break;
            }
            if x < self.x1 {
                // rising ramp: ẋ = ±(x − x0)/w_up
                let s = (x - self.x0) / w_up;
                if right {
                    let t_exit = w_up * (1.0 / s).ln();
                    if t_exit > t_rem {
                        x = self.x0 + (x - self.x0) * (t_rem / w_up).exp();
                        break;
                    }
                    x = self.x1;
                    t_rem -= t_exit;
                } else {
                    x = self.x0 + (x - self.x0) * (-t_rem / w_up).exp();
                    break;
                }
            } else if x <= self.x2 {
                // plateau: unit speed
                if right {
                    let t_exit = self.x2 - x;
                    if t_exit >= t_rem {
                        x += t_rem;
                        break;
                    }
                    x = self.x2;
                    t_rem -= t_exit;
                    // nudge into the falling ramp
                    if self.x2 == self.x1 {
                        // triangle profile: fall through below
                    }
                    if t_rem <= 0.0 {
                        break;
                    }
                    // enter falling ramp
                    x = self.x3 - (self.x3 - x) * (-t_rem / w_dn).exp();
                    break;
                } else {
                    let t_exit = x - self.x1;
                    if t_exit >= t_rem {
                        x -= t_rem;
                        break;
                    }
                    x = self.x1;
                    t_rem -= t_exit;
                    if t_rem <= 0.0 {
                        break;
                    }
                    x = self.x0 + (x - self.x0) * (-t_rem / w_up).exp();
                    break;
                }
            } else {
                // falling ramp: ẋ = ±(x3 − x)/w_dn
                if right {
                    x = self.x3 - (self.x3 - x) * (-t_rem / w_dn).exp();
                    break;
                } else {
                    let s = (self.x3 - x) / w_dn;
                    let t_exit = w_dn * (1.0 / s).ln();
                    if t_exit > t_rem {
                        x = self.x3 - (self.x3 - x) * (t_rem / w_dn).exp();
                        break;
                    }
                    x = self.x2;
                    t_rem -= t_exit;
                }
            }
        }
        x.clamp(self.x0, self.x3)
    }
}

/// Which coordinate of the chart moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MovingAxis {
    /// first coordinate (x / θ)
    X,
    /// second coordinate (y / z)
    Y,
}

/// One exact elementary band operation.
#[derive(Clone, Debug)]
pub enum BandOp {
    /// Time-one map of `ẋ_m = amount(q) · gate(x_m)` where `q` is the
    /// transverse coordinate.
    Flow {
        axis: MovingAxis,
        amount: PiecewiseLinear,
        gate: Trapezoid,
    },
    /// Shear `x_m ↦ x_m + d(q)`.
    Twist {
        axis: MovingAxis,
        displacement: PiecewiseLinear,
    },
}

impl BandOp {
    /// Apply with interpolation parameter `tau ∈ [0, 1]` (`tau = 1` is the
    /// full map). For flows `tau` scales time; for twists it scales the
    /// displacement. Either way every `tau`-slice is a homeomorphism.
    pub fn apply(&self, p: [f64; 2], tau: f64, inverse: bool) -> [f64; 2] {
        let sign = if inverse { -1.0 } else { 1.0 };
        match self {
            BandOp::Flow { axis, amount, gate } => {
                let (m, q) = split(*axis, p);
                let c = sign * amount.eval(q);
                join(*axis, gate.flow(m, c, tau), q)
            }
            BandOp::Twist { axis, displacement } => {
                let (m, q) = split(*axis, p);
                join(*axis, m + sign * tau * displacement.eval(q), q)
            }
        }
    }

    pub fn max_displacement(&self) -> f64 {
        match self {
            BandOp::Flow { amount, .. } => amount.max_abs(),
            BandOp::Twist { displacement, .. } => displacement.max_abs(),
        }
    }
}

fn split(axis: MovingAxis, p: [f64; 2]) -> (f64, f64) {
    match axis {
        MovingAxis::X => (p[0], p[1]),
        MovingAxis::Y => (p[1], p[0]),
    }
}

fn join(axis: MovingAxis, m: f64, q: f64) -> [f64; 2] {
    match axis {
        MovingAxis::X => [m, q],
        MovingAxis::Y => [q, m],
    }
}

/// An ordered composition of band operations grouped into phases. Operations
/// within a phase are required (by the caller) to have disjoint supports, so
/// a phase is simultaneously flowable; phases run one after another on equal
/// time sub-intervals with a smoothstep ramp. The full map is `apply_at(1)`.
#[derive(Clone, Debug)]
pub struct BandMap {
    pub phases: Vec<Vec<BandOp>>,
}

impl BandMap {
    pub fn new(phases: Vec<Vec<BandOp>>) -> Self {
        BandMap { phases }
    }

    pub fn single_phase(ops: Vec<BandOp>) -> Self {
        BandMap { phases: vec![ops] }
    }

    pub fn op_count(&self) -> usize {
        self.phases.iter().map(|p| p.len()).sum()
    }

    /// Compose another map after this one.
    pub fn then(mut self, other: BandMap) -> BandMap {
        self.phases.extend(other.phases);
        self
    }

    pub fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        self.apply_at(1.0, p)
    }

    pub fn inverse(&self, p: [f64; 2]) -> [f64; 2] {
        self.apply_at_inv(1.0, p)
    }

    /// Diffeotopy evaluation at time `t ∈ [0, 1]`.
    pub fn apply_at(&self, t: f64, mut p: [f64; 2]) -> [f64; 2] {
        let k = self.phases.len() as f64;
        for (i, phase) in self.phases.iter().enumerate() {
            let local = (t * k - i as f64).clamp(0.0, 1.0);
            if local <= 0.0 {
                break;
            }
            let tau = crate::field::smoothstep(local);
            for op in phase {
                p = op.apply(p, tau, false);
            }
        }
        p
    }

    pub fn apply_at_inv(&self, t: f64, mut p: [f64; 2]) -> [f64; 2] {
        let k = self.phases.len() as f64;
        for (i, phase) in self.phases.iter().enumerate().rev() {
            let local = (t * k - i as f64).clamp(0.0, 1.0);
            if local <= 0.0 {
                continue;
            }
            let tau = crate::field::smoothstep(local);
            for op in phase.iter().rev() {
                p = op.apply(p, tau, true);
            }
        }
        p
    }

    /// Largest single-op displacement (a cheap upper bound on how far the
    /// composite moves any point is the sum over phases).
    pub fn max_phase_displacement(&self) -> f64 {
        self.phases
            .iter()
            .map(|ph| ph.iter().map(|o| o.max_displacement()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trapezoid_flow_translates_plateau_rigidly() {
        let g = Trapezoid::new(0.0, 0.1, 0.9, 1.0).unwrap();
        // a point whose whole trajectory stays in the plateau moves by c·tau
        let x = g.flow(0.3, 0.4, 1.0);
        assert_relative_eq!(x, 0.7, epsilon = 1e-12);
    }

    #[test]
    fn trapezoid_flow_is_exactly_invertible() {
        let g = Trapezoid::new(-1.0, -0.5, 0.5, 1.0).unwrap();
        for &x in &[-0.99, -0.7, -0.5, -0.2, 0.0, 0.3, 0.5, 0.77, 0.999] {
            for &c in &[-2.0, -0.3, 0.3, 2.0, 7.5] {
                let y = g.flow(x, c, 1.0);
                let back = g.flow(y, -c, 1.0);
                assert!(
                    (back - x).abs() < 1e-9,
                    "x={x} c={c}: y={y} back={back}"
                );
            }
        }
    }

    #[test]
    fn trapezoid_flow_preserves_order_and_support() {
        let g = Trapezoid::new(0.0, 0.2, 0.8, 1.0).unwrap();
        let xs: Vec<f64> = (0..=50).map(|i| i as f64 / 50.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| g.flow(x, 3.0, 1.0)).collect();
        for w in ys.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        assert_eq!(g.flow(0.0, 3.0, 1.0), 0.0);
        assert_eq!(g.flow(1.0, 3.0, 1.0), 1.0);
        // interior points never escape (extreme speeds may saturate onto
        // the boundary in floating point, but never beyond)
        assert!(g.flow(0.999, 100.0, 1.0) <= 1.0);
        assert!(g.flow(0.9, 5.0, 1.0) < 1.0);
    }

    #[test]
    fn twist_is_exact_shear() {
        let d =
            PiecewiseLinear::new(vec![-1.0, 0.0, 1.0], vec![0.0, 0.5, 0.0], None).unwrap();
        let op = BandOp::Twist {
            axis: MovingAxis::X,
            displacement: d,
        };
        let p = op.apply([0.3, 0.0], 1.0, false);
        assert_relative_eq!(p[0], 0.8);
        let q = op.apply(p, 1.0, true);
        assert_relative_eq!(q[0], 0.3, epsilon = 1e-15);
    }

    #[test]
    fn band_map_round_trip() {
        let gate = Trapezoid::new(0.0, 0.1, 0.9, 1.0).unwrap();
        let amt =
            PiecewiseLinear::new(vec![0.0, 0.4, 0.6, 1.0], vec![0.0, 0.35, -0.2, 0.0], None)
                .unwrap();
        let map = BandMap::single_phase(vec![
            BandOp::Flow {
                axis: MovingAxis::X,
                amount: amt,
                gate,
            },
            BandOp::Twist {
                axis: MovingAxis::Y,
                displacement: PiecewiseLinear::new(
                    vec![2.0, 2.5, 3.0],
                    vec![0.0, 0.2, 0.0],
                    None,
                )
                .unwrap(),
            },
        ]);
        for t in [0.25, 0.5, 0.75, 1.0] {
            for p in [[0.2, 0.3], [0.5, 0.5], [0.85, 0.9], [2.2, 0.1]] {
                let q = map.apply_at(t, p);
                let back = map.apply_at_inv(t, q);
                assert!(
                    (back[0] - p[0]).abs() + (back[1] - p[1]).abs() < 1e-9,
                    "t={t} p={p:?} q={q:?} back={back:?}"
                );
            }
        }
    }
}
