//! Time-dependent vector fields `(t, y) ↦ f(t, y)` with declared compact
//! support, evaluable everywhere.
//!
//! Fields come from a small catalog (non-unique power fields, constants,
//! shears, eye-closing flows, averaged bump-union fields, grid samples) plus
//! combinators (patching, time compression, axis embedding). Every catalog
//! field is multiplied by a boundary taper so the declared support box is
//! honest.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Declared support `[t0, t1] × Π [lo_d, hi_d]`. The field is identically
/// zero outside the time window and tapers linearly to zero over `margin`
/// inside the spatial box, so it vanishes on and outside the boundary.
#[derive(Clone, Debug)]
pub struct SupportBox {
    pub t0: f64,
    pub t1: f64,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub margin: f64,
}

impl SupportBox {
    pub fn new(t0: f64, t1: f64, lo: Vec<f64>, hi: Vec<f64>, margin: f64) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::InvalidInput("support box dimension mismatch".into()));
        }
        if t1 <= t0 || margin <= 0.0 {
            return Err(Error::InvalidInput(
                "support box needs t1 > t0 and margin > 0".into(),
            ));
        }
        for d in 0..lo.len() {
            if hi[d] - lo[d] <= 2.0 * margin {
                return Err(Error::InvalidInput(
                    "support box thinner than twice the taper margin".into(),
                ));
            }
        }
        Ok(SupportBox {
            t0,
            t1,
            lo,
            hi,
            margin,
        })
    }

    /// Symmetric box `[−r, r]^dim` over `[t0, t1]`.
    pub fn symmetric(t0: f64, t1: f64, dim: usize, r: f64, margin: f64) -> Result<Self> {
        SupportBox::new(t0, t1, vec![-r; dim], vec![r; dim], margin)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains_time(&self, t: f64) -> bool {
        t >= self.t0 && t <= self.t1
    }

    fn taper(&self, y: &[f64]) -> f64 {
        let mut w = 1.0;
        for d in 0..self.lo.len() {
            let a = (y[d] - self.lo[d]) / self.margin;
            let b = (self.hi[d] - y[d]) / self.margin;
            w *= a.clamp(0.0, 1.0) * b.clamp(0.0, 1.0);
            if w == 0.0 {
                return 0.0;
            }
        }
        w
    }
}

/// A 1D profile given by linear interpolation of samples on a uniform grid,
/// zero outside its range.
#[derive(Clone, Debug)]
pub struct Profile1D {
    pub x0: f64,
    pub x1: f64,
    pub values: Vec<f64>,
}

impl Profile1D {
    pub fn from_samples(x0: f64, x1: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || x1 <= x0 {
            return Err(Error::InvalidInput("profile needs ≥ 2 samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("profile has non-finite samples".into()));
        }
        Ok(Profile1D { x0, x1, values })
    }

    /// Sample a function and extend it continuously to zero with linear
    /// ramps of width `ramp` beyond `[x0, x1]`.
    pub fn from_fn(
        x0: f64,
        x1: f64,
        n: usize,
        ramp: f64,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let inner: Vec<f64> = (0..=n)
            .map(|i| f(x0 + (x1 - x0) * i as f64 / n as f64))
            .collect();
        let step = (x1 - x0) / n as f64;
        let ramp_steps = (ramp / step).ceil().max(1.0) as usize;
        let mut values = Vec::with_capacity(n + 1 + 2 * (ramp_steps + 1));
        // descend to zero on the left
        values.push(0.0);
        for k in 1..=ramp_steps {
            values.push(inner[0] * k as f64 / (ramp_steps + 1) as f64);
        }
        values.extend_from_slice(&inner);
        for k in (1..=ramp_steps).rev() {
            values.push(inner[n] * k as f64 / (ramp_steps + 1) as f64);
        }
        values.push(0.0);
        Profile1D::from_samples(
            x0 - step * (ramp_steps + 1) as f64,
            x1 + step * (ramp_steps + 1) as f64,
            values,
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.x0 || x >= self.x1 {
            return 0.0;
        }
        let n = self.values.len() - 1;
        let s = (x - self.x0) / (self.x1 - self.x0) * n as f64;
        let i = (s.floor() as usize).min(n - 1);
        let frac = s - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

/// A trajectory sampled at increasing times, evaluated by linear
/// interpolation and clamped at the ends.
#[derive(Clone, Debug)]
pub struct SampledPath {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl SampledPath {
    pub fn new(times: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != points.len() || times.len() < 2 {
            return Err(Error::InvalidInput("sampled path needs ≥ 2 samples".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("sampled path times must increase".into()));
        }
        Ok(SampledPath { times, points })
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let n = self.times.len();
        if t <= self.times[0] {
            out.copy_from_slice(&self.points[0]);
            return;
        }
        if t >= self.times[n - 1] {
            out.copy_from_slice(&self.points[n - 1]);
            return;
        }
        let i = match self
            .times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let frac = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        for d in 0..out.len() {
            out[d] = self.points[i][d] * (1.0 - frac) + self.points[i + 1][d] * frac;
        }
    }
}

/// Values on a uniform space-time grid with multilinear interpolation.
#[derive(Clone, Debug)]
pub struct GridSamples {
    pub t_steps: usize,
    pub dims: Vec<usize>,
    /// layout: time-major, then row-major over space, then component
    pub values: Vec<f64>,
}

type DynEval = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

#[derive(Clone)]
pub enum FieldKind {
    Zero,
    Constant {
        v: Vec<f64>,
    },
    /// `y'_axis = c · |y_axis − origin|^p`, the non-uniquely-solvable model
    /// field. With `origin = lo`, `c = 2√(hi−lo)`, `p = 1/2` its section at
    /// t = 1 from `y_axis = lo` is exactly `[lo, hi]`.
    AbsPow {
        axis: usize,
        c: f64,
        p: f64,
        origin: f64,
    },
    /// `y'_axis = −rate · sign(y_axis − target) · |y_axis − target|^{1/2}`:
    /// collapses an interval around `target` to the point in finite time.
    Collapse {
        axis: usize,
        rate: f64,
        target: f64,
    },
    /// Flow realization of the shear `(…, y_graph, …) ↦ y_d += profile_d(y_graph)`
    /// over one time window: `y'_d = ramp'(t − t0) · profile_d(y_graph)`.
    Shear {
        graph_axis: usize,
        profiles: Vec<Option<Profile1D>>,
    },
    /// Averaged three-slab field used by the union construction; the last
    /// coordinate is the external homotopy variable with zero velocity.
    BumpUnion(Box<BumpUnionField>),
    Grid(Box<GridSamples>),
    /// `h(t, y) = first(t, y) + second(t − shift, y)`.
    Patched {
        first: Box<TimeField>,
        second: Box<TimeField>,
        shift: f64,
    },
    /// `h(t, y) = scale · inner(t0 + scale·(t − t0), y)`: compresses the
    /// inner window onto `[t0, t0 + len/scale]` preserving sections.
    TimeCompressed {
        inner: Box<TimeField>,
        scale: f64,
    },
    /// Evaluate a lower-dimensional field on a subset of axes.
    Embedded {
        inner: Box<TimeField>,
        axes: Vec<usize>,
    },
    /// Closure-backed field (diffeotopy generators, tube transports).
    /// Not serializable; exported by sampling onto a grid.
    Dynamic(DynEval),
}

impl fmt::Debug for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::Zero => write!(f, "Zero"),
            FieldKind::Constant { v } => write!(f, "Constant({v:?})"),
            FieldKind::AbsPow { axis, c, p, origin } => {
                write!(f, "AbsPow(axis={axis}, c={c}, p={p}, origin={origin})")
            }
            FieldKind::Collapse { axis, rate, target } => {
                write!(f, "Collapse(axis={axis}, rate={rate}, target={target})")
            }
            FieldKind::Shear { graph_axis, .. } => write!(f, "Shear(graph_axis={graph_axis})"),
            FieldKind::BumpUnion(_) => write!(f, "BumpUnion"),
            FieldKind::Grid(g) => write!(f, "Grid(t_steps={}, dims={:?})", g.t_steps, g.dims),
            FieldKind::Patched { shift, .. } => write!(f, "Patched(shift={shift})"),
            FieldKind::TimeCompressed { scale, .. } => write!(f, "TimeCompressed(scale={scale})"),
            FieldKind::Embedded { axes, .. } => write!(f, "Embedded(axes={axes:?})"),
            FieldKind::Dynamic(_) => write!(f, "Dynamic(..)"),
        }
    }
}

/// Data of the union construction's averaged field (see `funnel::union`).
#[derive(Clone, Debug)]
pub struct BumpUnionField {
    pub f: TimeField,
    pub g: TimeField,
    pub a: SampledPath,
    pub b: SampledPath,
}

/// A time-dependent vector field with declared compact support.
#[derive(Clone, Debug)]
pub struct TimeField {
    dim: usize,
    support: SupportBox,
    kind: FieldKind,
}

impl TimeField {
    pub fn new(dim: usize, support: SupportBox, kind: FieldKind) -> Result<Self> {
        if support.dim() != dim {
            return Err(Error::InvalidInput(
                "support box dimension does not match field dimension".into(),
            ));
        }
        Ok(TimeField { dim, support, kind })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &SupportBox {
        &self.support
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    /// Evaluate into `out`. Zero outside the declared time window; tapered
    /// to zero at the spatial boundary.
    pub fn eval(&self, t: f64, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        out.fill(0.0);
        if !self.support.contains_time(t) {
            return;
        }
        self.eval_raw(t, y, out);
        let w = self.support.taper(y);
        if w != 1.0 {
            for v in out.iter_mut() {
                *v *= w;
            }
        }
    }

    pub fn eval_vec(&self, t: f64, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval(t, y, &mut out);
        out
    }

    fn eval_raw(&self, t: f64, y: &[f64], out: &mut [f64]) {
        match &self.kind {
            FieldKind::Zero => {}
            FieldKind::Constant { v } => out.copy_from_slice(v),
            FieldKind::AbsPow { axis, c, p, origin } => {
                out[*axis] = c * (y[*axis] - origin).abs().powf(*p);
            }
            FieldKind::Collapse { axis, rate, target } => {
                let d = y[*axis] - target;
                out[*axis] = -rate * d.signum() * d.abs().sqrt();
            }
            FieldKind::Shear {
                graph_axis,
                profiles,
            } => {
                let s = y[*graph_axis];
                let ramp = smoothstep_derivative((t - self.support.t0)
                    / (self.support.t1 - self.support.t0))
                    / (self.support.t1 - self.support.t0);
                for (d, prof) in profiles.iter().enumerate() {
                    if let Some(p) = prof {
                        out[d] = ramp * p.eval(s);
                    }
                }
            }
            FieldKind::BumpUnion(u) => eval_bump_union(u, t, y, out),
            FieldKind::Grid(g) => eval_grid(&self.support, g, t, y, out),
            FieldKind::Patched {
                first,
                second,
                shift,
            } => {
                first.eval(t, y, out);
                let mut tmp = vec![0.0; out.len()];
                second.eval(t - shift, y, &mut tmp);
                for d in 0..out.len() {
                    out[d] += tmp[d];
                }
            }
            FieldKind::TimeCompressed { inner, scale } => {
                let t_inner = inner.support.t0 + scale * (t - self.support.t0);
                inner.eval(t_inner, y, out);
                for v in out.iter_mut() {
                    *v *= scale;
                }
            }
            FieldKind::Embedded { inner, axes } => {
                let yi: Vec<f64> = axes.iter().map(|&a| y[a]).collect();
                let mut oi = vec![0.0; yi.len()];
                inner.eval(t, &yi, &mut oi);
                for (k, &a) in axes.iter().enumerate() {
                    out[a] = oi[k];
                }
            }
            FieldKind::Dynamic(f) => f(t, y, out),
        }
    }

    /// Sampled compact-support check: the field must be ≤ `1e−9` at sampled
    /// points outside the declared box and finite inside.
    pub fn check_support(&self, samples_per_dim: usize) -> Result<()> {
        let m = self.dim;
        let s = &self.support;
        let n = samples_per_dim.max(3);
        let mut y = vec![0.0; m];
        let mut out = vec![0.0; m];
        let mut idx = vec![0usize; m];
        loop {
            // lattice over the box inflated by 50%, so outside points are hit
            for d in 0..m {
                let w = s.hi[d] - s.lo[d];
                y[d] = s.lo[d] - 0.25 * w + 1.5 * w * idx[d] as f64 / (n - 1) as f64;
            }
            for tt in [s.t0 - 0.5, s.t0, 0.5 * (s.t0 + s.t1), s.t1, s.t1 + 0.5] {
                self.eval(tt, &y, &mut out);
                let mag = out.iter().map(|v| v.abs()).fold(0.0, f64::max);
                if !mag.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "field not finite at t={tt}, y={y:?}"
                    )));
                }
                let outside_space = (0..m).any(|d| y[d] < s.lo[d] || y[d] > s.hi[d]);
                let outside = outside_space || tt < s.t0 || tt > s.t1;
                if outside && mag >= 1e-9 {
                    return Err(Error::InvalidInput(format!(
                        "field magnitude {mag} outside declared support at t={tt}, y={y:?}"
                    )));
                }
            }
            // advance lattice index
            let mut d = 0;
            loop {
                if d == m {
                    return Ok(());
                }
                idx[d] += 1;
                if idx[d] < n {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }
}

/// `6s(1−s)` on `[0,1]`: derivative of the smoothstep `3s² − 2s³`.
pub fn smoothstep_derivative(s: f64) -> f64 {
    if !(0.0..=1.0).contains(&s) {
        0.0
    } else {
        6.0 * s * (1.0 - s)
    }
}

/// Smoothstep `3s² − 2s³` clamped to `[0,1]`.
pub fn smoothstep(s: f64) -> f64 {
    let s = s.clamp(0.0, 1.0);
    s * s * (3.0 - 2.0 * s)
}

fn eval_bump_union(u: &BumpUnionField, t: f64, y: &[f64], out: &mut [f64]) {
    let m = y.len() - 1;
    let (x, z) = (&y[..m], y[m]);
    let mut fx = vec![0.0; m];

    // z-taper outside [0,3] so the support is compact in z
    let zw = if z < 0.0 {
        (1.0 + 2.0 * z).clamp(0.0, 1.0)
    } else if z > 3.0 {
        (1.0 - 2.0 * (z - 3.0)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    if zw == 0.0 {
        out.fill(0.0);
        return;
    }

    let slab = |field: &TimeField, path: &SampledPath, depth: f64, buf: &mut [f64]| {
        // depth = distance into the slab from its outer face (z on the
        // bottom slab, 3 − z on the top slab)
        let mut a = vec![0.0; m];
        path.eval(t, &mut a);
        let dist = x
            .iter()
            .zip(a.iter())
            .map(|(xi, ai)| (xi - ai) * (xi - ai))
            .sum::<f64>()
            .sqrt();
        let beta = if depth <= 0.0 {
            0.0
        } else {
            let r = dist / depth;
            if r <= 2.0 {
                1.0
            } else if r >= 4.0 {
                0.0
            } else {
                (4.0 - r) / 2.0
            }
        };
        let mut f_at_a = vec![0.0; m];
        field.eval(t, &a, &mut f_at_a);
        let mut f_at_x = vec![0.0; m];
        field.eval(t, x, &mut f_at_x);
        for d in 0..m {
            buf[d] = beta * f_at_a[d] + (1.0 - beta) * f_at_x[d];
        }
    };

    if z <= 1.0 {
        slab(&u.f, &u.a, z, &mut fx);
    } else if z >= 2.0 {
        slab(&u.g, &u.b, 3.0 - z, &mut fx);
    } else {
        let mut bottom = vec![0.0; m];
        let mut top = vec![0.0; m];
        slab(&u.f, &u.a, 1.0, &mut bottom);
        slab(&u.g, &u.b, 1.0, &mut top);
        for d in 0..m {
            fx[d] = (2.0 - z) * bottom[d] + (z - 1.0) * top[d];
        }
    }
    for d in 0..m {
        out[d] = zw * fx[d];
    }
    out[m] = 0.0;
}

fn eval_grid(support: &SupportBox, g: &GridSamples, t: f64, y: &[f64], out: &mut [f64]) {
    let m = y.len();
    // fractional indices
    let tf = ((t - support.t0) / (support.t1 - support.t0) * (g.t_steps - 1) as f64)
        .clamp(0.0, (g.t_steps - 1) as f64);
    let ti = (tf.floor() as usize).min(g.t_steps.saturating_sub(2));
    let tw = tf - ti as f64;

    let mut base = vec![0usize; m];
    let mut frac = vec![0.0f64; m];
    for d in 0..m {
        let n = g.dims[d];
        let s = ((y[d] - support.lo[d]) / (support.hi[d] - support.lo[d]) * (n - 1) as f64)
            .clamp(0.0, (n - 1) as f64);
        base[d] = (s.floor() as usize).min(n.saturating_sub(2));
        frac[d] = s - base[d] as f64;
    }
    let space_len: usize = g.dims.iter().product();
    out.fill(0.0);
    // multilinear over the 2^m spatial corners, linear in time
    for corner in 0..(1usize << m) {
        let mut w = 1.0;
        let mut offset = 0usize;
        let mut stride = 1usize;
        for d in (0..m).rev() {
            let up = (corner >> d) & 1 == 1;
            w *= if up { frac[d] } else { 1.0 - frac[d] };
            let id = base[d] + usize::from(up);
            offset += id * stride;
            stride *= g.dims[d];
        }
        if w == 0.0 {
            continue;
        }
        for (k, o) in out.iter_mut().enumerate() {
            let v0 = g.values[(ti * space_len + offset) * m + k];
            let v1 = g.values[((ti + 1) * space_len + offset) * m + k];
            *o += w * (v0 * (1.0 - tw) + v1 * tw);
        }
    }
}

/// One explicit midpoint step of `y' = f(t, y)`.
pub fn midpoint_step(
    f: &impl Fn(f64, &[f64], &mut [f64]),
    t: f64,
    dt: f64,
    y: &mut [f64],
    k1: &mut [f64],
    ymid: &mut [f64],
    k2: &mut [f64],
) {
    f(t, y, k1);
    for d in 0..y.len() {
        ymid[d] = y[d] + 0.5 * dt * k1[d];
    }
    f(t + 0.5 * dt, ymid, k2);
    for d in 0..y.len() {
        y[d] += dt * k2[d];
    }
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` with the explicit midpoint
/// rule at step ≤ `dt`. `observe` sees every accepted state including the
/// initial one. Errors with `Divergence` when `‖y‖_∞` exceeds `bound`.
pub fn integrate<F>(
    f: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    dt: f64,
    bound: f64,
    mut observe: impl FnMut(f64, &[f64]),
) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if dt <= 0.0 || t1 < t0 {
        return Err(Error::InvalidInput("integrate needs dt > 0, t1 ≥ t0".into()));
    }
    let steps = (((t1 - t0) / dt).ceil() as usize).max(1);
    let h = (t1 - t0) / steps as f64;
    let m = y0.len();
    let mut y = y0.to_vec();
    let (mut k1, mut ymid, mut k2) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    observe(t0, &y);
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        midpoint_step(&f, t, h, &mut y, &mut k1, &mut ymid, &mut k2);
        if y.iter().any(|v| !v.is_finite() || v.abs() > bound) {
            return Err(Error::Divergence(format!(
                "trajectory left the bounding box (|y| > {bound}) at t = {:.6}",
                t + h
            )));
        }
        observe(t + h, &y);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn abs_sqrt_field() -> TimeField {
        TimeField::new(
            1,
            SupportBox::symmetric(0.0, 2.0, 1, 9.0, 2.0).unwrap(),
            FieldKind::AbsPow {
                axis: 0,
                c: 2.0,
                p: 0.5,
                origin: 0.0,
            },
        )
        .unwrap()
    }

    #[test]
    fn abs_sqrt_classical_solution() {
        // forward uniqueness away from zero: y(t) = (t + 1)² from y(0) = 1
        let f = abs_sqrt_field();
        let y = integrate(
            |t, y, out| f.eval(t, y, out),
            0.0,
            1.0,
            &[1.0],
            1e-3,
            100.0,
            |_, _| {},
        )
        .unwrap();
        assert_relative_eq!(y[0], 4.0, epsilon = 1e-4);
    }

    #[test]
    fn zero_outside_time_window() {
        let f = abs_sqrt_field();
        assert_eq!(f.eval_vec(3.0, &[1.0])[0], 0.0);
        assert_eq!(f.eval_vec(-0.5, &[1.0])[0], 0.0);
    }

    #[test]
    fn taper_vanishes_at_box_boundary() {
        let f = abs_sqrt_field();
        assert_eq!(f.eval_vec(0.5, &[9.0])[0], 0.0);
        assert!(f.eval_vec(0.5, &[8.0])[0] > 0.0);
        f.check_support(7).unwrap();
    }

    #[test]
    fn collapse_reaches_target() {
        let f = TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 3.0, 0.5).unwrap(),
            FieldKind::Collapse {
                axis: 0,
                rate: 2.2,
                target: 0.0,
            },
        )
        .unwrap();
        for y0 in [-1.0, -0.3, 0.4, 1.0] {
            let y = integrate(
                |t, y, out| f.eval(t, y, out),
                0.0,
                1.0,
                &[y0],
                1e-3,
                10.0,
                |_, _| {},
            )
            .unwrap();
            assert!(y[0].abs() < 2e-3, "collapse from {y0} ended at {}", y[0]);
        }
    }

    #[test]
    fn patched_field_adds_shifted_second_hour() {
        let f = TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 5.0, 1.0).unwrap(),
            FieldKind::Constant { v: vec![1.0] },
        )
        .unwrap();
        let g = TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 5.0, 1.0).unwrap(),
            FieldKind::Constant { v: vec![-2.0] },
        )
        .unwrap();
        let h = TimeField::new(
            1,
            SupportBox::symmetric(0.0, 2.0, 1, 5.0, 1.0).unwrap(),
            FieldKind::Patched {
                first: Box::new(f),
                second: Box::new(g),
                shift: 1.0,
            },
        )
        .unwrap();
        assert_relative_eq!(h.eval_vec(0.5, &[0.0])[0], 1.0);
        assert_relative_eq!(h.eval_vec(1.5, &[0.0])[0], -2.0);
    }

    #[test]
    fn grid_field_interpolates_linear_data() {
        // f(t, y) = y on a grid should reproduce itself between nodes
        let dims = vec![5usize];
        let t_steps = 3usize;
        let mut values = Vec::new();
        for _ in 0..t_steps {
            for i in 0..5 {
                let y = -2.0 + i as f64; // lattice over [-2, 2]
                values.push(y);
            }
        }
        let f = TimeField::new(
            1,
            SupportBox::new(0.0, 1.0, vec![-2.0], vec![2.0], 0.5).unwrap(),
            FieldKind::Grid(Box::new(GridSamples {
                t_steps,
                dims,
                values,
            })),
        )
        .unwrap();
        assert_relative_eq!(f.eval_vec(0.3, &[0.7])[0], 0.7, epsilon = 1e-12);
    }
}
