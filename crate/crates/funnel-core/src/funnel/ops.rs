//! The explicit funnel constructions: field patching, graph-arc and tube
//! realizations, pierced Jordan curves, projections, Peano sections and the
//! union construction one dimension up.

use super::estimate::{funnel_inner, InnerParams};
use super::eye::{closing_flow, eye_maps, BumpProfile};
use crate::error::{Error, Result};
use crate::field::{
    BumpUnionField, FieldKind, Profile1D, SampledPath, SupportBox, TimeField,
};
use crate::surface::{JordanCurve, SurfacePoint};
use std::sync::Arc;

/// `h(t, x) = f(t, x) + g(t − 1, x)`: the funnel of `f` flowed by `g` over
/// a second hour.
pub fn patch_fields(f: &TimeField, g: &TimeField) -> Result<TimeField> {
    if f.dim() != g.dim() {
        return Err(Error::InvalidInput("patched fields must share a dimension".into()));
    }
    let tol = 1e-9;
    if f.support().t0 < -tol || f.support().t1 > 1.0 + tol {
        return Err(Error::InvalidInput(
            "first field's support must lie in [0, 1]".into(),
        ));
    }
    if g.support().t0 < -tol || g.support().t1 > 1.0 + tol {
        return Err(Error::InvalidInput(
            "second field's support must lie in [0, 1] before the shift; \
             the shifted supports would overlap"
                .into(),
        ));
    }
    let m = f.dim();
    let (fs, gs) = (f.support(), g.support());
    let lo: Vec<f64> = (0..m).map(|d| fs.lo[d].min(gs.lo[d])).collect();
    let hi: Vec<f64> = (0..m).map(|d| fs.hi[d].max(gs.hi[d])).collect();
    let margin = fs.margin.min(gs.margin);
    TimeField::new(
        m,
        SupportBox::new(0.0, 2.0, lo, hi, margin)?,
        FieldKind::Patched {
            first: Box::new(f.clone()),
            second: Box::new(g.clone()),
            shift: 1.0,
        },
    )
}

/// Compress a field's time window onto `[0, 1]`, preserving sections.
pub fn compress_to_unit_window(f: &TimeField) -> Result<TimeField> {
    let sup = f.support();
    let len = sup.t1 - sup.t0;
    if (len - 1.0).abs() < 1e-12 && sup.t0.abs() < 1e-12 {
        return Ok(f.clone());
    }
    TimeField::new(
        f.dim(),
        SupportBox::new(0.0, 1.0, sup.lo.clone(), sup.hi.clone(), sup.margin)?,
        FieldKind::TimeCompressed {
            inner: Box::new(f.clone()),
            scale: len,
        },
    )
}

/// An arc that is a graph over one coordinate axis: the remaining
/// coordinates are continuous functions of it.
#[derive(Clone, Debug)]
pub struct GraphArc {
    /// the coordinate the arc is a graph over
    pub axis: usize,
    /// samples (s, other-coordinate values) with increasing s; `values`
    /// lists the non-axis coordinates in ascending axis order
    pub samples: Vec<(f64, Vec<f64>)>,
}

impl GraphArc {
    /// dimension of the ambient space
    pub fn dim(&self) -> usize {
        self.samples[0].1.len() + 1
    }

    pub fn validate(&self, slope_cap: f64) -> Result<()> {
        if self.samples.len() < 2 {
            return Err(Error::InvalidInput("graph arc needs ≥ 2 samples".into()));
        }
        for w in self.samples.windows(2) {
            let ds = w[1].0 - w[0].0;
            if ds <= 0.0 {
                return Err(Error::UnsupportedShape(
                    "graph arc parameter must strictly increase (vertical jump?)".into(),
                ));
            }
            let dv: f64 = w[0]
                .1
                .iter()
                .zip(&w[1].1)
                .map(|(a, b)| (b - a) * (b - a))
                .sum::<f64>()
                .sqrt();
            if dv / ds > slope_cap {
                return Err(Error::UnsupportedShape(format!(
                    "graph arc slope {dv:.3}/{ds:.3} exceeds the cap; \
                     not a graph over its first coordinate"
                )));
            }
        }
        Ok(())
    }

    /// ambient point at sample k
    pub fn point(&self, k: usize) -> Vec<f64> {
        let (s, vals) = &self.samples[k];
        let mut p = Vec::with_capacity(self.dim());
        let mut vi = 0;
        for d in 0..self.dim() {
            if d == self.axis {
                p.push(*s);
            } else {
                p.push(vals[vi]);
                vi += 1;
            }
        }
        p
    }
}

/// Realize a graph arc as a funnel section: hour one is a non-uniquely
/// solvable segment funnel along the graph axis (section `[c, d]`), hour
/// two the shear flow carrying the segment onto the graph.
///
/// Returns the field on `[0, 2]` and the initial point.
pub fn arc_funnel(arc: &GraphArc) -> Result<(TimeField, Vec<f64>)> {
    arc.validate(50.0)?;
    let m = arc.dim();
    let (c, d) = (arc.samples[0].0, arc.samples.last().unwrap().0);

    // spatial box covering the arc with room
    let mut lo = vec![f64::INFINITY; m];
    let mut hi = vec![f64::NEG_INFINITY; m];
    for k in 0..arc.samples.len() {
        for (dd, v) in arc.point(k).iter().enumerate() {
            lo[dd] = lo[dd].min(*v);
            hi[dd] = hi[dd].max(*v);
        }
    }
    let pad = 2.0;
    for dd in 0..m {
        lo[dd] -= pad;
        hi[dd] += pad;
    }

    let segment = TimeField::new(
        m,
        SupportBox::new(0.0, 1.0, lo.clone(), hi.clone(), 0.5)?,
        FieldKind::AbsPow {
            axis: arc.axis,
            c: 2.0 * (d - c).sqrt(),
            p: 0.5,
            origin: c,
        },
    )?;

    // shear profiles: one per non-axis coordinate, compact extension
    let n = arc.samples.len();
    let mut profiles: Vec<Option<Profile1D>> = vec![None; m];
    let mut vi = 0;
    for dd in 0..m {
        if dd == arc.axis {
            continue;
        }
        let idx = vi;
        let prof = Profile1D::from_fn(c, d, (n - 1).max(8), 0.3 * (d - c) + 0.1, |s| {
            // linear interpolation of the samples at s
            let pos = arc
                .samples
                .partition_point(|(x, _)| *x <= s)
                .clamp(1, n - 1);
            let (s0, v0) = &arc.samples[pos - 1];
            let (s1, v1) = &arc.samples[pos];
            let w = ((s - s0) / (s1 - s0)).clamp(0.0, 1.0);
            v0[idx] * (1.0 - w) + v1[idx] * w
        })?;
        profiles[dd] = Some(prof);
        vi += 1;
    }
    let shear = TimeField::new(
        m,
        SupportBox::new(0.0, 1.0, lo, hi, 0.5)?,
        FieldKind::Shear {
            graph_axis: arc.axis,
            profiles,
        },
    )?;

    let field = patch_fields(&segment, &shear)?;
    let mut y0 = vec![0.0; m];
    y0[arc.axis] = c;
    Ok((field, y0))
}

/// Realize a planar arc (not necessarily a graph) as a funnel section by
/// transporting the segment funnel through a tubular neighborhood: the
/// field is tangent to the arc with the non-unique square-root speed
/// profile in arclength, tapered off the tube. Conserves the cross-tube
/// coordinate, so the section at t = 1 is the arc itself.
pub fn arc_tube_field(points: &[[f64; 2]], radius: f64) -> Result<(TimeField, Vec<f64>)> {
    if points.len() < 2 {
        return Err(Error::InvalidInput("tube arc needs ≥ 2 points".into()));
    }
    if radius <= 0.0 {
        return Err(Error::InvalidInput("tube radius must be positive".into()));
    }
    // resample to uniform spacing ≤ radius/3
    let mut resampled: Vec<[f64; 2]> = vec![points[0]];
    let mut arclen = vec![0.0f64];
    for w in points.windows(2) {
        let seg = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
        let steps = (seg / (radius / 3.0)).ceil().max(1.0) as usize;
        for k in 1..=steps {
            let t = k as f64 / steps as f64;
            let p = [
                w[0][0] + t * (w[1][0] - w[0][0]),
                w[0][1] + t * (w[1][1] - w[0][1]),
            ];
            let last = *resampled.last().unwrap();
            let d = ((p[0] - last[0]).powi(2) + (p[1] - last[1]).powi(2)).sqrt();
            if d > 1e-12 {
                arclen.push(arclen.last().unwrap() + d);
                resampled.push(p);
            }
        }
    }
    let total = *arclen.last().unwrap();
    let n = resampled.len();
    if total <= 0.0 || n < 3 {
        return Err(Error::InvalidInput("degenerate tube arc".into()));
    }
    // tangents by central differences
    let mut tangents = Vec::with_capacity(n);
    for i in 0..n {
        let a = resampled[i.saturating_sub(1)];
        let b = resampled[(i + 1).min(n - 1)];
        let d = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt().max(1e-12);
        tangents.push([(b[0] - a[0]) / d, (b[1] - a[1]) / d]);
    }
    // uniform bins for nearest-sample queries
    let cell = radius;
    let key = |p: [f64; 2]| -> (i64, i64) {
        ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64)
    };
    let mut bins: std::collections::HashMap<(i64, i64), Vec<u32>> =
        std::collections::HashMap::new();
    for (i, p) in resampled.iter().enumerate() {
        bins.entry(key(*p)).or_default().push(i as u32);
    }

    let mut lo = vec![f64::INFINITY; 2];
    let mut hi = vec![f64::NEG_INFINITY; 2];
    for p in &resampled {
        lo[0] = lo[0].min(p[0]);
        lo[1] = lo[1].min(p[1]);
        hi[0] = hi[0].max(p[0]);
        hi[1] = hi[1].max(p[1]);
    }
    for d in 0..2 {
        lo[d] -= 1.5;
        hi[d] += 1.5;
    }

    let samples = Arc::new((resampled, tangents, arclen, bins));
    let y0 = vec![samples.0[0][0], samples.0[0][1]];
    let samples2 = samples.clone();
    let eval = move |t: f64, p: &[f64], out: &mut [f64]| {
        out[0] = 0.0;
        out[1] = 0.0;
        if !(0.0..=1.0).contains(&t) {
            return;
        }
        let (pts, tans, arcs, bins) = &*samples2;
        let (ci, cj) = (
            (p[0] / cell).floor() as i64,
            (p[1] / cell).floor() as i64,
        );
        let mut best = f64::INFINITY;
        let mut best_i = usize::MAX;
        for di in -1..=1 {
            for dj in -1..=1 {
                if let Some(list) = bins.get(&(ci + di, cj + dj)) {
                    for &i in list {
                        let q = pts[i as usize];
                        let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
                        if d2 < best {
                            best = d2;
                            best_i = i as usize;
                        }
                    }
                }
            }
        }
        if best_i == usize::MAX {
            return;
        }
        let dist = best.sqrt();
        if dist >= radius {
            return;
        }
        let s = arcs[best_i];
        // square-root speed along arclength, ramped to zero at the far end
        let end_w = 0.01 * total;
        let ramp = ((total - s) / end_w).clamp(0.0, 1.0);
        let speed = 2.0 * (total * s).sqrt() * ramp;
        let taper = (2.0 * (1.0 - dist / radius)).clamp(0.0, 1.0);
        let tan = tans[best_i];
        out[0] = speed * taper * tan[0];
        out[1] = speed * taper * tan[1];
    };
    let field = TimeField::new(
        2,
        SupportBox::new(0.0, 1.0, lo, hi, 0.5)?,
        FieldKind::Dynamic(Arc::new(eval)),
    )?;
    Ok((field, y0))
}

/// Realize a smoothly pierceable Jordan curve as a funnel section.
///
/// The curve must pass through the origin, cross the x-axis transversally
/// there, and meet the segment `[−1, 1] × {0}` only at the origin. Hour
/// one realizes the opened arc `Ψ⁻¹(J ∖ 0) ∪ (0, ±β(0))`; hour two closes
/// the eye, so the section at t = 2 is the curve.
pub fn pierce_to_funnel(
    curve: &JordanCurve,
    beta: &BumpProfile,
) -> Result<(TimeField, Vec<f64>)> {
    if curve.space() != crate::surface::Space::Plane {
        return Err(Error::InvalidInput("pierce needs a planar curve".into()));
    }
    let eye = eye_maps(beta.clone())?;
    // densify and locate the origin
    let dense = curve.base().densify(5e-3);
    let xy = |p: &SurfacePoint| -> [f64; 2] {
        match *p {
            SurfacePoint::Plane { x, y } => [x, y],
            _ => unreachable!(),
        }
    };
    let mut i0 = usize::MAX;
    let mut d0 = f64::INFINITY;
    for (i, p) in dense.iter().enumerate() {
        let q = xy(p);
        let d = q[0].hypot(q[1]);
        if d < d0 {
            d0 = d;
            i0 = i;
        }
    }
    if d0 > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "curve misses the origin by {d0:.2e}; pierce point must be the origin"
        )));
    }
    let n = dense.len();
    // transversality at the origin
    let before = xy(&dense[(i0 + n - 1) % n]);
    let after = xy(&dense[(i0 + 1) % n]);
    for q in [before, after] {
        let len = q[0].hypot(q[1]).max(1e-12);
        if (q[1] / len).abs() < 0.17 {
            return Err(Error::InvalidInput(
                "curve does not cross the x-axis transversally at the origin".into(),
            ));
        }
    }
    // the pierce segment [−1, 1] × {0} meets the curve only at the origin
    for (i, p) in dense.iter().enumerate() {
        if i == i0 {
            continue;
        }
        let q = xy(p);
        if q[1].abs() < 1e-9 && q[0].abs() < 1.0 {
            return Err(Error::InvalidInput(format!(
                "curve meets the pierce segment again at ({}, {})",
                q[0], q[1]
            )));
        }
    }

    // open the eye: walk from the origin into y > 0 first
    let step: i64 = if xy(&dense[(i0 + 1) % n])[1] > 0.0 { 1 } else { -1 };
    let mut opened: Vec<[f64; 2]> = Vec::with_capacity(n + 2);
    opened.push([0.0, eye.beta(0.0)]);
    for k in 1..n {
        let idx = ((i0 as i64 + step * k as i64).rem_euclid(n as i64)) as usize;
        let q = xy(&dense[idx]);
        if q[1] == 0.0 && q[0].abs() < 1.0 {
            continue; // cannot happen after the checks; belt and braces
        }
        opened.push(eye.psi_inv(q)?);
    }
    opened.push([0.0, -eye.beta(0.0)]);

    // tube radius from the opened arc's self-clearance
    let mut min_gap = f64::INFINITY;
    let skip = (opened.len() / 20).max(8);
    for i in 0..opened.len() {
        for j in (i + skip)..opened.len() {
            if i == 0 && j >= opened.len() - skip {
                continue; // the two lips share the eye; their gap is 2β(0)
            }
            let d = (opened[i][0] - opened[j][0]).hypot(opened[i][1] - opened[j][1]);
            if d < min_gap {
                min_gap = d;
            }
        }
    }
    let radius = (0.4 * min_gap).min(0.08).max(1e-3);

    let (tube, y0) = arc_tube_field(&opened, radius)?;
    let flow = closing_flow(beta)?;
    let field = patch_fields(&tube, &flow)?;
    Ok((field, y0))
}

/// Append a collapsing flow on one axis: the section at t = 2 is the
/// projection (the axis killed) of the section at t = 1. `range` bounds
/// the collapsed coordinate (`[−range, range]` reaches 0 by t = 2).
pub fn project_funnel(f: &TimeField, axis: usize, range: f64) -> Result<TimeField> {
    let m = f.dim();
    if axis >= m {
        return Err(Error::InvalidInput("collapse axis out of range".into()));
    }
    let f1 = compress_to_unit_window(f)?;
    let sup = f1.support();
    let g = TimeField::new(
        m,
        SupportBox::new(0.0, 1.0, sup.lo.clone(), sup.hi.clone(), sup.margin)?,
        FieldKind::Collapse {
            axis,
            rate: 2.3 * range.max(1.0).sqrt(),
            target: 0.0,
        },
    )?;
    patch_fields(&f1, &g)
}

/// Quick containment probe: a small ensemble's endpoints must stay within
/// the box `|y|_∞ ≤ bound` at the field's final time.
pub fn verify_section_bounded(f: &TimeField, y0: &[f64], bound: f64) -> Result<()> {
    let sup = f.support();
    let mut ip = InnerParams::new(sup.t0, sup.t1).with_ensemble(48);
    ip.dt = 2e-3;
    for p in funnel_inner(f, y0, &ip)? {
        if p.iter().any(|v| v.abs() > bound) {
            return Err(Error::InvalidInput(format!(
                "section escapes the cube |y| ≤ {bound}: reached {p:?}"
            )));
        }
    }
    Ok(())
}

/// Realize a Peano continuum (a continuous image of an interval, sampled)
/// as a funnel section one dimension up: lift the parameterization to the
/// graph arc `(h(θ), θ)`, realize it, then project the parameter axis away.
///
/// Returns the field on `[0, 2]` (lift hour compressed with the collapse
/// hour appended) and the initial point; the final section lives in the
/// hyperplane `last coordinate = 0`.
pub fn peano_section(samples: &[(f64, Vec<f64>)]) -> Result<(TimeField, Vec<f64>)> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput("need ≥ 2 parameter samples".into()));
    }
    let m = samples[0].1.len();
    let span = samples.last().unwrap().0 - samples[0].0;
    if span <= 0.0 {
        return Err(Error::InvalidInput("parameter must increase".into()));
    }
    // continuity modulus check
    for w in samples.windows(2) {
        let dv: f64 = w[0]
            .1
            .iter()
            .zip(&w[1].1)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt();
        let ds = w[1].0 - w[0].0;
        if ds <= 0.0 || dv > 0.25 {
            return Err(Error::InvalidInput(
                "parameter samples too coarse or discontinuous".into(),
            ));
        }
    }
    let t0 = samples[0].0;
    let arc = GraphArc {
        axis: m,
        samples: samples
            .iter()
            .map(|(theta, h)| (2.0 * (theta - t0) / span - 1.0, h.clone()))
            .collect(),
    };
    let (lift, y0) = arc_funnel(&arc)?;
    let field = project_funnel(&lift, m, 1.0)?;
    Ok((field, y0))
}

#[derive(Clone, Debug)]
pub struct UnionParams {
    pub ensemble: usize,
    pub dt: f64,
    pub seed: u64,
    /// how close a selected solution must come to the common point
    pub select_tol: f64,
}

impl Default for UnionParams {
    fn default() -> Self {
        UnionParams {
            ensemble: 400,
            dt: 1e-3,
            seed: 11,
            select_tol: 0.03,
        }
    }
}

/// Result of the union construction: the section of `field` at t = 1 from
/// the broken initial line is `A × 0 ∪ c × [0, 3] ∪ B × 3`; projecting the
/// homotopy coordinate away yields `A ∪ B`.
#[derive(Clone, Debug)]
pub struct UnionField {
    pub field: TimeField,
    pub a: SampledPath,
    pub b: SampledPath,
    pub pa: Vec<f64>,
    pub pb: Vec<f64>,
}

impl UnionField {
    /// Sample the broken initial line from `(pa, 0)` to `(pb, 3)`.
    pub fn initial_line(&self, per_unit: usize) -> Vec<Vec<f64>> {
        let m = self.pa.len();
        let mut out = Vec::new();
        for k in 0..=(3 * per_unit) {
            let z = 3.0 * k as f64 / (3 * per_unit) as f64;
            let mut p = vec![0.0; m + 1];
            let w = if z <= 1.0 {
                0.0
            } else if z >= 2.0 {
                1.0
            } else {
                z - 1.0
            };
            for d in 0..m {
                p[d] = self.pa[d] * (1.0 - w) + self.pb[d] * w;
            }
            p[m] = z;
            out.push(p);
        }
        out
    }
}

/// Select a solution of `f` from `start` whose endpoint lands on `target`,
/// recording the full trajectory.
fn select_solution(
    f: &TimeField,
    start: &[f64],
    target: &[f64],
    p: &UnionParams,
) -> Result<SampledPath> {
    use rand::Rng;
    use rand::SeedableRng;
    let sup = f.support();
    let m = f.dim();
    let mut best: Option<(f64, Vec<f64>, Vec<Vec<f64>>)> = None;
    let eta = 30.0 * p.dt;
    for i in 0..p.ensemble {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(p.seed.wrapping_add(i as u64));
        let eps = if i == 0 { 0.0 } else { 2e-3 / (1 + i % 3) as f64 };
        let mut cuts: Vec<f64> = (0..3).map(|_| rng.gen_range(sup.t0..sup.t1)).collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let controls: Vec<Vec<f64>> = (0..4)
            .map(|_| {
                if eps > 0.0 && rng.gen_bool(0.5) {
                    let lo = eta.max(eps);
                    (0..m).map(|_| rng.gen_range(-lo..=0.0)).collect()
                } else {
                    (0..m).map(|_| rng.gen_range(-eps..=eps)).collect()
                }
            })
            .collect();
        let mut times = Vec::new();
        let mut points = Vec::new();
        let end = crate::field::integrate(
            |t, y, out| {
                f.eval(t, y, out);
                let k = cuts.partition_point(|&c| c <= t);
                for d in 0..m {
                    out[d] += controls[k][d];
                }
            },
            sup.t0,
            sup.t1,
            start,
            p.dt,
            1e4,
            |t, y| {
                times.push(t);
                points.push(y.to_vec());
            },
        )?;
        let dist: f64 = end
            .iter()
            .zip(target)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if best.as_ref().map_or(true, |(d, _, _)| dist < *d) {
            // thin the recorded trajectory
            let keep = (times.len() / 256).max(1);
            let times: Vec<f64> = times.iter().step_by(keep).copied().collect();
            let points: Vec<Vec<f64>> = points.iter().step_by(keep).cloned().collect();
            best = Some((dist, times, points));
        }
    }
    let (dist, times, points) = best.unwrap();
    if dist > p.select_tol {
        return Err(Error::SelectionFailure(format!(
            "no ensemble solution reached the common point (best miss {dist:.3e}); \
             retry with a larger ensemble"
        )));
    }
    SampledPath::new(times, points)
}

/// The union of two funnel sections as a funnel section one dimension up:
/// the three-slab averaged field whose section at t = 1 from the broken
/// initial line is `A × 0 ∪ L ∪ B × 3` with `L = c × [0, 3]`.
pub fn union_one_up(
    fa: &TimeField,
    pa: &[f64],
    fb: &TimeField,
    pb: &[f64],
    c: &[f64],
    params: &UnionParams,
) -> Result<UnionField> {
    if fa.dim() != fb.dim() {
        return Err(Error::InvalidInput("union fields must share a dimension".into()));
    }
    let m = fa.dim();
    if pa.len() != m || pb.len() != m || c.len() != m {
        return Err(Error::InvalidInput("union point dimensions".into()));
    }
    let fa1 = compress_to_unit_window(fa)?;
    let fb1 = compress_to_unit_window(fb)?;

    // solutions a(t), b(t) from the base points to the common point
    let a = select_solution(&fa1, pa, c, params)?;
    let b = select_solution(&fb1, pb, c, params)?;

    let (sa, sb) = (fa1.support(), fb1.support());
    let mut lo: Vec<f64> = (0..m).map(|d| sa.lo[d].min(sb.lo[d])).collect();
    let mut hi: Vec<f64> = (0..m).map(|d| sa.hi[d].max(sb.hi[d])).collect();
    lo.push(-1.5);
    hi.push(4.5);
    let field = TimeField::new(
        m + 1,
        SupportBox::new(0.0, 1.0, lo, hi, 0.5)?,
        FieldKind::BumpUnion(Box::new(BumpUnionField {
            f: fa1,
            g: fb1,
            a: a.clone(),
            b: b.clone(),
        })),
    )?;
    Ok(UnionField {
        field,
        a,
        b,
        pa: pa.to_vec(),
        pb: pb.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::integrate;

    #[test]
    fn patch_respects_windows() {
        let zero1 = TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 4.0, 1.0).unwrap(),
            FieldKind::Zero,
        )
        .unwrap();
        let late = TimeField::new(
            1,
            SupportBox::symmetric(0.5, 1.7, 1, 4.0, 1.0).unwrap(),
            FieldKind::Zero,
        )
        .unwrap();
        assert!(patch_fields(&zero1, &late).is_err());
        assert!(patch_fields(&zero1, &zero1).is_ok());
    }

    #[test]
    fn patch_zero_second_hour_preserves_section() {
        // g = 0: the second hour is inert
        let f = TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 8.0, 1.0).unwrap(),
            FieldKind::Constant { v: vec![0.7] },
        )
        .unwrap();
        let zero = TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 8.0, 1.0).unwrap(),
            FieldKind::Zero,
        )
        .unwrap();
        let h = patch_fields(&f, &zero).unwrap();
        let end = integrate(|t, y, o| h.eval(t, y, o), 0.0, 2.0, &[0.0], 1e-3, 10.0, |_, _| {})
            .unwrap();
        assert!((end[0] - 0.7).abs() < 1e-6);
    }

    #[test]
    fn patch_translation_second_hour() {
        let zero = TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 8.0, 1.0).unwrap(),
            FieldKind::Zero,
        )
        .unwrap();
        let shift = TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 8.0, 1.0).unwrap(),
            FieldKind::Constant { v: vec![1.0] },
        )
        .unwrap();
        let h = patch_fields(&zero, &shift).unwrap();
        let end = integrate(|t, y, o| h.eval(t, y, o), 0.0, 2.0, &[0.25], 1e-3, 10.0, |_, _| {})
            .unwrap();
        assert!((end[0] - 1.25).abs() < 1e-6);
    }

    #[test]
    fn graph_arc_rejects_jumps() {
        let arc = GraphArc {
            axis: 0,
            samples: vec![
                (0.0, vec![0.0]),
                (0.01, vec![5.0]), // vertical jump
                (1.0, vec![0.0]),
            ],
        };
        assert!(matches!(
            arc_funnel(&arc),
            Err(Error::UnsupportedShape(_))
        ));
    }

    #[test]
    fn arc_funnel_realizes_sin_graph() {
        let n = 120;
        let arc = GraphArc {
            axis: 0,
            samples: (0..=n)
                .map(|k| {
                    let s = std::f64::consts::PI * k as f64 / n as f64;
                    (s, vec![s.sin()])
                })
                .collect(),
        };
        let (field, y0) = arc_funnel(&arc).unwrap();
        let ip = InnerParams::new(0.0, 2.0).with_ensemble(600).with_dt(2.5e-4);
        let pts = funnel_inner(&field, &y0, &ip).unwrap();
        // endpoints must lie near the graph and cover it
        let graph: Vec<[f64; 2]> = (0..=200)
            .map(|k| {
                let s = std::f64::consts::PI * k as f64 / 200.0;
                [s, s.sin()]
            })
            .collect();
        let d = planar_hausdorff(&pts, &graph);
        assert!(d <= 0.05, "d_H(section, graph) = {d}");
    }

    pub(super) fn planar_hausdorff(a: &[Vec<f64>], b: &[[f64; 2]]) -> f64 {
        let d_ab = a
            .iter()
            .map(|p| {
                b.iter()
                    .map(|q| (p[0] - q[0]).hypot(p[1] - q[1]))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max);
        let d_ba = b
            .iter()
            .map(|q| {
                a.iter()
                    .map(|p| (p[0] - q[0]).hypot(p[1] - q[1]))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max);
        d_ab.max(d_ba)
    }

    #[test]
    fn segment_arc_reduces_to_1d_family() {
        let arc = GraphArc {
            axis: 0,
            samples: (0..=20).map(|k| (k as f64 / 20.0, vec![0.0])).collect(),
        };
        let (field, y0) = arc_funnel(&arc).unwrap();
        let ip = InnerParams::new(0.0, 2.0).with_ensemble(400).with_dt(2.5e-4);
        let pts = funnel_inner(&field, &y0, &ip).unwrap();
        let target: Vec<[f64; 2]> = (0..=100).map(|k| [k as f64 / 100.0, 0.0]).collect();
        let d = planar_hausdorff(&pts, &target);
        assert!(d <= 0.04, "d_H = {d}");
    }

    #[test]
    fn project_collapses_singleton() {
        // a point section (0.3, 0.7) projects to (0.3, 0)
        let f = TimeField::new(
            2,
            SupportBox::symmetric(0.0, 1.0, 2, 3.0, 0.5).unwrap(),
            FieldKind::Zero,
        )
        .unwrap();
        let h = project_funnel(&f, 1, 1.0).unwrap();
        let end = integrate(
            |t, y, o| h.eval(t, y, o),
            0.0,
            2.0,
            &[0.3, 0.7],
            1e-3,
            10.0,
            |_, _| {},
        )
        .unwrap();
        assert!((end[0] - 0.3).abs() < 1e-6 && end[1].abs() < 2e-3, "{end:?}");
    }

    #[test]
    fn eye_collapse_after_segment_funnel() {
        // patch example: a 1D section [−1, 1] collapsed to 0 in hour two
        let f = TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 4.0, 0.5).unwrap(),
            FieldKind::Zero,
        )
        .unwrap();
        let h = project_funnel(&f, 0, 1.0).unwrap();
        for y0 in [-1.0, -0.4, 0.2, 1.0] {
            let end = integrate(
                |t, y, o| h.eval(t, y, o),
                0.0,
                2.0,
                &[y0],
                1e-3,
                10.0,
                |_, _| {},
            )
            .unwrap();
            assert!(end[0].abs() < 2e-3, "collapse from {y0} left {end:?}");
        }
    }
}
