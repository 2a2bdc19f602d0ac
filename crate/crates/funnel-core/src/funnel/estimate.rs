//! Bracketed funnel-section estimates: an inner point set from random
//! ε-selection ensembles and an outer cell set from grid propagation of the
//! differential inclusion.

use crate::error::{Error, Result};
use crate::field::{self, TimeField};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::HashSet;

/// Ensemble parameters for the inner (under-)approximation.
#[derive(Clone, Debug)]
pub struct InnerParams {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub ensemble: usize,
    /// decreasing selection radii; trajectories are split round-robin
    pub eps_schedule: Vec<f64>,
    /// random piecewise-constant selections with this many pieces
    pub pieces: usize,
    pub seed: u64,
    pub bound: f64,
}

impl InnerParams {
    pub fn new(t0: f64, t1: f64) -> Self {
        InnerParams {
            t0,
            t1,
            dt: 1e-3,
            ensemble: 1000,
            eps_schedule: vec![2e-3, 1e-3, 5e-4],
            pieces: 6,
            seed: 2026,
            bound: 1e4,
        }
    }

    pub fn with_ensemble(mut self, n: usize) -> Self {
        self.ensemble = n;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Endpoints at `t1` of solutions of `y' = f + u`, `|u| ≤ ε`, with `u`
/// drawn per-trajectory as a random piecewise-constant selection. As ε → 0
/// the endpoints approach the true funnel section from inside.
pub fn funnel_inner(f: &TimeField, y0: &[f64], p: &InnerParams) -> Result<Vec<Vec<f64>>> {
    if y0.len() != f.dim() {
        return Err(Error::InvalidInput("initial point dimension".into()));
    }
    if p.eps_schedule.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidInput(
            "eps_schedule must be non-increasing".into(),
        ));
    }
    let m = f.dim();
    // pinning at non-Lipschitz points must dominate the scheme's kink
    // noise (≈ Lip²·dt per step), so hold pieces use a control floor that
    // still vanishes with the step size
    let eta = 30.0 * p.dt;
    (0..p.ensemble)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed.wrapping_add(i as u64));
            let eps = if i == 0 {
                0.0 // keep one unperturbed solution in the ensemble
            } else {
                p.eps_schedule[i % p.eps_schedule.len()]
            };
            // piece breakpoints and per-piece control values: hold pieces
            // (non-positive components at the floor strength) alternate
            // randomly with small exploratory pieces. Breakpoints are biased
            // toward early times, where escape-time gaps are amplified
            // quadratically by the funnel dynamics.
            let mut cuts: Vec<f64> = (0..p.pieces - 1)
                .map(|_| {
                    let u: f64 = rng.gen_range(0.0..1.0f64);
                    p.t0 + (p.t1 - p.t0) * u.powf(1.5)
                })
                .collect();
            cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let controls: Vec<Vec<f64>> = (0..p.pieces)
                .map(|_| {
                    if eps > 0.0 && rng.gen_bool(0.5) {
                        let lo = eta.max(eps);
                        (0..m).map(|_| rng.gen_range(-lo..=0.0)).collect()
                    } else {
                        (0..m).map(|_| rng.gen_range(-eps..=eps)).collect()
                    }
                })
                .collect();
            let control_at = |t: f64| -> &[f64] {
                let k = cuts.partition_point(|&c| c <= t);
                &controls[k]
            };
            field::integrate(
                |t, y, out| {
                    f.eval(t, y, out);
                    let u = control_at(t);
                    for d in 0..m {
                        out[d] += u[d];
                    }
                },
                p.t0,
                p.t1,
                y0,
                p.dt,
                p.bound,
                |_, _| {},
            )
        })
        .collect()
}

/// Grid parameters for the outer (over-)approximation.
#[derive(Clone, Debug)]
pub struct OuterParams {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    pub h: f64,
    /// extra inclusion radius rate (covers the inner ensemble's ε)
    pub inflate: f64,
    pub max_cells: usize,
    pub bound: f64,
}

impl OuterParams {
    pub fn new(t0: f64, t1: f64) -> Self {
        OuterParams {
            t0,
            t1,
            dt: 1e-3,
            h: 1e-2,
            inflate: 1e-2,
            max_cells: 2_000_000,
            bound: 1e4,
        }
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }
}

/// A set of occupied grid cells; cell `idx` covers
/// `origin + idx·h … origin + (idx+1)·h` per dimension.
#[derive(Clone, Debug)]
pub struct CellSet {
    pub origin: Vec<f64>,
    pub h: f64,
    pub cells: Vec<Vec<i64>>,
}

impl CellSet {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn center(&self, idx: &[i64]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(d, &i)| self.origin[d] + (i as f64 + 0.5) * self.h)
            .collect()
    }

    /// Total measure (count × h^m).
    pub fn measure(&self) -> f64 {
        self.cells.len() as f64 * self.h.powi(self.origin.len() as i32)
    }

    /// Does the point lie inside some cell inflated by `slack`?
    pub fn covers(&self, p: &[f64], slack: f64) -> bool {
        self.cells.iter().any(|idx| {
            idx.iter().enumerate().all(|(d, &i)| {
                let lo = self.origin[d] + i as f64 * self.h - slack;
                let hi = self.origin[d] + (i as f64 + 1.0) * self.h + slack;
                p[d] >= lo && p[d] <= hi
            })
        })
    }

    /// Connectivity of the cell adjacency graph (cells adjacent when all
    /// index differences are ≤ 1 in absolute value).
    pub fn is_connected(&self) -> bool {
        if self.cells.is_empty() {
            return false;
        }
        let set: HashSet<&[i64]> = self.cells.iter().map(|c| c.as_slice()).collect();
        let m = self.origin.len();
        let mut seen: HashSet<&[i64]> = HashSet::new();
        let mut stack = vec![self.cells[0].as_slice()];
        seen.insert(self.cells[0].as_slice());
        let mut neighbor = vec![0i64; m];
        while let Some(cur) = stack.pop() {
            // enumerate the 3^m − 1 neighbors
            let mut offs = vec![-1i64; m];
            loop {
                if offs.iter().any(|&o| o != 0) {
                    for d in 0..m {
                        neighbor[d] = cur[d] + offs[d];
                    }
                    if let Some(&n) = set.get(neighbor.as_slice()) {
                        if !seen.contains(n) {
                            seen.insert(n);
                            stack.push(n);
                        }
                    }
                }
                let mut d = 0;
                loop {
                    if d == m {
                        break;
                    }
                    offs[d] += 1;
                    if offs[d] <= 1 {
                        break;
                    }
                    offs[d] = -1;
                    d += 1;
                }
                if d == m {
                    break;
                }
            }
        }
        seen.len() == self.cells.len()
    }
}

/// Reachable-cell over-approximation: the starting cell of `y0` propagated
/// by flowing each occupied cell's corners and center one step and
/// inflating by the one-step inclusion radius. In one dimension the
/// frontier is tracked with real endpoints (no per-step rasterization), so
/// the excess stays at integration-error scale.
pub fn funnel_outer(f: &TimeField, y0: &[f64], p: &OuterParams) -> Result<CellSet> {
    let m = f.dim();
    if y0.len() != m {
        return Err(Error::InvalidInput("initial point dimension".into()));
    }
    if p.h <= 0.0 || p.dt <= 0.0 {
        return Err(Error::InvalidInput("outer grid needs h, dt > 0".into()));
    }
    let origin: Vec<f64> = y0.iter().map(|v| v - 0.5 * p.h).collect();
    let steps = (((p.t1 - p.t0) / p.dt).ceil() as usize).max(1);
    let dt = (p.t1 - p.t0) / steps as f64;

    if m == 1 {
        // exact interval frontier
        let mut intervals: Vec<(f64, f64)> = vec![(y0[0] - 0.5 * p.h, y0[0] + 0.5 * p.h)];
        let mut buf = vec![0.0; 1];
        for k in 0..steps {
            let t = p.t0 + k as f64 * dt;
            let mut next: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
            for &(lo, hi) in &intervals {
                let mut a = [lo];
                let mut b = [hi];
                let (mut k1, mut ym, mut k2) = ([0.0], [0.0], [0.0]);
                field::midpoint_step(
                    &|t, y: &[f64], out: &mut [f64]| f.eval(t, y, out),
                    t,
                    dt,
                    &mut a,
                    &mut k1,
                    &mut ym,
                    &mut k2,
                );
                field::midpoint_step(
                    &|t, y: &[f64], out: &mut [f64]| f.eval(t, y, out),
                    t,
                    dt,
                    &mut b,
                    &mut k1,
                    &mut ym,
                    &mut k2,
                );
                // scalar flows preserve order; inflate by the inclusion rate
                let rho = p.inflate * dt + 1e-12;
                next.push((a[0].min(b[0]) - rho, a[0].max(b[0]) + rho));
                if !a[0].is_finite() || a[0].abs() > p.bound {
                    return Err(Error::Divergence("outer frontier diverged".into()));
                }
            }
            next.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            let mut merged: Vec<(f64, f64)> = Vec::new();
            for iv in next {
                match merged.last_mut() {
                    Some(last) if iv.0 <= last.1 => last.1 = last.1.max(iv.1),
                    _ => merged.push(iv),
                }
            }
            intervals = merged;
        }
        let mut cells = Vec::new();
        for (lo, hi) in intervals {
            let i0 = ((lo - origin[0]) / p.h).floor() as i64;
            let i1 = ((hi - origin[0]) / p.h).floor() as i64;
            for i in i0..=i1 {
                cells.push(vec![i]);
            }
            if cells.len() > p.max_cells {
                return Err(Error::ResourceLimit(format!(
                    "outer cell cap {} exceeded",
                    p.max_cells
                )));
            }
        }
        let _ = buf.pop();
        cells.sort();
        cells.dedup();
        return Ok(CellSet {
            origin,
            h: p.h,
            cells,
        });
    }

    // general grid propagation
    let mut occupied: HashSet<Vec<i64>> = HashSet::new();
    occupied.insert(vec![0; m]);
    let corners = 1usize << m;
    let mut pt = vec![0.0; m];
    let mut val = vec![0.0; m];
    let mut val_c = vec![0.0; m];
    let (mut k1, mut ym, mut k2) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for k in 0..steps {
        let t = p.t0 + k as f64 * dt;
        let mut next: HashSet<Vec<i64>> = HashSet::with_capacity(occupied.len() * 2);
        for idx in &occupied {
            // sample the field's variation inside the cell for the
            // inclusion radius
            for d in 0..m {
                pt[d] = origin[d] + (idx[d] as f64 + 0.5) * p.h;
            }
            f.eval(t, &pt, &mut val_c);
            let mut modulus = 0.0f64;
            let mut lo = vec![f64::INFINITY; m];
            let mut hi = vec![f64::NEG_INFINITY; m];
            for c in 0..corners {
                for d in 0..m {
                    let up = (c >> d) & 1 == 1;
                    pt[d] = origin[d] + (idx[d] as f64 + f64::from(u8::from(up))) * p.h;
                }
                f.eval(t, &pt, &mut val);
                let mut dev = 0.0;
                for d in 0..m {
                    dev += (val[d] - val_c[d]) * (val[d] - val_c[d]);
                }
                modulus = modulus.max(dev.sqrt());
                // flow the corner
                let mut y: Vec<f64> = (0..m)
                    .map(|d| origin[d] + (idx[d] as f64 + f64::from(u8::from((c >> d) & 1 == 1))) * p.h)
                    .collect();
                field::midpoint_step(
                    &|t, y: &[f64], out: &mut [f64]| f.eval(t, y, out),
                    t,
                    dt,
                    &mut y,
                    &mut k1,
                    &mut ym,
                    &mut k2,
                );
                if y.iter().any(|v| !v.is_finite() || v.abs() > p.bound) {
                    return Err(Error::Divergence("outer cell diverged".into()));
                }
                for d in 0..m {
                    lo[d] = lo[d].min(y[d]);
                    hi[d] = hi[d].max(y[d]);
                }
            }
            let rho = (p.inflate + modulus) * dt;
            // snap the index range so cells whose overlap is a sliver below
            // 2% of a cell are not marked: a stalled cell then re-marks
            // exactly itself instead of growing a ring every step
            let snap = 0.02;
            let i0: Vec<i64> = (0..m)
                .map(|d| ((lo[d] - rho - origin[d]) / p.h + snap).floor() as i64)
                .collect();
            let i1: Vec<i64> = (0..m)
                .map(|d| {
                    (((hi[d] + rho - origin[d]) / p.h - snap).floor() as i64).max(
                        ((lo[d] - rho - origin[d]) / p.h + snap).floor() as i64,
                    )
                })
                .collect();
            let mut cur = i0.clone();
            loop {
                next.insert(cur.clone());
                if next.len() > p.max_cells {
                    return Err(Error::ResourceLimit(format!(
                        "outer cell cap {} exceeded",
                        p.max_cells
                    )));
                }
                let mut d = 0;
                loop {
                    if d == m {
                        break;
                    }
                    cur[d] += 1;
                    if cur[d] <= i1[d] {
                        break;
                    }
                    cur[d] = i0[d];
                    d += 1;
                }
                if d == m {
                    break;
                }
            }
        }
        occupied = next;
    }
    let mut cells: Vec<Vec<i64>> = occupied.into_iter().collect();
    cells.sort();
    Ok(CellSet {
        origin,
        h: p.h,
        cells,
    })
}

/// A bracketed funnel-section estimate at `t1`.
#[derive(Clone, Debug)]
pub struct FunnelEstimate {
    pub t1: f64,
    pub inner: Vec<Vec<f64>>,
    pub outer: CellSet,
}

pub fn estimate_funnel(
    f: &TimeField,
    y0: &[f64],
    ip: &InnerParams,
    op: &OuterParams,
) -> Result<FunnelEstimate> {
    Ok(FunnelEstimate {
        t1: ip.t1,
        inner: funnel_inner(f, y0, ip)?,
        outer: funnel_outer(f, y0, op)?,
    })
}

/// Kneser connectivity check: true iff the outer cell adjacency graph is
/// connected and the inner set is nonempty. A false result signals a
/// discretization failure, never a refutation of the theorem.
pub fn kneser_check(est: &FunnelEstimate) -> bool {
    !est.inner.is_empty() && est.outer.is_connected()
}

/// Bracketing: every inner point inside the outer set inflated by `h`.
pub fn bracketing_holds(est: &FunnelEstimate) -> bool {
    est.inner
        .iter()
        .all(|p| est.outer.covers(p, est.outer.h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldKind, SupportBox};

    fn abs_sqrt() -> TimeField {
        TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.5, 1, 9.0, 2.0).unwrap(),
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
    fn zero_field_inner_is_singleton() {
        let f = TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 4.0, 1.0).unwrap(),
            FieldKind::Zero,
        )
        .unwrap();
        let pts = funnel_inner(&f, &[0.25], &InnerParams::new(0.0, 1.0).with_ensemble(64))
            .unwrap();
        for p in pts {
            assert!((p[0] - 0.25).abs() <= 1.5e-2, "endpoint {p:?}");
        }
    }

    #[test]
    fn abs_sqrt_section_fills_unit_interval() {
        let f = abs_sqrt();
        let ip = InnerParams::new(0.0, 1.0);
        let pts = funnel_inner(&f, &[0.0], &ip).unwrap();
        // oracle: endpoints of the solution family from 0 form [0, 1]
        let mut max_gap: f64 = 0.0;
        let mut xs: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(xs[0] <= 0.02 && xs[0] >= -1e-3);
        assert!(*xs.last().unwrap() >= 0.98 && *xs.last().unwrap() <= 1.03);
        for w in xs.windows(2) {
            max_gap = max_gap.max(w[1] - w[0]);
        }
        assert!(max_gap <= 0.04, "largest endpoint gap {max_gap}");
    }

    #[test]
    fn abs_sqrt_from_one_is_deterministic() {
        // forward uniqueness away from 0: y(1) = 4
        let f = abs_sqrt();
        let mut ip = InnerParams::new(0.0, 1.0).with_ensemble(32);
        ip.eps_schedule = vec![1e-4];
        let pts = funnel_inner(&f, &[1.0], &ip).unwrap();
        for p in pts {
            assert!((p[0] - 4.0).abs() <= 2e-3, "endpoint {p:?}");
        }
    }

    #[test]
    fn outer_zero_field_single_cell_neighborhood() {
        let f = TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 4.0, 1.0).unwrap(),
            FieldKind::Zero,
        )
        .unwrap();
        let cs = funnel_outer(&f, &[0.0], &OuterParams::new(0.0, 1.0)).unwrap();
        assert!(cs.measure() <= 5.0 * cs.h, "measure {}", cs.measure());
        assert!(cs.covers(&[0.0], 0.0));
    }

    #[test]
    fn outer_constant_field_translates() {
        let f = TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 8.0, 1.0).unwrap(),
            FieldKind::Constant { v: vec![1.0] },
        )
        .unwrap();
        let cs = funnel_outer(&f, &[0.0], &OuterParams::new(0.0, 1.0)).unwrap();
        assert!(cs.covers(&[1.0], 0.0), "cells miss the translated point");
        assert!(cs.measure() <= 0.2, "measure {}", cs.measure());
    }

    #[test]
    fn outer_abs_sqrt_covers_unit_interval_tightly() {
        let f = abs_sqrt();
        let cs = funnel_outer(&f, &[0.0], &OuterParams::new(0.0, 1.0)).unwrap();
        for k in 0..=50 {
            let x = k as f64 / 50.0;
            assert!(cs.covers(&[x], 0.0), "outer misses {x}");
        }
        let excess = cs.measure() - 1.0;
        assert!(excess <= 0.1, "outer excess {excess}");
    }

    #[test]
    fn outer_refinement_monotone() {
        let f = abs_sqrt();
        let coarse = funnel_outer(&f, &[0.0], &OuterParams::new(0.0, 1.0)).unwrap();
        let mut p2 = OuterParams::new(0.0, 1.0);
        p2.h /= 2.0;
        p2.dt /= 2.0;
        let fine = funnel_outer(&f, &[0.0], &p2).unwrap();
        for idx in &fine.cells {
            let c = fine.center(idx);
            assert!(
                coarse.covers(&c, coarse.h),
                "refined cell at {c:?} outside the inflated coarse set"
            );
        }
    }

    #[test]
    fn kneser_and_bracketing_on_abs_sqrt() {
        let f = abs_sqrt();
        let est = estimate_funnel(
            &f,
            &[0.0],
            &InnerParams::new(0.0, 1.0).with_ensemble(200),
            &OuterParams::new(0.0, 1.0),
        )
        .unwrap();
        assert!(kneser_check(&est));
        assert!(bracketing_holds(&est));
    }

    #[test]
    fn kneser_negative_control() {
        let f = abs_sqrt();
        let mut est = estimate_funnel(
            &f,
            &[0.0],
            &InnerParams::new(0.0, 1.0).with_ensemble(50),
            &OuterParams::new(0.0, 1.0),
        )
        .unwrap();
        // hand-delete a middle band of cells
        let n = est.outer.cells.len();
        est.outer.cells.drain(n / 2 - 2..n / 2 + 2);
        assert!(!kneser_check(&est));
    }
}
