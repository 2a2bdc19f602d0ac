//! Finite stages of the infinite-resistance limit curve.
//!
//! Stage 1 is the identity (the equator itself). Stage `n ≥ 2` composes a
//! further band map `σ_n` in the shrinking tubular neighborhood of the
//! current curve, conjugated through the composed transfer map, with time
//! support `(1 − 2^{1−k}, 1 − 2^{−k})` for the paper-side index `k = n − 1`.
//! Every stage logs its measured speed bound, transfer-map increments,
//! Hausdorff step and resistance estimate against the configured caps and
//! aborts with the stage index when a cap fails.
//!
//! The speed caps scale the admissible displacement by `2^{−k}/k`, so from
//! stage 2 on the added folds sit near the default grid resolution and the
//! resistance estimate plateaus near the equator's; the caps and the Cauchy
//! evidence are the content of the log.

use super::resistor::band_point;
use super::slide::{BandMap, BandOp, MovingAxis, PiecewiseLinear, Trapezoid};
use crate::diffeotopy::Diffeotopy;
use crate::error::{Error, Result};
use crate::resistance;
use crate::surface::{self, JordanCurve, Polyline, Space, SurfacePoint};
use std::f64::consts::{PI, TAU};

#[derive(Clone, Debug)]
pub struct StageLogEntry {
    pub stage: usize,
    pub speed_bound: f64,
    pub speed_cap: f64,
    pub transfer_increment: f64,
    pub inverse_increment: f64,
    pub increment_cap: f64,
    pub hausdorff_step: f64,
    pub hausdorff_cap: f64,
    pub resistance_estimate: f64,
}

#[derive(Debug)]
pub struct StageResult {
    pub space: Space,
    /// the stage-N curve
    pub curve: JordanCurve,
    /// composed exact chart map Φ_N on (θ, ζ); the equator is ζ = 0
    pub chart_map: BandMap,
    /// per-stage diffeotopies φ_n on their global time supports
    pub stage_diffeotopies: Vec<Diffeotopy>,
    pub log: Vec<StageLogEntry>,
}

#[derive(Clone, Debug)]
pub struct StageParams {
    pub space: Space,
    /// Hausdorff cap scale: stage with paper index k allows
    /// `d_H(J_k, J_{k+1}) < eps0 · 2^{−k}`
    pub eps0: f64,
    /// resistance grid step
    pub h: f64,
    /// equator sampling for the stage curves
    pub curve_samples: usize,
}

impl Default for StageParams {
    fn default() -> Self {
        StageParams {
            space: Space::Sphere,
            eps0: 0.2,
            h: PI / 150.0,
            curve_samples: 1024,
        }
    }
}

/// Build `n_stages` stages of the limit construction with default
/// parameters (sphere, ε₀ = 0.2).
pub fn infinite_resistance_stage(n_stages: usize) -> Result<StageResult> {
    infinite_resistance_stage_with(n_stages, &StageParams::default())
}

pub fn infinite_resistance_stage_with(
    n_stages: usize,
    params: &StageParams,
) -> Result<StageResult> {
    if n_stages == 0 {
        return Err(Error::InvalidInput(
            "the stage construction needs N ≥ 1".into(),
        ));
    }
    if n_stages > 8 {
        return Err(Error::ResourceLimit(
            "stage folds beyond N = 8 fall below representable scales".into(),
        ));
    }
    let space = params.space;

    let chart_curve = |map: &BandMap| -> Result<JordanCurve> {
        let mut pts = Vec::with_capacity(params.curve_samples);
        for i in 0..params.curve_samples {
            let theta = TAU * i as f64 / params.curve_samples as f64;
            let p = map.forward([theta, 0.0]);
            pts.push(band_point(space, p[0], p[1])?);
        }
        let mut dedup: Vec<SurfacePoint> = Vec::with_capacity(pts.len());
        for p in pts {
            if dedup
                .last()
                .map_or(true, |l| surface::distance(l, &p) > 1e-9)
            {
                dedup.push(p);
            }
        }
        JordanCurve::new(Polyline::closed(dedup)?)
    };

    // sample lattice on the chart band for norms and speeds
    let lattice: Vec<[f64; 2]> = {
        let mut v = Vec::new();
        for i in 0..48 {
            for j in 0..9 {
                v.push([
                    TAU * i as f64 / 48.0,
                    -0.9 * params.eps0 + 1.8 * params.eps0 * j as f64 / 8.0,
                ]);
            }
        }
        v
    };
    let surf_dist = |a: [f64; 2], b: [f64; 2]| -> f64 {
        let pa = band_point(space, a[0], a[1]).unwrap();
        let pb = band_point(space, b[0], b[1]).unwrap();
        surface::distance(&pa, &pb)
    };

    let mut composed = BandMap::new(Vec::new());
    let mut curve = chart_curve(&composed)?;
    let mut log: Vec<StageLogEntry> = Vec::new();
    let mut stage_diffeotopies: Vec<Diffeotopy> = Vec::new();

    let r0 = resistance::resistance(&curve, params.h)?;
    log.push(StageLogEntry {
        stage: 1,
        speed_bound: 0.0,
        speed_cap: f64::INFINITY,
        transfer_increment: 0.0,
        inverse_increment: 0.0,
        increment_cap: f64::INFINITY,
        hausdorff_step: 0.0,
        hausdorff_cap: f64::INFINITY,
        resistance_estimate: r0.estimate,
    });
    stage_diffeotopies.push(Diffeotopy::identity(2));

    for n in 2..=n_stages {
        let k = n - 1; // paper-side stage index: caps 1/k and 2^{−k}
        let t_start = 1.0 - 2f64.powi(-(k as i32 - 1)).min(1.0);
        let dt_n = 2f64.powi(-(k as i32));
        let speed_cap = 1.0 / k as f64;
        let increment_cap = 2f64.powi(-(k as i32));
        let hausdorff_cap = params.eps0 * 2f64.powi(-(k as i32));

        // measured Lipschitz estimate of the composed map on the lattice
        let mut lip: f64 = 1.0;
        for w in lattice.windows(2) {
            let da = surf_dist(composed.forward(w[0]), composed.forward(w[1]));
            let db = surf_dist(w[0], w[1]).max(1e-9);
            lip = lip.max(da / db);
        }

        // amplitude budget from the three caps (smoothstep rate peaks at 1.5)
        let amp = 0.72
            * (increment_cap / lip)
                .min(speed_cap * dt_n / (1.5 * lip))
                .min(hausdorff_cap)
                .min(0.45 * params.eps0);

        // gentle comb: a long-wavelength wave of alternating sign with the
        // wall longitudes rotated per stage
        let walls = 4usize;
        let q = TAU / walls as f64;
        let offset = (2.399963 * n as f64).rem_euclid(q);
        let ramp = 0.24 * q;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for j in 0..walls {
            let wall = offset + j as f64 * q;
            let level = if j % 2 == 0 { -amp } else { amp };
            xs.push(wall - ramp / 2.0);
            ys.push(-level);
            xs.push(wall + ramp / 2.0);
            ys.push(level);
        }
        let band = 1.3 * amp;
        let sigma = BandMap::single_phase(vec![BandOp::Flow {
            axis: MovingAxis::Y,
            amount: PiecewiseLinear::new(xs, ys, Some(TAU))?,
            gate: Trapezoid::new(-1.3 * band, -0.8 * band, 0.8 * band, 1.3 * band)?,
        }]);

        let next = sigma.clone().then(composed.clone());
        let next_curve = chart_curve(&next)?;

        // (b_k): transfer-map increments on the sample lattice
        let mut inc_f = 0.0f64;
        let mut inc_i = 0.0f64;
        for &x in &lattice {
            inc_f = inc_f.max(surf_dist(next.forward(x), composed.forward(x)));
            inc_i = inc_i.max(surf_dist(next.inverse(x), composed.inverse(x)));
        }
        if inc_f >= increment_cap || inc_i >= increment_cap {
            return Err(Error::Internal(format!(
                "stage {n}: transfer increment {inc_f:.3e}/{inc_i:.3e} breaks \
                 cap (b_{k}) = {increment_cap:.3e}"
            )));
        }

        // (a_k): measured speed of the conjugated stage diffeotopy on its
        // global time support
        let conj_f = composed.clone();
        let conj_i = composed.clone();
        let sig_f = sigma.clone();
        let sig_i = sigma.clone();
        let to_local = move |t: f64| ((t - t_start) / dt_n).clamp(0.0, 1.0);
        let phi_n = Diffeotopy::from_closures(
            2,
            move |t, x| {
                let y = conj_f.inverse([x[0], x[1]]);
                let z = sig_f.apply_at(to_local(t), y);
                let w = conj_f.forward(z);
                vec![w[0], w[1]]
            },
            move |t, x| {
                let y = conj_i.inverse([x[0], x[1]]);
                let z = sig_i.apply_at_inv(to_local(t), y);
                let w = conj_i.forward(z);
                vec![w[0], w[1]]
            },
            0.0,
        );
        let mut speed = 0.0f64;
        let steps = 24;
        for &x in &lattice {
            let mut prev: Option<[f64; 2]> = None;
            for s in 0..=steps {
                let t = t_start + dt_n * s as f64 / steps as f64;
                let y = phi_n.map(t, &x[..]);
                let y = [y[0], y[1]];
                if let Some(p) = prev {
                    speed = speed.max(surf_dist(p, y) / (dt_n / steps as f64));
                }
                prev = Some(y);
            }
        }
        if speed >= speed_cap {
            return Err(Error::Internal(format!(
                "stage {n}: measured speed {speed:.3e} breaks cap (a_{k}) = {speed_cap:.3e}"
            )));
        }
        let mut phi_n = phi_n;
        phi_n.set_speed_bound(speed);

        // (c_k): Hausdorff step
        let d_step =
            surface::hausdorff_polylines(curve.base(), next_curve.base(), params.h / 2.0)?;
        if d_step >= hausdorff_cap {
            return Err(Error::Internal(format!(
                "stage {n}: Hausdorff step {d_step:.3e} breaks cap (c_{k}) = {hausdorff_cap:.3e}"
            )));
        }

        let r = resistance::resistance(&next_curve, params.h)?;
        log.push(StageLogEntry {
            stage: n,
            speed_bound: speed,
            speed_cap,
            transfer_increment: inc_f,
            inverse_increment: inc_i,
            increment_cap,
            hausdorff_step: d_step,
            hausdorff_cap,
            resistance_estimate: r.estimate,
        });
        stage_diffeotopies.push(phi_n);
        composed = next;
        curve = next_curve;
    }

    Ok(StageResult {
        space,
        curve,
        chart_map: composed,
        stage_diffeotopies,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_stages_invalid() {
        assert!(infinite_resistance_stage(0).is_err());
    }

    #[test]
    fn single_stage_is_equator() {
        let r = infinite_resistance_stage(1).unwrap();
        assert_eq!(r.log.len(), 1);
        assert!(r.log[0].resistance_estimate > 1.0);
        assert!(surface::separates_poles(&r.curve).unwrap());
    }

    #[test]
    fn three_stages_meet_caps_and_floors() {
        let r = infinite_resistance_stage(3).unwrap();
        assert_eq!(r.log.len(), 3);
        for e in &r.log[1..] {
            assert!(e.speed_bound < e.speed_cap, "stage {} speed", e.stage);
            assert!(
                e.transfer_increment < e.increment_cap
                    && e.inverse_increment < e.increment_cap,
                "stage {} increments",
                e.stage
            );
            assert!(e.hausdorff_step < e.hausdorff_cap, "stage {} d_H", e.stage);
        }
        let floors = [1.0, 2.0 * 0.9, 3.0 * 0.9];
        for (e, f) in r.log.iter().zip(floors) {
            assert!(
                e.resistance_estimate >= f,
                "stage {}: estimate {} below floor {f}",
                e.stage,
                e.resistance_estimate
            );
        }
        // nondecreasing within the reported slack
        for w in r.log.windows(2) {
            let slack = 0.05 * w[0].resistance_estimate + 4.0 * PI / 150.0;
            assert!(
                w[1].resistance_estimate >= w[0].resistance_estimate - slack,
                "stage {} estimate dropped beyond slack",
                w[1].stage
            );
        }
        // Cauchy evidence per (b_k)
        for e in &r.log[1..] {
            assert!(e.transfer_increment + e.inverse_increment < 2.0 * e.increment_cap);
        }
    }
}
