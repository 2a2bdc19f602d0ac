//! Sampled diffeotopies, the diffeotopy/ODE dictionary, bounded-speed
//! reparameterization and transfer-map metrics.
//!
//! A diffeotopy is a time-parameterized family of invertible maps starting
//! at the identity. Two backends: closures (exact constructions, band maps)
//! and displacement grids with multilinear interpolation (JSON interop,
//! field-generated diffeotopies). Inverses are stored or supplied, never
//! recomputed by root finding.

use crate::error::{Error, Result};
use crate::field::{self, FieldKind, SupportBox, TimeField};
use std::sync::Arc;

type MapFn = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// Displacement grids at sample times over a box, with multilinear spatial
/// interpolation and linear interpolation in time.
#[derive(Clone, Debug)]
pub struct GridMaps {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub dims: Vec<usize>,
    pub times: Vec<f64>,
    /// forward displacements per time sample: node-major, then component
    pub forward: Vec<Vec<f64>>,
    /// inverse displacements per time sample
    pub inverse: Vec<Vec<f64>>,
}

impl GridMaps {
    fn node_count(&self) -> usize {
        self.dims.iter().product()
    }

    fn interp(&self, table: &[Vec<f64>], t: f64, x: &[f64]) -> Vec<f64> {
        let m = x.len();
        let nt = self.times.len();
        // locate time interval
        let (ti, tw) = if t <= self.times[0] {
            (0, 0.0)
        } else if t >= self.times[nt - 1] {
            (nt - 2, 1.0)
        } else {
            let i = self
                .times
                .partition_point(|&s| s <= t)
                .min(nt - 1)
                .max(1)
                - 1;
            (i, (t - self.times[i]) / (self.times[i + 1] - self.times[i]))
        };
        let mut base = vec![0usize; m];
        let mut frac = vec![0.0; m];
        for d in 0..m {
            let n = self.dims[d];
            let s = ((x[d] - self.lo[d]) / (self.hi[d] - self.lo[d]) * (n - 1) as f64)
                .clamp(0.0, (n - 1) as f64);
            base[d] = (s.floor() as usize).min(n - 2);
            frac[d] = s - base[d] as f64;
        }
        let mut disp = vec![0.0; m];
        for corner in 0..(1usize << m) {
            let mut w = 1.0;
            let mut offset = 0usize;
            let mut stride = 1usize;
            for d in (0..m).rev() {
                let up = (corner >> d) & 1 == 1;
                w *= if up { frac[d] } else { 1.0 - frac[d] };
                offset += (base[d] + usize::from(up)) * stride;
                stride *= self.dims[d];
            }
            if w == 0.0 {
                continue;
            }
            for k in 0..m {
                let v0 = table[ti][offset * m + k];
                let v1 = table[ti + 1][offset * m + k];
                disp[k] += w * (v0 * (1.0 - tw) + v1 * tw);
            }
        }
        (0..m).map(|d| x[d] + disp[d]).collect()
    }
}

#[derive(Clone)]
enum Backend {
    Closure { fwd: MapFn, inv: MapFn },
    Grid(Box<GridMaps>),
}

/// A time-sampled family of invertible maps with `φ(0) = id`.
#[derive(Clone)]
pub struct Diffeotopy {
    dim: usize,
    backend: Backend,
    times: Vec<f64>,
    speed_bound: f64,
}

impl std::fmt::Debug for Diffeotopy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.backend {
            Backend::Closure { .. } => "closure",
            Backend::Grid(_) => "grid",
        };
        write!(
            f,
            "Diffeotopy(dim={}, backend={kind}, samples={}, speed≤{:.4})",
            self.dim,
            self.times.len(),
            self.speed_bound
        )
    }
}

pub const DEFAULT_TIME_SAMPLES: usize = 64;

fn uniform_times(k: usize) -> Vec<f64> {
    (0..=k).map(|i| i as f64 / k as f64).collect()
}

impl Diffeotopy {
    pub fn from_closures(
        dim: usize,
        fwd: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        inv: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        speed_bound: f64,
    ) -> Self {
        Diffeotopy {
            dim,
            backend: Backend::Closure {
                fwd: Arc::new(fwd),
                inv: Arc::new(inv),
            },
            times: uniform_times(DEFAULT_TIME_SAMPLES),
            speed_bound,
        }
    }

    pub fn from_grids(grids: GridMaps, speed_bound: f64) -> Result<Self> {
        let dim = grids.dims.len();
        if grids.times.len() < 2 || grids.forward.len() != grids.times.len() {
            return Err(Error::InvalidInput(
                "grid diffeotopy needs ≥ 2 time samples".into(),
            ));
        }
        let n = grids.node_count() * dim;
        if grids
            .forward
            .iter()
            .chain(grids.inverse.iter())
            .any(|t| t.len() != n)
        {
            return Err(Error::InvalidInput("grid table size mismatch".into()));
        }
        let times = grids.times.clone();
        Ok(Diffeotopy {
            dim,
            backend: Backend::Grid(Box::new(grids)),
            times,
            speed_bound,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Diffeotopy::from_closures(dim, |_, x| x.to_vec(), |_, x| x.to_vec(), 0.0)
    }

    /// `φ(t, x) = x + t·v`.
    pub fn translation(v: Vec<f64>) -> Self {
        let speed = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let v2 = v.clone();
        Diffeotopy::from_closures(
            v.len(),
            move |t, x| x.iter().zip(&v).map(|(xi, vi)| xi + t * vi).collect(),
            move |t, x| x.iter().zip(&v2).map(|(xi, vi)| xi - t * vi).collect(),
            speed,
        )
    }

    /// Planar rotation by angle `omega·t` about the origin.
    pub fn rotation2d(omega: f64, radius_bound: f64) -> Self {
        let rot = move |ang: f64, x: &[f64]| -> Vec<f64> {
            let (s, c) = ang.sin_cos();
            vec![c * x[0] - s * x[1], s * x[0] + c * x[1]]
        };
        Diffeotopy {
            dim: 2,
            backend: Backend::Closure {
                fwd: Arc::new(move |t, x| rot(omega * t, x)),
                inv: Arc::new(move |t, x| rot(-omega * t, x)),
            },
            times: uniform_times(DEFAULT_TIME_SAMPLES),
            speed_bound: omega.abs() * radius_bound,
        }
    }

    /// Radial scaling of the plane toward factor `s1` at t = 1, identity
    /// outside `r_outer` (piecewise-linear radial profile).
    pub fn radial_scale2d(s1: f64, r_inner: f64, r_outer: f64) -> Result<Self> {
        if s1 <= 0.0 || r_inner <= 0.0 || r_outer <= r_inner * s1.max(1.0) {
            return Err(Error::InvalidInput("bad radial scale parameters".into()));
        }
        // radius map: r ↦ λ(t)·r for r ≤ r_inner·min(1, 1/λ), linear ramp to
        // identity at r_outer; invertible since monotone in r for λ < r_outer/r_inner
        let ramp = move |lam: f64, r: f64| -> f64 {
            let r_in = r_inner;
            if r <= r_in {
                lam * r
            } else if r >= r_outer {
                r
            } else {
                let u = (r - r_in) / (r_outer - r_in);
                lam * r_in * (1.0 - u) + r_outer * u
            }
        };
        let ramp_inv = move |lam: f64, rr: f64| -> f64 {
            let r_in = r_inner;
            if rr <= lam * r_in {
                rr / lam
            } else if rr >= r_outer {
                rr
            } else {
                // invert the linear interpolation
                let a = lam * r_in;
                let u = (rr - a) / (r_outer - a);
                r_in + u * (r_outer - r_in)
            }
        };
        let apply = move |f: &dyn Fn(f64, f64) -> f64, lam: f64, x: &[f64]| -> Vec<f64> {
            let r = x[0].hypot(x[1]);
            if r < 1e-300 {
                return x.to_vec();
            }
            let rr = f(lam, r);
            vec![x[0] * rr / r, x[1] * rr / r]
        };
        let speed = (s1 - 1.0).abs() * r_inner.max(1.0) * 1.5;
        Ok(Diffeotopy {
            dim: 2,
            backend: Backend::Closure {
                fwd: Arc::new(move |t, x| {
                    let lam = 1.0 + t * (s1 - 1.0);
                    apply(&ramp, lam, x)
                }),
                inv: Arc::new(move |t, x| {
                    let lam = 1.0 + t * (s1 - 1.0);
                    apply(&ramp_inv, lam, x)
                }),
            },
            times: uniform_times(DEFAULT_TIME_SAMPLES),
            speed_bound: speed,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn speed_bound(&self) -> f64 {
        self.speed_bound
    }

    pub fn set_speed_bound(&mut self, m: f64) {
        self.speed_bound = m;
    }

    pub fn map(&self, t: f64, x: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Closure { fwd, .. } => fwd(t, x),
            Backend::Grid(g) => g.interp(&g.forward, t, x),
        }
    }

    pub fn unmap(&self, t: f64, x: &[f64]) -> Vec<f64> {
        match &self.backend {
            Backend::Closure { inv, .. } => inv(t, x),
            Backend::Grid(g) => {
                // stored inverse seeds a Newton refinement against the
                // interpolated forward, so the pair is mutually inverse well
                // below the 1e−6 invariant regardless of grid resolution
                let mut guess = g.interp(&g.inverse, t, x);
                let m = x.len();
                let step: f64 = (0..m)
                    .map(|d| (g.hi[d] - g.lo[d]) / (g.dims[d] - 1) as f64)
                    .fold(f64::INFINITY, f64::min)
                    * 1e-3;
                for _ in 0..12 {
                    let fx = g.interp(&g.forward, t, &guess);
                    let res: Vec<f64> = (0..m).map(|d| fx[d] - x[d]).collect();
                    let err: f64 = res.iter().map(|r| r * r).sum::<f64>().sqrt();
                    if err < 1e-10 {
                        break;
                    }
                    // finite-difference Jacobian of the interpolated forward
                    let mut jac = vec![0.0; m * m];
                    for c in 0..m {
                        let mut xp = guess.clone();
                        xp[c] += step;
                        let fp = g.interp(&g.forward, t, &xp);
                        for r in 0..m {
                            jac[r * m + c] = (fp[r] - fx[r]) / step;
                        }
                    }
                    if let Some(delta) = solve_small(&mut jac, &res, m) {
                        let mut moved = 0.0;
                        for d in 0..m {
                            guess[d] -= delta[d];
                            moved += delta[d].abs();
                        }
                        if moved < 1e-14 {
                            break;
                        }
                    } else {
                        break;
                    }
                }
                guess
            }
        }
    }

    /// Transfer map: the ultimate effect of the diffeotopy (its time-one
    /// map).
    pub fn transfer(&self, provenance: impl Into<String>) -> TransferMap {
        TransferMap {
            diffeotopy: self.clone(),
            time: 1.0,
            provenance: provenance.into(),
        }
    }

    /// Measured maximum speed: centered finite differences in t over a
    /// sample lattice (one-sided at the ends).
    pub fn measure_speed(&self, lo: &[f64], hi: &[f64], n_space: usize, n_time: usize) -> f64 {
        let dt = 1.0 / n_time as f64;
        let mut worst = 0.0f64;
        for_each_lattice_point(lo, hi, n_space, &mut |x| {
            for k in 0..=n_time {
                let t = k as f64 * dt;
                let (t0, t1) = if k == 0 {
                    (t, t + dt)
                } else if k == n_time {
                    (t - dt, t)
                } else {
                    (t - dt, t + dt)
                };
                let a = self.map(t0, x);
                let b = self.map(t1, x);
                let d2: f64 = a.iter().zip(&b).map(|(p, q)| (q - p) * (q - p)).sum();
                worst = worst.max(d2.sqrt() / (t1 - t0));
            }
        });
        worst
    }

    /// Sampled invariants: `φ(0) = id` within 1e−9 and forward∘inverse = id
    /// within 1e−6 at every sample time.
    pub fn validate(&self, lo: &[f64], hi: &[f64], n_space: usize) -> Result<()> {
        let mut worst_id = 0.0f64;
        let mut worst_inv = 0.0f64;
        for_each_lattice_point(lo, hi, n_space, &mut |x| {
            let y0 = self.map(0.0, x);
            worst_id = worst_id.max(dist(x, &y0));
            for &t in &self.times {
                let y = self.map(t, x);
                let back = self.unmap(t, &y);
                worst_inv = worst_inv.max(dist(x, &back));
            }
        });
        if worst_id > 1e-9 {
            return Err(Error::NotADiffeotopy(format!(
                "φ(0) deviates from the identity by {worst_id:.3e}"
            )));
        }
        if worst_inv > 1e-6 {
            return Err(Error::NotADiffeotopy(format!(
                "forward∘inverse deviates from the identity by {worst_inv:.3e}"
            )));
        }
        Ok(())
    }

    /// Sample onto displacement grids (for serialization).
    pub fn sample_grids(
        &self,
        lo: Vec<f64>,
        hi: Vec<f64>,
        dims: Vec<usize>,
        n_times: usize,
    ) -> GridMaps {
        let times = uniform_times(n_times);
        let m = self.dim;
        let mut forward = Vec::with_capacity(times.len());
        let mut inverse = Vec::with_capacity(times.len());
        for &t in &times {
            let mut fw = Vec::new();
            let mut iv = Vec::new();
            for_each_grid_node(&lo, &hi, &dims, &mut |x| {
                let y = self.map(t, x);
                let z = self.unmap(t, x);
                for d in 0..m {
                    fw.push(y[d] - x[d]);
                }
                for d in 0..m {
                    iv.push(z[d] - x[d]);
                }
            });
            forward.push(fw);
            inverse.push(iv);
        }
        GridMaps {
            lo,
            hi,
            dims,
            times,
            forward,
            inverse,
        }
    }
}

/// Gaussian elimination with partial pivoting for tiny systems.
fn solve_small(a: &mut [f64], b: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut x = b.to_vec();
    for col in 0..m {
        let mut piv = col;
        for r in (col + 1)..m {
            if a[r * m + col].abs() > a[piv * m + col].abs() {
                piv = r;
            }
        }
        if a[piv * m + col].abs() < 1e-14 {
            return None;
        }
        if piv != col {
            for c in 0..m {
                a.swap(col * m + c, piv * m + c);
            }
            x.swap(col, piv);
        }
        let d = a[col * m + col];
        for r in (col + 1)..m {
            let f = a[r * m + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..m {
                a[r * m + c] -= f * a[col * m + c];
            }
            x[r] -= f * x[col];
        }
    }
    for col in (0..m).rev() {
        x[col] /= a[col * m + col];
        for r in 0..col {
            x[r] -= a[r * m + col] * x[col];
        }
    }
    Some(x)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (q - p) * (q - p))
        .sum::<f64>()
        .sqrt()
}

fn for_each_lattice_point(lo: &[f64], hi: &[f64], n: usize, f: &mut impl FnMut(&[f64])) {
    let m = lo.len();
    let mut idx = vec![0usize; m];
    let mut x = vec![0.0; m];
    loop {
        for d in 0..m {
            x[d] = lo[d] + (hi[d] - lo[d]) * idx[d] as f64 / n as f64;
        }
        f(&x);
        let mut d = 0;
        loop {
            if d == m {
                return;
            }
            idx[d] += 1;
            if idx[d] <= n {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn for_each_grid_node(lo: &[f64], hi: &[f64], dims: &[usize], f: &mut impl FnMut(&[f64])) {
    let m = lo.len();
    let mut idx = vec![0usize; m];
    let mut x = vec![0.0; m];
    // row-major with the last axis fastest, matching GridMaps::interp
    loop {
        for d in 0..m {
            x[d] = lo[d] + (hi[d] - lo[d]) * idx[d] as f64 / (dims[d] - 1) as f64;
        }
        f(&x);
        let mut d = m;
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < dims[d] {
                break;
            }
            idx[d] = 0;
            if d == 0 {
                return;
            }
        }
    }
}

/// The terminal map of a diffeotopy together with its provenance.
#[derive(Clone, Debug)]
pub struct TransferMap {
    diffeotopy: Diffeotopy,
    time: f64,
    pub provenance: String,
}

impl TransferMap {
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.diffeotopy.map(self.time, x)
    }

    pub fn inverse(&self, x: &[f64]) -> Vec<f64> {
        self.diffeotopy.unmap(self.time, x)
    }

    pub fn dim(&self) -> usize {
        self.diffeotopy.dim()
    }

    /// Inverse-consistency error on a sample lattice.
    pub fn inverse_error(&self, lo: &[f64], hi: &[f64], n: usize) -> f64 {
        let mut worst = 0.0f64;
        for_each_lattice_point(lo, hi, n, &mut |x| {
            let y = self.forward(x);
            worst = worst.max(dist(x, &self.inverse(&y)));
        });
        worst
    }
}

/// `D(F, G) = ‖F − G‖ + ‖F⁻¹ − G⁻¹‖`, sup-norms over a fixed sample lattice.
pub fn d_metric(f: &TransferMap, g: &TransferMap, lo: &[f64], hi: &[f64], n: usize) -> Result<f64> {
    if f.dim() != g.dim() || lo.len() != f.dim() || hi.len() != f.dim() {
        return Err(Error::InvalidInput(
            "d_metric needs transfer maps on one space and a matching sample box".into(),
        ));
    }
    let mut sup_f = 0.0f64;
    let mut sup_i = 0.0f64;
    for_each_lattice_point(lo, hi, n, &mut |x| {
        sup_f = sup_f.max(dist(&f.forward(x), &g.forward(x)));
        sup_i = sup_i.max(dist(&f.inverse(x), &g.inverse(x)));
    });
    Ok(sup_f + sup_i)
}

/// The field generated by a diffeotopy: `f(t, x) = φ′(t)(φ(t)⁻¹(x))`,
/// with φ′ by centered finite differences in t.
pub fn field_from_diffeotopy(phi: &Diffeotopy, support: SupportBox) -> Result<TimeField> {
    let dim = phi.dim();
    if support.dim() != dim {
        return Err(Error::InvalidInput("support dimension mismatch".into()));
    }
    let phi = phi.clone();
    let t0 = support.t0;
    let t1 = support.t1;
    let dt = (t1 - t0) / 512.0;
    let eval = move |t: f64, x: &[f64], out: &mut [f64]| {
        // clamp the stencil inside the window; the local time is s ∈ [0,1]
        let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let hs = dt / (t1 - t0);
        let (s0, s1) = if s - hs < 0.0 {
            (s, s + hs)
        } else if s + hs > 1.0 {
            (s - hs, s)
        } else {
            (s - hs, s + hs)
        };
        let y0 = phi.unmap(s, x);
        let a = phi.map(s0, &y0);
        let b = phi.map(s1, &y0);
        for d in 0..out.len() {
            out[d] = (b[d] - a[d]) / ((s1 - s0) * (t1 - t0));
        }
    };
    TimeField::new(dim, support, FieldKind::Dynamic(Arc::new(eval)))
}

/// Parameters for integrating a field into a diffeotopy.
#[derive(Clone, Debug)]
pub struct FlowParams {
    pub dt: f64,
    pub grid_dims: Vec<usize>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub time_samples: usize,
    /// ensemble spread threshold (× dt) above which the field is declared
    /// non-uniquely solvable
    pub uniqueness_factor: f64,
    pub seed: u64,
}

impl FlowParams {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let dim = lo.len();
        FlowParams {
            dt: 1e-3,
            grid_dims: vec![33; dim],
            lo,
            hi,
            time_samples: 16,
            uniqueness_factor: 10.0,
            seed: 7,
        }
    }
}

/// The diffeotopy generated by a field: `φ(t, x₀) = x(t, 0, x₀)`.
///
/// Requires sampled Lipschitz behavior; detected non-uniqueness (ensemble
/// spread from a single start exceeding `uniqueness_factor · dt`) fails with
/// `NotADiffeotopy`.
pub fn diffeotopy_from_field(f: &TimeField, p: &FlowParams) -> Result<Diffeotopy> {
    use rand::Rng;
    use rand::SeedableRng;
    let dim = f.dim();
    if p.lo.len() != dim || p.grid_dims.len() != dim {
        return Err(Error::InvalidInput("flow parameter dimensions".into()));
    }
    let t0 = f.support().t0;
    let t1 = f.support().t1;
    let bound = 1e6;

    // non-uniqueness probe: ε-selection ensembles from a few starts must
    // stay together. The perturbation must dominate the scheme's own escape
    // from non-Lipschitz points, so ε is macroscopic and the admissible
    // spread scales with it (a Lipschitz field spreads by ≈ ε·e^Lip only).
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(p.seed);
    let eps = 1e-2;
    let spread_cap = p.uniqueness_factor * p.dt + 12.0 * eps;
    let mut probes = vec![vec![0.0; dim]];
    for _ in 0..4 {
        probes.push(
            (0..dim)
                .map(|d| rng.gen_range(p.lo[d]..=p.hi[d]))
                .collect(),
        );
    }
    for start in &probes {
        let mut endpoints = Vec::new();
        for _ in 0..8 {
            let u: Vec<f64> = (0..dim)
                .map(|_| rng.gen_range(-eps..=eps))
                .collect();
            let end = field::integrate(
                |t, y, out| {
                    f.eval(t, y, out);
                    for d in 0..dim {
                        out[d] += u[d];
                    }
                },
                t0,
                t1,
                start,
                p.dt,
                bound,
                |_, _| {},
            )?;
            endpoints.push(end);
        }
        let mut spread = 0.0f64;
        for a in &endpoints {
            for b in &endpoints {
                spread = spread.max(dist(a, b));
            }
        }
        if spread > spread_cap {
            return Err(Error::NotADiffeotopy(format!(
                "ensemble spread {spread:.3e} from {start:?} exceeds {spread_cap:.3e}"
            )));
        }
    }

    // inflate the sampled box so the inverse table covers the forward
    // image of the requested domain
    let mut reach = 0.0f64;
    for_each_lattice_point(&p.lo, &p.hi, 4, &mut |x| {
        if let Ok(end) = field::integrate(
            |t, y, out| f.eval(t, y, out),
            t0,
            t1,
            x,
            p.dt * 4.0,
            bound,
            |_, _| {},
        ) {
            reach = reach.max(dist(x, &end));
        }
    });
    let pad = 1.25 * reach + 1e-6;
    let (mut lo, mut hi, mut grid_dims) = (p.lo.clone(), p.hi.clone(), p.grid_dims.clone());
    for d in 0..dim {
        let step = (hi[d] - lo[d]) / (grid_dims[d] - 1) as f64;
        let extra = (pad / step).ceil() as usize;
        lo[d] -= extra as f64 * step;
        hi[d] += extra as f64 * step;
        grid_dims[d] += 2 * extra;
    }

    // integrate the grid of initial points forward, recording snapshots
    let times = uniform_times(p.time_samples);
    let mut nodes = Vec::new();
    for_each_grid_node(&lo, &hi, &grid_dims, &mut |x| nodes.push(x.to_vec()));
    let mut forward: Vec<Vec<f64>> = vec![Vec::with_capacity(nodes.len() * dim); times.len()];
    for x0 in &nodes {
        let mut snapshots = vec![x0.clone(); times.len()];
        let mut next = 1usize;
        let span = t1 - t0;
        field::integrate(
            |t, y, out| f.eval(t, y, out),
            t0,
            t1,
            x0,
            p.dt,
            bound,
            |t, y| {
                let s = (t - t0) / span;
                while next < times.len() && s + 1e-12 >= times[next] {
                    snapshots[next] = y.to_vec();
                    next += 1;
                }
            },
        )?;
        for (k, snap) in snapshots.iter().enumerate() {
            forward[k].extend_from_slice(snap);
        }
    }
    // inverse snapshots by integrating backward from each grid node
    let mut inverse: Vec<Vec<f64>> = vec![Vec::with_capacity(nodes.len() * dim); times.len()];
    for (k, &s) in times.iter().enumerate() {
        let tk = t0 + s * (t1 - t0);
        for x in &nodes {
            if k == 0 {
                inverse[0].extend_from_slice(x);
                continue;
            }
            // integrate y' = -f(tk - τ, y) for τ ∈ [0, tk - t0]
            let end = field::integrate(
                |tau, y, out| {
                    f.eval(tk - tau, y, out);
                    for v in out.iter_mut() {
                        *v = -*v;
                    }
                },
                0.0,
                tk - t0,
                x,
                p.dt,
                bound,
                |_, _| {},
            )?;
            inverse[k].extend_from_slice(&end);
        }
    }
    // displacement form
    for k in 0..times.len() {
        for (i, x0) in nodes.iter().enumerate() {
            for d in 0..dim {
                forward[k][i * dim + d] -= x0[d];
                inverse[k][i * dim + d] -= x0[d];
            }
        }
    }
    let grids = GridMaps {
        lo,
        hi,
        dims: grid_dims,
        times,
        forward,
        inverse,
    };
    let mut max_f = 0.0f64;
    let mut sample = vec![0.0; dim];
    for_each_lattice_point(&p.lo, &p.hi, 8, &mut |x| {
        f.eval(0.5 * (t0 + t1), x, &mut sample);
        max_f = max_f.max(sample.iter().map(|v| v.abs()).fold(0.0, f64::max));
    });
    Diffeotopy::from_grids(grids, max_f)
}

/// Reparameterize time as `τ(t) = t²(2−t)²` so the generating field's speed
/// vanishes at both ends; the transfer map is unchanged.
pub fn reparameterize_bounded(phi: &Diffeotopy) -> Diffeotopy {
    let tau = |t: f64| -> f64 {
        let t = t.clamp(0.0, 1.0);
        t * t * (2.0 - t) * (2.0 - t)
    };
    let inner_f = phi.clone();
    let inner_i = phi.clone();
    let speed = phi.speed_bound() * 1.5; // max τ′ = 1.5 at t = 1 − 1/√2 ≈ 0.29
    Diffeotopy {
        dim: phi.dim(),
        backend: Backend::Closure {
            fwd: Arc::new(move |t, x| inner_f.map(tau(t), x)),
            inv: Arc::new(move |t, x| inner_i.unmap(tau(t), x)),
        },
        times: phi.times.clone(),
        speed_bound: speed,
    }
}

/// `τ(t) = t²(2−t)²` (exposed for tests).
pub fn tau_reparam(t: f64) -> f64 {
    t * t * (2.0 - t) * (2.0 - t)
}

/// Realize the diffeotopy image of a funnel section: given a field whose
/// section at t = 1 is A and a bounded-speed diffeotopy carrying A onto B,
/// the patched field `h(t, x) = f(t, x) + g(t − 1, x)` has section B at
/// t = 2, where g generates the reparameterized diffeotopy.
pub fn funnel_from_diffeotopy(f: &TimeField, phi: &Diffeotopy) -> Result<TimeField> {
    if f.dim() != phi.dim() {
        return Err(Error::InvalidInput(
            "field and diffeotopy dimensions differ".into(),
        ));
    }
    if f.support().t0 < 0.0 || f.support().t1 > 1.0 + 1e-12 {
        return Err(Error::InvalidInput(
            "first field's support must lie in [0, 1]".into(),
        ));
    }
    let psi = reparameterize_bounded(phi);
    let sup = f.support();
    let g_support = SupportBox::new(0.0, 1.0, sup.lo.clone(), sup.hi.clone(), sup.margin)?;
    let g = field_from_diffeotopy(&psi, g_support)?;
    let h_support = SupportBox::new(0.0, 2.0, sup.lo.clone(), sup.hi.clone(), sup.margin)?;
    TimeField::new(
        f.dim(),
        h_support,
        FieldKind::Patched {
            first: Box::new(f.clone()),
            second: Box::new(g),
            shift: 1.0,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_field_is_zero() {
        let phi = Diffeotopy::identity(2);
        let f = field_from_diffeotopy(
            &phi,
            SupportBox::symmetric(0.0, 1.0, 2, 4.0, 0.5).unwrap(),
        )
        .unwrap();
        let v = f.eval_vec(0.5, &[0.3, -0.2]);
        assert!(v[0].abs() < 1e-9 && v[1].abs() < 1e-9);
    }

    #[test]
    fn translation_field_is_constant() {
        let phi = Diffeotopy::translation(vec![0.7, -0.3]);
        let f = field_from_diffeotopy(
            &phi,
            SupportBox::symmetric(0.0, 1.0, 2, 6.0, 0.5).unwrap(),
        )
        .unwrap();
        let v = f.eval_vec(0.4, &[0.5, 0.5]);
        assert_relative_eq!(v[0], 0.7, epsilon = 1e-6);
        assert_relative_eq!(v[1], -0.3, epsilon = 1e-6);
    }

    #[test]
    fn rotation_field_is_angular_generator() {
        // φ = rotation by t: f(t, (x, y)) = (−y, x)
        let phi = Diffeotopy::rotation2d(1.0, 2.0);
        let f = field_from_diffeotopy(
            &phi,
            SupportBox::symmetric(0.0, 1.0, 2, 4.0, 0.5).unwrap(),
        )
        .unwrap();
        for (x, y) in [(0.5, 0.0), (0.3, 0.4), (-0.6, 0.2)] {
            let v = f.eval_vec(0.37, &[x, y]);
            assert_relative_eq!(v[0], -y, epsilon = 1e-6);
            assert_relative_eq!(v[1], x, epsilon = 1e-6);
        }
    }

    #[test]
    fn round_trip_field_to_diffeotopy() {
        // rotation generator integrates back to the rotation family
        let omega = 1.0;
        let phi0 = Diffeotopy::rotation2d(omega, 2.0);
        let f = field_from_diffeotopy(
            &phi0,
            SupportBox::symmetric(0.0, 1.0, 2, 4.0, 0.5).unwrap(),
        )
        .unwrap();
        let p = FlowParams::new(vec![-1.0, -1.0], vec![1.0, 1.0]);
        let phi = diffeotopy_from_field(&f, &p).unwrap();
        let y = phi.map(1.0, &[0.5, 0.0]);
        assert_relative_eq!(y[0], omega.cos() * 0.5, epsilon = 1e-4);
        assert_relative_eq!(y[1], omega.sin() * 0.5, epsilon = 1e-4);
        phi.validate(&[-0.8, -0.8], &[0.8, 0.8], 6).unwrap();
    }

    #[test]
    fn non_unique_field_detected() {
        let f = TimeField::new(
            1,
            SupportBox::symmetric(0.0, 1.0, 1, 9.0, 2.0).unwrap(),
            FieldKind::AbsPow {
                axis: 0,
                c: 2.0,
                p: 0.5,
                origin: 0.0,
            },
        )
        .unwrap();
        let p = FlowParams::new(vec![-1.0], vec![1.0]);
        match diffeotopy_from_field(&f, &p) {
            Err(Error::NotADiffeotopy(_)) => {}
            other => panic!("expected NotADiffeotopy, got {other:?}"),
        }
    }

    #[test]
    fn tau_endpoints_and_slope() {
        assert_eq!(tau_reparam(0.0), 0.0);
        assert_eq!(tau_reparam(1.0), 1.0);
        // τ′(1 − s) = O(s): measured slope near t = 1 is tiny
        let s = 1e-3;
        let slope = (tau_reparam(1.0) - tau_reparam(1.0 - s)) / s;
        assert!(slope <= 1e-2, "τ slope near 1 is {slope}");
    }

    #[test]
    fn reparameterized_speed_decays_at_the_end() {
        let phi = Diffeotopy::translation(vec![1.0, 0.0]);
        let psi = reparameterize_bounded(&phi);
        // measured |ψ′| at t = 1 − 1e−3 ≤ 1e−2 · M
        let t = 1.0 - 1e-3;
        let d = 1e-4;
        let a = psi.map(t - d, &[0.0, 0.0]);
        let b = psi.map(t + d, &[0.0, 0.0]);
        let speed = ((b[0] - a[0]).hypot(b[1] - a[1])) / (2.0 * d);
        assert!(speed <= 1e-2 * 1.0, "speed {speed} at t → 1");
        // transfer map unchanged
        let y = psi.map(1.0, &[0.3, 0.4]);
        assert_relative_eq!(y[0], 1.3, epsilon = 1e-12);
    }

    #[test]
    fn d_metric_translation_is_twice_norm() {
        let f = Diffeotopy::identity(2).transfer("id");
        let g = Diffeotopy::translation(vec![0.3, 0.4]).transfer("trans");
        let d = d_metric(&f, &g, &[-1.0, -1.0], &[1.0, 1.0], 4).unwrap();
        assert_relative_eq!(d, 1.0, epsilon = 1e-12); // |v| + |−v| = 2·0.5
    }

    #[test]
    fn d_metric_symmetric_and_zero_on_equal() {
        let f = Diffeotopy::rotation2d(0.7, 2.0).transfer("rot");
        let g = Diffeotopy::translation(vec![0.1, -0.2]).transfer("trans");
        let lo = [-1.0, -1.0];
        let hi = [1.0, 1.0];
        let ab = d_metric(&f, &g, &lo, &hi, 5).unwrap();
        let ba = d_metric(&g, &f, &lo, &hi, 5).unwrap();
        assert_relative_eq!(ab, ba, epsilon = 1e-12);
        assert_eq!(d_metric(&f, &f, &lo, &hi, 5).unwrap(), 0.0);
    }

    #[test]
    fn grid_backend_round_trips() {
        let phi = Diffeotopy::translation(vec![0.25, 0.0]);
        let grids = phi.sample_grids(vec![-1.0, -1.0], vec![1.0, 1.0], vec![9, 9], 8);
        let g = Diffeotopy::from_grids(grids, 0.25).unwrap();
        let y = g.map(0.5, &[0.1, 0.2]);
        assert_relative_eq!(y[0], 0.225, epsilon = 1e-9);
        g.validate(&[-0.5, -0.5], &[0.5, 0.5], 4).unwrap();
    }
}
