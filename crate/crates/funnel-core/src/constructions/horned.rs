//! Alexander horned-sphere stages as triangulated surfaces.
//!
//! Stage 0 is a round sphere; stage 1 bends it into a banana whose polar
//! caps become parallel discs of diameter 1 at distance 1. Each later stage
//! grows two interlocking horn pairs out of every facing cap pair: the horn
//! tips are new parallel discs with spatial dimensions reduced by 1/4,
//! while the stage time interval is reduced by 1/2, so measured stage
//! speeds decay geometrically. Stages are built by copying and scaling the
//! stage-1 template through a joint tree.

use crate::error::{Error, Result};

pub const MAX_HORNED_STAGE: usize = 6;

#[derive(Clone, Debug, Default)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[u32; 3]>,
}

/// One stage of the construction: the final surface plus the time-sampled
/// morph that grew it from the previous stage's shape.
#[derive(Clone, Debug)]
pub struct HornedStage {
    pub stage: usize,
    pub mesh: TriMesh,
    /// vertex snapshots at `times` (shared face table); the last snapshot
    /// is the final mesh
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<[f64; 3]>>,
    /// spatial scale (1/4)ⁿ and time-interval length (1/2)ⁿ
    pub spatial_scale: f64,
    pub time_len: f64,
    /// measured max vertex displacement rate over the stage interval
    pub max_speed: f64,
    /// number of facing cap pairs (2^{n−1} for n ≥ 1)
    pub joint_count: usize,
}

// ---- small vector helpers ----

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn scale(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}
fn lerp3(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    add(scale(a, 1.0 - t), scale(b, t))
}
fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}
fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}
fn normalize(a: [f64; 3]) -> [f64; 3] {
    scale(a, 1.0 / norm(a))
}

const RING_SEGS: usize = 16;
const SEAM_PTS: usize = RING_SEGS / 2 - 1; // keeps child rings at RING_SEGS
/// how far horn tips dive past their cap (in joint scale); > 0.5 links the
/// partner ring
const DIVE: f64 = 0.58;
/// banana body arc parameters (in joint scale)
const ARC_SMALL: f64 = 1.3;
/// round-sphere radius matched to the banana for the stage-1 morph
const SPHERE_R: f64 = 0.8;

/// A tube cross-section: circle of `radius` around `center` in the plane
/// spanned by (`eu`, `ev`).
#[derive(Clone, Copy, Debug)]
struct RingDesc {
    center: [f64; 3],
    eu: [f64; 3],
    ev: [f64; 3],
    radius: f64,
}

impl RingDesc {
    fn point(&self, k: usize, n: usize) -> [f64; 3] {
        let a = std::f64::consts::TAU * k as f64 / n as f64;
        add(
            self.center,
            add(
                scale(self.eu, self.radius * a.cos()),
                scale(self.ev, self.radius * a.sin()),
            ),
        )
    }
}

/// The banana body path as arc segments (length, curvature), unbent by
/// scaling every curvature with the morph parameter. Unit-speed tangents
/// never degenerate, so the intermediate tubes stay embedded.
#[derive(Clone, Debug)]
struct BodyPath {
    /// ring arclength stations
    stations: Vec<f64>,
    /// (segment length, curvature) pieces of the fully bent path
    pieces: Vec<(f64, f64)>,
    total: f64,
}

impl BodyPath {
    /// cumulative turning angle of the t-scaled path at arclength u
    fn turning(&self, u: f64, t: f64) -> f64 {
        let mut s = 0.0;
        let mut theta = 0.0f64;
        for &(len, kappa) in &self.pieces {
            let du = (u - s).clamp(0.0, len);
            theta += t * kappa * du;
            s += len;
            if u <= s {
                break;
            }
        }
        theta
    }

    /// ring descriptor at station index k for morph parameter t, anchored
    /// at the mid-arclength point of the fully bent path
    fn ring_at(&self, k: usize, t: f64) -> RingDesc {
        let anchor_s = self.total / 2.0;
        let anchor_pos = {
            // the bent (t = 1) path midpoint
            self.integrate(anchor_s, 1.0)
        };
        let target = self.stations[k];
        let pos = {
            let p_rel = self.integrate(target, t);
            let p_anchor_rel = self.integrate(anchor_s, t);
            add(anchor_pos, sub(p_rel, p_anchor_rel))
        };
        let theta = self.turning(target, t);
        let tangent = [theta.sin(), 0.0, theta.cos()];
        let ev = [0.0, 1.0, 0.0];
        let eu = normalize(cross(tangent, ev));
        RingDesc {
            center: pos,
            eu,
            ev,
            radius: 0.5,
        }
    }

    /// position along the t-scaled path from its start (start tangent +z,
    /// start position = the bent path's start); exact piecewise-arc
    /// integrals
    fn integrate(&self, u: f64, t: f64) -> [f64; 3] {
        let mut pos = [0.0, 0.0, 0.5];
        let mut s = 0.0;
        let mut theta = 0.0f64;
        for &(len, kappa) in &self.pieces {
            if u <= s {
                break;
            }
            let du = (u - s).min(len);
            let k = t * kappa;
            if k.abs() < 1e-12 {
                pos = add(pos, scale([theta.sin(), 0.0, theta.cos()], du));
            } else {
                let theta1 = theta + k * du;
                pos[0] += (theta.cos() - theta1.cos()) / k;
                pos[2] += (theta1.sin() - theta.sin()) / k;
                theta = theta1;
            }
            s += len;
        }
        pos
    }
}

/// How a vertex moves during the stage morph.
#[derive(Clone, Debug)]
enum Anim {
    Fixed,
    /// linear from a start position to the final one
    Lerp([f64; 3]),
    /// vertex `seg` of the unbending body ring `ring`
    Body { ring: usize, seg: usize },
    /// ring vertex of a growing horn: the tube extrudes along its own final
    /// path (partial tubes stay inside the final tube's envelope, which is
    /// clear of everything else)
    Grow { horn: usize, t: f64, seg: usize },
    /// centroid of other vertices (fan-cap centers follow their ring)
    Mean(Vec<u32>),
}

/// Tube radius along a horn: base disc s/8, slim shaft, fat tip disc s/8.
fn horn_radius(s: f64, t: f64) -> f64 {
    let slim = s / 28.0;
    let fat = s / 8.0;
    if t < 0.3 {
        fat + (slim - fat) * (t / 0.3)
    } else if t < 0.8 {
        slim
    } else {
        slim + (fat - slim) * ((t - 0.8) / 0.2)
    }
}

/// Ring descriptor at parameter `t` along a horn.
fn horn_ring(h: &HornData, t: f64) -> RingDesc {
    let p = bezier(h.ctrl, t);
    let tangent = bezier_tangent(h.ctrl, t);
    let ev2 = normalize(cross(tangent, h.ev_ref));
    let eu2 = normalize(cross(ev2, tangent));
    RingDesc {
        center: p,
        eu: eu2,
        ev: ev2,
        radius: horn_radius(h.scale, t),
    }
}

/// Shared geometry of one growing horn (for extrusion-style morphs).
#[derive(Clone, Debug)]
struct HornData {
    ctrl: [[f64; 3]; 4],
    ev_ref: [f64; 3],
    scale: f64,
}

struct Builder {
    mesh: TriMesh,
    anim: Vec<Anim>,
    /// banana body ring descriptors and the unbendable path behind them
    body: Vec<RingDesc>,
    path: BodyPath,
    horns: Vec<HornData>,
}

impl Builder {
    fn push(&mut self, p: [f64; 3], anim: Anim) -> u32 {
        self.mesh.vertices.push(p);
        self.anim.push(anim);
        (self.mesh.vertices.len() - 1) as u32
    }

    fn tri(&mut self, a: u32, b: u32, c: u32) {
        self.mesh.faces.push([a, b, c]);
    }

    fn stitch(&mut self, a: &[u32], b: &[u32]) {
        let n = a.len();
        debug_assert_eq!(n, b.len());
        for i in 0..n {
            let j = (i + 1) % n;
            self.tri(a[i], a[j], b[i]);
            self.tri(b[i], a[j], b[j]);
        }
    }

    fn centroid(&self, ring: &[u32]) -> [f64; 3] {
        let mut c = [0.0; 3];
        for &i in ring {
            c = add(c, self.mesh.vertices[i as usize]);
        }
        scale(c, 1.0 / ring.len() as f64)
    }

    /// Fan-cap a ring around its centroid; the centroid follows the ring
    /// through any morph.
    fn cap(&mut self, ring: &[u32]) {
        let c = self.centroid(ring);
        let cv = self.push(c, Anim::Mean(ring.to_vec()));
        for i in 0..ring.len() {
            let j = (i + 1) % ring.len();
            self.tri(ring[i], ring[j], cv);
        }
    }
}

fn bezier(p: [[f64; 3]; 4], t: f64) -> [f64; 3] {
    let s = 1.0 - t;
    let w = [s * s * s, 3.0 * s * s * t, 3.0 * s * t * t, t * t * t];
    let mut out = [0.0; 3];
    for k in 0..4 {
        out = add(out, scale(p[k], w[k]));
    }
    out
}

fn bezier_tangent(p: [[f64; 3]; 4], t: f64) -> [f64; 3] {
    let s = 1.0 - t;
    let mut out = [0.0; 3];
    let w = [
        -3.0 * s * s,
        3.0 * s * (s - 2.0 * t),
        3.0 * t * (2.0 * s - t),
        3.0 * t * t,
    ];
    for k in 0..4 {
        out = add(out, scale(p[k], w[k]));
    }
    normalize(out)
}

/// Banana body ring descriptors in the fully bent configuration, plus the
/// arc-segment path used to unbend them for the stage-1 morph.
fn body_descriptors() -> (Vec<RingDesc>, BodyPath) {
    use std::f64::consts::PI;
    let c = ARC_SMALL;
    let r_mid = 0.5 + c;
    let pieces = vec![
        (c * PI / 2.0, 1.0 / c),
        (r_mid * PI, 1.0 / r_mid),
        (c * PI / 2.0, 1.0 / c),
    ];
    let total: f64 = pieces.iter().map(|p| p.0).sum();
    // ring stations: denser on the small arcs
    let mut stations = Vec::new();
    let counts = [7usize, 14, 7];
    let mut s0 = 0.0;
    for (i, &(len, _)) in pieces.iter().enumerate() {
        let n = counts[i];
        let first = if i == 0 { 0 } else { 1 };
        for k in first..=n {
            stations.push(s0 + len * k as f64 / n as f64);
        }
        s0 += len;
    }
    let path = BodyPath {
        stations,
        pieces,
        total,
    };
    let descs: Vec<RingDesc> = (0..path.stations.len())
        .map(|k| path.ring_at(k, 1.0))
        .collect();
    (descs, path)
}

/// Recursively realize a cap: at depth 0 a flat fan disc; otherwise the cap
/// splits into two horns whose tip discs form the child joints.
///
/// `cap_ring`: boundary ring (radius s/2, RING_SEGS vertices, vertex 0 at
/// +eu); `into`: unit direction of growth (toward the partner cap);
/// (`eu`, `ev`) span the cap plane with `eu` the splitting axis.
#[allow(clippy::too_many_arguments)]
fn build_cap(
    b: &mut Builder,
    cap_ring: &[u32],
    center: [f64; 3],
    eu: [f64; 3],
    ev: [f64; 3],
    into: [f64; 3],
    s: f64,
    depth: usize,
    animate: bool,
) {
    if depth == 0 {
        b.cap(cap_ring);
        return;
    }
    // the newest generation grows as a homothety from its base point, so
    // every intermediate shape is a scaled copy of the final embedded horn
    let mk_seam_anim = |p: [f64; 3]| -> Anim {
        if animate {
            Anim::Lerp(flatten(p, center, into))
        } else {
            Anim::Fixed
        }
    };

    // seam across the cap along ev, dented slightly against the growth
    let seam: Vec<u32> = (0..SEAM_PTS)
        .map(|k| {
            let t = (k + 1) as f64 / (SEAM_PTS + 1) as f64;
            let lv = (0.5 - t) * 0.82 * s;
            let p = add(add(center, scale(ev, lv)), scale(into, -0.02 * s));
            let anim = mk_seam_anim(p);
            b.push(p, anim)
        })
        .collect();

    // split the cap ring at its ±ev vertices (located geometrically: the
    // ring's vertex 0 is not generally aligned with the cap frame)
    let n = cap_ring.len();
    let qa = (0..n)
        .max_by(|&i, &j| {
            let pi = dot(sub(b.mesh.vertices[cap_ring[i] as usize], center), ev);
            let pj = dot(sub(b.mesh.vertices[cap_ring[j] as usize], center), ev);
            pi.partial_cmp(&pj).unwrap()
        })
        .unwrap();
    let qb = (qa + n / 2) % n;
    let mut loop_a: Vec<u32> = Vec::new();
    let mut i = qa;
    loop {
        loop_a.push(cap_ring[i]);
        if i == qb {
            break;
        }
        i = (i + n - 1) % n;
    }
    loop_a.extend(seam.iter().rev().copied());
    let mut loop_b: Vec<u32> = Vec::new();
    let mut i = qb;
    loop {
        loop_b.push(cap_ring[i]);
        if i == qa {
            break;
        }
        i = (i + n - 1) % n;
    }
    loop_b.extend(seam.iter().copied());
    debug_assert_eq!(loop_a.len(), RING_SEGS);
    debug_assert_eq!(loop_b.len(), RING_SEGS);

    // which loop lies on the +eu side decides its horn's sign
    let side = |lp: &[u32]| -> f64 {
        let mut acc = 0.0;
        for &id in &lp[..n / 2] {
            acc += dot(sub(b.mesh.vertices[id as usize], center), eu);
        }
        acc.signum()
    };
    let sign_a = side(&loop_a);

    // two horns; tips face each other along ∓eu at distance s/4
    for (sign, lp) in [(sign_a, &loop_a), (-sign_a, &loop_b)] {
        let base = add(center, scale(eu, sign * 0.25 * s));
        // align the D-loop's order and phase with the horn rings so the
        // stitch does not braid: sort by angle around the base in the
        // initial ring frame
        let ev20 = normalize(cross(into, ev));
        let eu20 = normalize(cross(ev20, into));
        let angle_of = |id: u32, b: &Builder| -> f64 {
            let d = sub(b.mesh.vertices[id as usize], base);
            dot(d, ev20).atan2(dot(d, eu20))
        };
        let mut lp: Vec<u32> = lp.clone();
        {
            let angs: Vec<f64> = lp.iter().map(|&id| angle_of(id, b)).collect();
            // circulation sign from the winding of angle increments
            let mut winding = 0.0;
            for i in 0..lp.len() {
                let mut d = angs[(i + 1) % lp.len()] - angs[i];
                while d > std::f64::consts::PI {
                    d -= std::f64::consts::TAU;
                }
                while d < -std::f64::consts::PI {
                    d += std::f64::consts::TAU;
                }
                winding += d;
            }
            if winding < 0.0 {
                lp.reverse();
            }
            let angs: Vec<f64> = lp.iter().map(|&id| angle_of(id, b)).collect();
            let first = (0..lp.len())
                .min_by(|&i, &j| {
                    angs[i]
                        .abs()
                        .partial_cmp(&angs[j].abs())
                        .unwrap()
                })
                .unwrap();
            lp.rotate_left(first);
        }
        let lp = &lp;
        let tip = add(
            add(center, scale(eu, sign * 0.125 * s)),
            scale(into, DIVE * s),
        );
        let ctrl = [
            base,
            add(base, scale(into, 0.42 * s)),
            add(tip, scale(eu, sign * 0.18 * s)),
            tip,
        ];
        let horn = HornData {
            ctrl,
            ev_ref: ev,
            scale: s,
        };
        let horn_id = b.horns.len();
        b.horns.push(horn.clone());
        let mut prev: Vec<u32> = lp.clone();
        let rings_n = 9;
        let mut last_ring: Vec<u32> = Vec::new();
        for k in 1..=rings_n {
            let t = k as f64 / rings_n as f64;
            let desc = horn_ring(&horn, t);
            let ring: Vec<u32> = (0..RING_SEGS)
                .map(|kk| {
                    let q = desc.point(kk, RING_SEGS);
                    let anim = if animate {
                        Anim::Grow {
                            horn: horn_id,
                            t,
                            seg: kk,
                        }
                    } else {
                        Anim::Fixed
                    };
                    b.push(q, anim)
                })
                .collect();
            b.stitch(&prev, &ring);
            prev = ring.clone();
            last_ring = ring;
        }
        // the tip disc faces its twin along −sign·eu and grows that way;
        // the two tips of the new joint split along perpendicular axes
        // (like the root caps), so their future horn pairs interlock
        // instead of colliding
        let (tip_eu, tip_ev) = if sign == sign_a { (ev, into) } else { (into, ev) };
        build_cap(
            b,
            &last_ring,
            bezier(ctrl, 1.0),
            tip_eu,
            tip_ev,
            scale(eu, -sign),
            s / 4.0,
            depth - 1,
            depth - 1 == 1,
        );
    }
}

/// Project onto the cap plane (the flattened morph start).
fn flatten(p: [f64; 3], center: [f64; 3], into: [f64; 3]) -> [f64; 3] {
    let d = dot(sub(p, center), into);
    sub(p, scale(into, d))
}

/// Build the stage-`n` horned sphere.
pub fn horned_sphere_stage(n: usize) -> Result<HornedStage> {
    if n > MAX_HORNED_STAGE {
        return Err(Error::ResourceLimit(format!(
            "stage {n} beyond the configured maximum {MAX_HORNED_STAGE} \
             (triangle count grows as 2^n)"
        )));
    }
    let (body, path) = body_descriptors();
    let mut b = Builder {
        mesh: TriMesh::default(),
        anim: Vec::new(),
        body,
        path,
        horns: Vec::new(),
    };

    if n == 0 {
        // plain latitude/longitude sphere
        let n_rings = b.body.len();
        let descs: Vec<RingDesc> = (0..n_rings)
            .map(|k| {
                let lat = std::f64::consts::PI * (k as f64 + 0.5) / n_rings as f64;
                RingDesc {
                    center: [0.0, 0.0, SPHERE_R * lat.cos()],
                    eu: [1.0, 0.0, 0.0],
                    ev: [0.0, 1.0, 0.0],
                    radius: SPHERE_R * lat.sin(),
                }
            })
            .collect();
        let rings: Vec<Vec<u32>> = descs
            .iter()
            .map(|d| {
                (0..RING_SEGS)
                    .map(|k| b.push(d.point(k, RING_SEGS), Anim::Fixed))
                    .collect()
            })
            .collect();
        for k in 0..rings.len() - 1 {
            b.stitch(&rings[k], &rings[k + 1]);
        }
        b.cap(&rings[0]);
        let last = rings.last().unwrap().clone();
        b.cap(&last);
        let verts = b.mesh.vertices.clone();
        return Ok(HornedStage {
            stage: 0,
            times: vec![0.0, 1.0],
            snapshots: vec![verts.clone(), verts.clone()],
            mesh: b.mesh,
            spatial_scale: 1.0,
            time_len: 1.0,
            max_speed: 0.0,
            joint_count: 1,
        });
    }

    // banana body: vertices at the final (banana) configuration; for the
    // stage-1 morph they animate through the interpolated descriptors
    let n_body = b.body.len();
    let morph_body = n == 1;
    let mut body_rings: Vec<Vec<u32>> = Vec::with_capacity(n_body);
    for ring in 0..n_body {
        let desc = b.body[ring];
        let ids: Vec<u32> = (0..RING_SEGS)
            .map(|seg| {
                let anim = if morph_body {
                    Anim::Body { ring, seg }
                } else {
                    Anim::Fixed
                };
                b.push(desc.point(seg, RING_SEGS), anim)
            })
            .collect();
        body_rings.push(ids);
    }
    for k in 0..n_body - 1 {
        b.stitch(&body_rings[k], &body_rings[k + 1]);
    }

    let depth = n - 1;
    let top_center = [0.0, 0.0, 0.5];
    let bot_center = [0.0, 0.0, -0.5];
    if depth == 0 {
        b.cap(&body_rings[0].clone());
        b.cap(&body_rings[n_body - 1].clone());
    } else {
        // horns grow only at the deepest generation (animate there)
        build_cap(
            &mut b,
            &body_rings[0].clone(),
            top_center,
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, -1.0],
            1.0,
            depth,
            depth == 1,
        );
        build_cap(
            &mut b,
            &body_rings[n_body - 1].clone(),
            bot_center,
            [0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            1.0,
            depth,
            depth == 1,
        );
    }

    let final_pos = b.mesh.vertices.clone();

    let samples = 9;
    let times: Vec<f64> = (0..samples)
        .map(|k| k as f64 / (samples - 1) as f64)
        .collect();
    let mut snapshots = Vec::with_capacity(samples);
    for &t in &times {
        let tt = 0.04 + 0.96 * crate::field::smoothstep(t);
        // the stage-1 unbend runs backward in morph parameter: tt = 1 is
        // the bent banana
        let mut snap: Vec<[f64; 3]> = Vec::with_capacity(final_pos.len());
        for (i, (f, a)) in final_pos.iter().zip(&b.anim).enumerate() {
            let p = match a {
                Anim::Fixed => *f,
                Anim::Lerp(start) => lerp3(*start, *f, tt),
                Anim::Body { ring, seg } => {
                    b.path.ring_at(*ring, tt).point(*seg, RING_SEGS)
                }
                Anim::Grow { horn, t, seg } => {
                    horn_ring(&b.horns[*horn], t * tt).point(*seg, RING_SEGS)
                }
                Anim::Mean(ids) => {
                    let mut c = [0.0; 3];
                    for &id in ids {
                        debug_assert!((id as usize) < i);
                        c = add(c, snap[id as usize]);
                    }
                    scale(c, 1.0 / ids.len() as f64)
                }
            };
            snap.push(p);
        }
        snapshots.push(snap);
    }

    let time_len = 0.5_f64.powi(n as i32);
    let mut max_disp = 0.0f64;
    for (a, z) in snapshots[0].iter().zip(snapshots.last().unwrap()) {
        max_disp = max_disp.max(norm(sub(*z, *a)));
    }
    let max_speed = max_disp / time_len;

    Ok(HornedStage {
        stage: n,
        mesh: TriMesh {
            vertices: final_pos,
            faces: b.mesh.faces,
        },
        times,
        snapshots,
        spatial_scale: 0.25_f64.powi(n as i32),
        time_len,
        max_speed,
        joint_count: 1 << (n - 1),
    })
}

// ---- embeddedness check ----

/// Triangle–triangle intersection (interval overlap on the plane
/// intersection line) with a separation tolerance.
fn tri_tri_intersect(t1: &[[f64; 3]; 3], t2: &[[f64; 3]; 3], tol: f64) -> bool {
    let n1 = cross(sub(t1[1], t1[0]), sub(t1[2], t1[0]));
    let d1 = -dot(n1, t1[0]);
    let dist2: Vec<f64> = t2.iter().map(|p| dot(n1, *p) + d1).collect();
    let s1 = norm(n1).max(1e-300);
    if dist2.iter().all(|&d| d > tol * s1) || dist2.iter().all(|&d| d < -tol * s1) {
        return false;
    }
    let n2 = cross(sub(t2[1], t2[0]), sub(t2[2], t2[0]));
    let d2 = -dot(n2, t2[0]);
    let dist1: Vec<f64> = t1.iter().map(|p| dot(n2, *p) + d2).collect();
    let s2 = norm(n2).max(1e-300);
    if dist1.iter().all(|&d| d > tol * s2) || dist1.iter().all(|&d| d < -tol * s2) {
        return false;
    }
    let dir = cross(n1, n2);
    let axis = {
        let a = [dir[0].abs(), dir[1].abs(), dir[2].abs()];
        if a[0] >= a[1] && a[0] >= a[2] {
            0
        } else if a[1] >= a[2] {
            1
        } else {
            2
        }
    };
    let interval = |t: &[[f64; 3]; 3], dist: &[f64]| -> Option<(f64, f64)> {
        let proj: Vec<f64> = t.iter().map(|p| p[axis]).collect();
        let mut crossings = Vec::new();
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            let (di, dj) = (dist[i], dist[j]);
            if (di > 0.0) != (dj > 0.0) {
                let f = di / (di - dj);
                crossings.push(proj[i] + f * (proj[j] - proj[i]));
            }
        }
        if crossings.len() < 2 {
            return None;
        }
        let lo = crossings.iter().fold(f64::INFINITY, |m, &x| m.min(x));
        let hi = crossings.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        Some((lo, hi))
    };
    let (a_lo, a_hi) = match interval(t1, &dist1) {
        Some(x) => x,
        None => return false,
    };
    let (b_lo, b_hi) = match interval(t2, &dist2) {
        Some(x) => x,
        None => return false,
    };
    a_lo.max(b_lo) + tol < a_hi.min(b_hi)
}

impl TriMesh {
    pub fn with_vertices(&self, vertices: Vec<[f64; 3]>) -> TriMesh {
        TriMesh {
            vertices,
            faces: self.faces.clone(),
        }
    }

    /// Sampled embeddedness: no two non-adjacent triangles intersect.
    pub fn is_embedded(&self, tol: f64) -> bool {
        self.first_intersection(tol).is_none()
    }

    pub fn first_intersection(&self, tol: f64) -> Option<(usize, usize)> {
        let nf = self.faces.len();
        let tri = |i: usize| -> [[f64; 3]; 3] {
            let f = self.faces[i];
            [
                self.vertices[f[0] as usize],
                self.vertices[f[1] as usize],
                self.vertices[f[2] as usize],
            ]
        };
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for d in 0..3 {
                lo[d] = lo[d].min(v[d]);
                hi[d] = hi[d].max(v[d]);
            }
        }
        let mut sum_edge = 0.0;
        for f in &self.faces {
            sum_edge += norm(sub(
                self.vertices[f[1] as usize],
                self.vertices[f[0] as usize],
            ));
        }
        let cell = (sum_edge / nf as f64).max(1e-9) * 2.0;
        let dims: Vec<i64> = (0..3)
            .map(|d| (((hi[d] - lo[d]) / cell).ceil() as i64 + 1).max(1))
            .collect();
        let key = |c: [i64; 3]| -> i64 { (c[0] * dims[1] + c[1]) * dims[2] + c[2] };
        let mut bins: std::collections::HashMap<i64, Vec<u32>> =
            std::collections::HashMap::new();
        let mut boxes = Vec::with_capacity(nf);
        for i in 0..nf {
            let t = tri(i);
            let mut blo = [f64::INFINITY; 3];
            let mut bhi = [f64::NEG_INFINITY; 3];
            for p in &t {
                for d in 0..3 {
                    blo[d] = blo[d].min(p[d]);
                    bhi[d] = bhi[d].max(p[d]);
                }
            }
            boxes.push((blo, bhi));
            let c0: Vec<i64> = (0..3).map(|d| ((blo[d] - lo[d]) / cell) as i64).collect();
            let c1: Vec<i64> = (0..3).map(|d| ((bhi[d] - lo[d]) / cell) as i64).collect();
            for x in c0[0]..=c1[0] {
                for y in c0[1]..=c1[1] {
                    for z in c0[2]..=c1[2] {
                        bins.entry(key([x, y, z])).or_default().push(i as u32);
                    }
                }
            }
        }
        let share_vertex = |i: usize, j: usize| -> bool {
            let (a, b) = (self.faces[i], self.faces[j]);
            a.iter().any(|x| b.contains(x))
        };
        let mut checked: std::collections::HashSet<(u32, u32)> =
            std::collections::HashSet::new();
        for list in bins.values() {
            for (pi, &i) in list.iter().enumerate() {
                for &j in &list[pi + 1..] {
                    let (i, j) = (i.min(j), i.max(j));
                    if share_vertex(i as usize, j as usize) || !checked.insert((i, j)) {
                        continue;
                    }
                    let (alo, ahi) = boxes[i as usize];
                    let (blo, bhi) = boxes[j as usize];
                    if (0..3).any(|d| alo[d] > bhi[d] + tol || blo[d] > ahi[d] + tol) {
                        continue;
                    }
                    if tri_tri_intersect(&tri(i as usize), &tri(j as usize), tol) {
                        return Some((i as usize, j as usize));
                    }
                }
            }
        }
        None
    }
}

impl HornedStage {
    /// All stored time samples pass the embeddedness check.
    pub fn verify_embedded(&self, tol: f64) -> Result<()> {
        for (k, snap) in self.snapshots.iter().enumerate() {
            let m = self.mesh.with_vertices(snap.clone());
            if let Some((i, j)) = m.first_intersection(tol) {
                return Err(Error::Internal(format!(
                    "stage {} snapshot {k}: triangles {i} and {j} intersect",
                    self.stage
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_zero_is_round_and_static() {
        let s = horned_sphere_stage(0).unwrap();
        assert_eq!(s.max_speed, 0.0);
        for v in &s.mesh.vertices {
            assert!(
                (norm(*v) - SPHERE_R).abs() < 0.1,
                "vertex {v:?} off the sphere"
            );
        }
        assert!(s.mesh.is_embedded(1e-9));
    }

    #[test]
    fn stage_one_has_parallel_unit_caps() {
        let s = horned_sphere_stage(1).unwrap();
        assert_eq!(s.joint_count, 1);
        assert!(s.mesh.is_embedded(1e-7));
        let (mut top_r, mut bot_r) = (0.0f64, 0.0f64);
        let mut seen = (false, false);
        for v in &s.mesh.vertices {
            if (v[2] - 0.5).abs() < 1e-9 && v[0] < 0.75 {
                top_r = top_r.max(v[0].hypot(v[1]));
                seen.0 = true;
            }
            if (v[2] + 0.5).abs() < 1e-9 && v[0] < 0.75 {
                bot_r = bot_r.max(v[0].hypot(v[1]));
                seen.1 = true;
            }
        }
        assert!(seen.0 && seen.1);
        assert!((top_r - 0.5).abs() < 1e-6, "top cap radius {top_r}");
        assert!((bot_r - 0.5).abs() < 1e-6, "bottom cap radius {bot_r}");
    }

    #[test]
    fn stage_counts_and_caps() {
        assert_eq!(horned_sphere_stage(2).unwrap().joint_count, 2);
        assert_eq!(horned_sphere_stage(3).unwrap().joint_count, 4);
        assert!(matches!(
            horned_sphere_stage(99),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn speeds_decay_geometrically() {
        let mut prev: Option<f64> = None;
        let s1 = horned_sphere_stage(1).unwrap().max_speed;
        for n in 1..=4 {
            let s = horned_sphere_stage(n).unwrap();
            if let Some(p) = prev {
                let ratio = s.max_speed / p;
                assert!(ratio <= 0.6, "stage {n}: speed ratio {ratio} exceeds 0.6");
            }
            prev = Some(s.max_speed);
        }
        // stage 3 speed ≤ (1/2)² · stage-1 speed within 10%
        let s3 = horned_sphere_stage(3).unwrap().max_speed;
        assert!(s3 <= 0.25 * s1 * 1.1, "s3 = {s3}, s1 = {s1}");
    }

    #[test]
    fn stages_embedded_through_morph() {
        for n in 1..=3 {
            let s = horned_sphere_stage(n).unwrap();
            s.verify_embedded(1e-7)
                .unwrap_or_else(|e| panic!("stage {n}: {e}"));
        }
    }
}
