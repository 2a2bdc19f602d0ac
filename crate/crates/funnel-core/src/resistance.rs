//! Resistance of a Jordan curve by region-constrained shortest paths.
//!
//! A polar path meets the curve exactly once, so it decomposes into an
//! above-leg and a below-leg joined at the crossing. The estimate is the
//! minimum over portal edges (grid edges crossing the curve exactly once) of
//! `dist(north pole → u | above) + w(u, v) + dist(v → south pole | below)`,
//! where the legs run over crossing-free edges between nodes of one side.
//! The witness is the concatenated grid path, which crosses the curve once
//! by construction.

use crate::error::{Error, Result};
use crate::surface::{
    self, distance, point_segment_distance, segment_crossing, JordanCurve, PolarPathCandidate,
    Polyline, SegmentCrossing, Space, SurfacePoint, INCIDENCE_TOL,
};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};

/// Which complementary component of the curve a grid node belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Above,
    Below,
}

/// Node label: side parity plus an on-curve flag for nodes within `h/2` of
/// the curve.
#[derive(Clone, Copy, Debug)]
pub struct NodeLabel {
    pub side: Side,
    pub on_curve: bool,
}

/// Labeled weighted grid graph around a pole-separating Jordan curve.
///
/// Rows cover the curve's latitude band (inflated by a margin); travel above
/// and below the band is exact through two dedicated pole nodes. Longitude
/// steps on the sphere are automatically weighted by the latitude cosine
/// since edge weights are true geodesic distances.
#[derive(Debug)]
pub struct RegionGraph {
    pub space: Space,
    pub h: f64,
    n_theta: usize,
    theta_offset: f64,
    /// row coordinate: colatitude (sphere) or z (cylinder), top to bottom
    rows: Vec<f64>,
    positions: Vec<SurfacePoint>,
    pub labels: Vec<NodeLabel>,
    /// crossing-free edges usable by legs: (u, v, weight)
    leg_edges: Vec<(u32, u32, f64)>,
    /// single-crossing edges: (above node, below node, weight)
    portal_edges: Vec<(u32, u32, f64)>,
    /// weight of the pole → top-row / bottom-row connection
    cap_top: f64,
    cap_bottom: f64,
}

/// Resistance estimate with a witness polar path.
#[derive(Clone, Debug)]
pub struct ResistanceReport {
    pub curve_id: String,
    pub h: f64,
    pub estimate: f64,
    pub witness: PolarPathCandidate,
    /// true when the witness validated (crossing count 1, endpoints at the
    /// poles), so the estimate is a genuine upper bound and
    /// `estimate · (1 − slack)` the matching grid lower bound.
    pub lower_bound_certified: bool,
    pub slack: f64,
}

struct HeapEntry {
    cost: f64,
    node: u32,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost
    }
}
impl Eq for HeapEntry {}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(Ordering::Equal)
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Longitude-binned index over curve segments for proximity and crossing
/// queries near the curve.
struct CurveIndex {
    segs: Vec<(SurfacePoint, SurfacePoint)>,
    bins: Vec<Vec<u32>>,
    stamp: Vec<u32>,
    stamp_id: u32,
}

fn longitude_of(p: &SurfacePoint) -> f64 {
    match *p {
        SurfacePoint::Cylinder { theta, .. } => theta,
        SurfacePoint::Sphere { v } => {
            let t = v[1].atan2(v[0]);
            if t < 0.0 {
                t + TAU
            } else {
                t
            }
        }
        SurfacePoint::Plane { .. } => 0.0,
    }
}

const N_BINS: usize = 512;

impl CurveIndex {
    fn new(curve: &JordanCurve) -> Self {
        let segs: Vec<_> = curve.base().segments().collect();
        let mut bins = vec![Vec::new(); N_BINS];
        for (i, (a, b)) in segs.iter().enumerate() {
            let ta = longitude_of(a);
            let span = surface::wrap_angle_diff(ta, longitude_of(b));
            let (lo, hi) = if span >= 0.0 {
                (ta, ta + span)
            } else {
                (ta + span, ta)
            };
            // inflate by one bin against geodesic bulge
            let b0 = ((lo - TAU / N_BINS as f64) / TAU * N_BINS as f64).floor() as i64;
            let b1 = ((hi + TAU / N_BINS as f64) / TAU * N_BINS as f64).ceil() as i64;
            for bi in b0..=b1 {
                bins[bi.rem_euclid(N_BINS as i64) as usize].push(i as u32);
            }
        }
        let n = segs.len();
        CurveIndex {
            segs,
            bins,
            stamp: vec![0; n],
            stamp_id: 0,
        }
    }

    fn candidates(&mut self, theta_lo: f64, theta_hi: f64, out: &mut Vec<u32>) {
        out.clear();
        self.stamp_id += 1;
        let b0 = (theta_lo / TAU * N_BINS as f64).floor() as i64;
        let b1 = (theta_hi / TAU * N_BINS as f64).ceil() as i64;
        if b1 - b0 >= N_BINS as i64 {
            out.extend(0..self.segs.len() as u32);
            return;
        }
        for bi in b0..=b1 {
            for &s in &self.bins[bi.rem_euclid(N_BINS as i64) as usize] {
                if self.stamp[s as usize] != self.stamp_id {
                    self.stamp[s as usize] = self.stamp_id;
                    out.push(s);
                }
            }
        }
    }

    /// Distance from `p` to the curve, exact whenever it is ≤ `cap`; may
    /// return +∞ when every segment is certainly farther than `cap`.
    fn distance_within(
        &mut self,
        p: &SurfacePoint,
        cap: f64,
        sin_floor: f64,
        buf: &mut Vec<u32>,
    ) -> f64 {
        let t = longitude_of(p);
        let w = cap / sin_floor;
        let mut scratch = std::mem::take(buf);
        self.candidates(t - w, t + w, &mut scratch);
        let mut best = f64::INFINITY;
        for &s in &scratch {
            let (a, b) = &self.segs[s as usize];
            let d = point_segment_distance(p, a, b);
            if d < best {
                best = d;
            }
        }
        *buf = scratch;
        best
    }

    /// Count transversal crossings of the segment `(a, b)` with the curve.
    fn crossings(
        &mut self,
        a: &SurfacePoint,
        b: &SurfacePoint,
        sin_floor: f64,
        buf: &mut Vec<u32>,
    ) -> Result<usize> {
        let ta = longitude_of(a);
        let span = surface::wrap_angle_diff(ta, longitude_of(b));
        let (lo, hi) = if span >= 0.0 {
            (ta, ta + span)
        } else {
            (ta + span, ta)
        };
        let pad = 2.0 * distance(a, b) / sin_floor;
        let mut scratch = std::mem::take(buf);
        self.candidates(lo - pad, hi + pad, &mut scratch);
        let mut count = 0;
        for &s in &scratch {
            let (c1, c2) = &self.segs[s as usize];
            match segment_crossing(a, b, c1, c2) {
                SegmentCrossing::None => {}
                SegmentCrossing::Proper => count += 1,
                SegmentCrossing::Ambiguous => {
                    *buf = scratch;
                    return Err(Error::AmbiguousIncidence(
                        "grid edge touches the curve within tolerance".into(),
                    ));
                }
            }
        }
        *buf = scratch;
        Ok(count)
    }
}

/// Latitude band (as row coordinates, top first) covering the curve plus a
/// margin.
fn curve_band(curve: &JordanCurve, margin: f64) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in curve.base().vertices() {
        let r = match *p {
            SurfacePoint::Cylinder { z, .. } => z,
            SurfacePoint::Sphere { v } => v[2].clamp(-1.0, 1.0).acos(),
            SurfacePoint::Plane { .. } => unreachable!(),
        };
        lo = lo.min(r);
        hi = hi.max(r);
    }
    match curve.space() {
        // cylinder rows are z, top (+1) first
        Space::Cylinder => ((hi + margin).min(1.0 - 1e-6), (lo - margin).max(-1.0 + 1e-6)),
        // sphere rows are colatitude, top (north) first
        Space::Sphere => ((lo - margin).max(1e-4), (hi + margin).min(PI - 1e-4)),
        Space::Plane => unreachable!(),
    }
}

pub const DEFAULT_OFFSET_FRAC: f64 = 0.2347;

/// Build the labeled region graph at angular resolution `h`.
pub fn build_region_graph(curve: &JordanCurve, h: f64) -> Result<RegionGraph> {
    build_region_graph_offset(curve, h, DEFAULT_OFFSET_FRAC)
}

/// As [`build_region_graph`], with the grid shifted by a fraction of a cell
/// in both directions (mesh-independence experiments rotate the grid by
/// h/2, i.e. `offset_frac + 0.5`).
pub fn build_region_graph_offset(
    curve: &JordanCurve,
    h: f64,
    offset_frac: f64,
) -> Result<RegionGraph> {
    let space = curve.space();
    if space == Space::Plane {
        return Err(Error::InvalidInput("resistance needs poles".into()));
    }
    if h <= 0.0 {
        return Err(Error::InvalidInput("grid step must be > 0".into()));
    }
    if h > PI / 8.0 {
        return Err(Error::ResolutionTooCoarse(format!(
            "grid step {h} cannot resolve any pole-separating curve"
        )));
    }
    if !surface::separates_poles(curve)? {
        return Err(Error::InvalidInput(
            "curve does not separate the poles".into(),
        ));
    }

    // ambiguity retries with shifted grids, then give up
    let mut last_err = None;
    for attempt in 0..3 {
        let frac = offset_frac + attempt as f64 * 0.3177;
        match try_build(curve, h, frac) {
            Ok(g) => return Ok(g),
            Err(Error::AmbiguousIncidence(m)) => last_err = Some(Error::AmbiguousIncidence(m)),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap())
}

fn try_build(curve: &JordanCurve, h: f64, offset_frac: f64) -> Result<RegionGraph> {
    let space = curve.space();
    let margin = 4.0 * h;
    let (row_start, row_end) = curve_band(curve, margin);

    let extent = (row_end - row_start).abs();
    let n_rows = ((extent / h).ceil() as usize).max(2) + 1;
    if n_rows < 3 {
        return Err(Error::ResolutionTooCoarse(format!(
            "band of extent {extent:.4} has fewer than 3 rows at h = {h}"
        )));
    }
    let row_step = (row_end - row_start) / (n_rows - 1) as f64;
    let shift = offset_frac.fract() * row_step * 0.5;
    let rows: Vec<f64> = (0..n_rows)
        .map(|i| {
            let r = row_start + i as f64 * row_step + shift;
            match space {
                Space::Cylinder => r.clamp(-1.0 + 1e-6, 1.0 - 1e-6),
                Space::Sphere => r.clamp(1e-4, PI - 1e-4),
                Space::Plane => unreachable!(),
            }
        })
        .collect();

    let n_theta = ((TAU / h).ceil() as usize).max(8);
    let theta_step = TAU / n_theta as f64;
    let theta_offset = offset_frac.fract() * theta_step;

    let node_id = |i: usize, j: usize| -> u32 { (i * n_theta + j) as u32 };
    let n_nodes = n_rows * n_theta;

    let mut positions = Vec::with_capacity(n_nodes);
    for &r in &rows {
        for j in 0..n_theta {
            let theta = theta_offset + j as f64 * theta_step;
            let p = match space {
                Space::Cylinder => SurfacePoint::cylinder(theta, r)?,
                Space::Sphere => SurfacePoint::sphere_lonlat(theta, r),
                Space::Plane => unreachable!(),
            };
            positions.push(p);
        }
    }

    // conservative sine floor over the band for longitude windows
    let sin_floor = match space {
        Space::Cylinder => 1.0,
        Space::Sphere => rows
            .iter()
            .map(|r| r.sin())
            .fold(f64::INFINITY, f64::min)
            .max(0.05),
        Space::Plane => unreachable!(),
    };

    let mut index = CurveIndex::new(curve);
    let mut buf = Vec::new();

    // distance to curve per node; exact below the gate
    let gate = 2.5 * h + 2.0 * theta_step;
    let mut dist_curve = vec![f64::INFINITY; n_nodes];
    for (i, p) in positions.iter().enumerate() {
        let d = index.distance_within(p, gate, sin_floor, &mut buf);
        if d <= INCIDENCE_TOL {
            return Err(Error::AmbiguousIncidence(format!(
                "grid node {i} lies on the curve"
            )));
        }
        dist_curve[i] = d;
    }

    // classify edges: a segment can only cross the curve if one endpoint is
    // within the segment length of it
    let neighbor_offsets: [(i64, i64); 4] = [(0, 1), (1, 0), (1, 1), (1, -1)];
    let mut crossing_edges: Vec<(u32, u32, f64, usize)> = Vec::new();
    let mut plain_edges: Vec<(u32, u32, f64)> = Vec::new();
    for i in 0..n_rows {
        for j in 0..n_theta {
            let u = node_id(i, j);
            for (di, dj) in neighbor_offsets {
                let ii = i as i64 + di;
                if ii < 0 || ii >= n_rows as i64 {
                    continue;
                }
                if di == 0 && n_theta < 2 {
                    continue;
                }
                let jj = (j as i64 + dj).rem_euclid(n_theta as i64) as usize;
                let v = node_id(ii as usize, jj);
                let (pu, pv) = (&positions[u as usize], &positions[v as usize]);
                let w = distance(pu, pv);
                let near = dist_curve[u as usize] <= w + INCIDENCE_TOL
                    || dist_curve[v as usize] <= w + INCIDENCE_TOL;
                if !near {
                    plain_edges.push((u, v, w));
                    continue;
                }
                let c = index.crossings(pu, pv, sin_floor, &mut buf)?;
                if c == 0 {
                    plain_edges.push((u, v, w));
                } else {
                    crossing_edges.push((u, v, w, c));
                }
            }
        }
    }

    // side parity by BFS over all edges (flip on odd crossing counts)
    let mut side = vec![u8::MAX; n_nodes];
    let start = node_id(0, 0);
    side[start as usize] = 0;
    let mut adj: Vec<Vec<(u32, u8)>> = vec![Vec::new(); n_nodes];
    for &(u, v, _) in &plain_edges {
        adj[u as usize].push((v, 0));
        adj[v as usize].push((u, 0));
    }
    for &(u, v, _, c) in &crossing_edges {
        adj[u as usize].push((v, (c % 2) as u8));
        adj[v as usize].push((u, (c % 2) as u8));
    }
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let su = side[u as usize];
        for &(v, flip) in &adj[u as usize] {
            let sv = su ^ flip;
            if side[v as usize] == u8::MAX {
                side[v as usize] = sv;
                queue.push_back(v);
            } else if side[v as usize] != sv {
                return Err(Error::ResolutionTooCoarse(
                    "inconsistent crossing parity; curve features thinner than the grid".into(),
                ));
            }
        }
    }
    if side.iter().any(|&s| s == u8::MAX) {
        return Err(Error::Internal("grid graph not connected".into()));
    }

    // the top row sits above the band margin, so it carries the pole's side
    let north_side = side[node_id(0, 0) as usize];
    for j in 0..n_theta {
        if side[node_id(0, j) as usize] != north_side {
            return Err(Error::ResolutionTooCoarse(
                "top row not uniformly on the north side".into(),
            ));
        }
        if side[node_id(n_rows - 1, j) as usize] == north_side {
            return Err(Error::ResolutionTooCoarse(
                "bottom row reaches the north side; band margin too small".into(),
            ));
        }
    }

    let labels: Vec<NodeLabel> = (0..n_nodes)
        .map(|i| NodeLabel {
            side: if side[i] == north_side {
                Side::Above
            } else {
                Side::Below
            },
            on_curve: dist_curve[i] <= 0.5 * h,
        })
        .collect();

    let leg_edges: Vec<(u32, u32, f64)> = plain_edges
        .into_iter()
        .filter(|&(u, v, _)| side[u as usize] == side[v as usize])
        .collect();
    let portal_edges: Vec<(u32, u32, f64)> = crossing_edges
        .into_iter()
        .filter(|&(u, v, _, c)| c == 1 && side[u as usize] != side[v as usize])
        .map(|(u, v, w, _)| {
            if labels[u as usize].side == Side::Above {
                (u, v, w)
            } else {
                (v, u, w)
            }
        })
        .collect();

    let (cap_top, cap_bottom) = match space {
        Space::Cylinder => (1.0 - rows[0], rows[n_rows - 1] + 1.0),
        Space::Sphere => (rows[0], PI - rows[n_rows - 1]),
        Space::Plane => unreachable!(),
    };

    let graph = RegionGraph {
        space,
        h,
        n_theta,
        theta_offset,
        rows,
        positions,
        labels,
        leg_edges,
        portal_edges,
        cap_top,
        cap_bottom,
    };
    graph.check_label_connectivity()?;
    Ok(graph)
}

impl RegionGraph {
    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn portal_count(&self) -> usize {
        self.portal_edges.len()
    }

    pub fn position(&self, node: u32) -> &SurfacePoint {
        &self.positions[node as usize]
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.theta_offset + j as f64 * TAU / self.n_theta as f64
    }

    /// Every off-curve node must connect to its boundary row through
    /// same-side crossing-free edges; a failure means the grid cannot
    /// resolve the curve's features.
    fn check_label_connectivity(&self) -> Result<()> {
        for want in [Side::Above, Side::Below] {
            let reach = self.side_distances(want).0;
            for (i, l) in self.labels.iter().enumerate() {
                if l.side == want && !l.on_curve && reach[i].is_infinite() {
                    return Err(Error::ResolutionTooCoarse(format!(
                        "{want:?}-labeled node {i} unreachable from its pole; \
                         curve features thinner than 2h"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Dijkstra from the pole of the given side over same-side leg edges.
    /// The pole is virtual: every boundary-row node starts at the exact cap
    /// distance (the region beyond the band is curve-free).
    fn side_distances(&self, side: Side) -> (Vec<f64>, Vec<u32>) {
        let n = self.positions.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![u32::MAX; n];
        let mut adj: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for &(u, v, w) in &self.leg_edges {
            if self.labels[u as usize].side == side {
                adj[u as usize].push((v, w));
                adj[v as usize].push((u, w));
            }
        }
        let mut heap = BinaryHeap::new();
        let n_rows = self.rows.len();
        let (row, cap) = match side {
            Side::Above => (0usize, self.cap_top),
            Side::Below => (n_rows - 1, self.cap_bottom),
        };
        for j in 0..self.n_theta {
            let u = (row * self.n_theta + j) as u32;
            if self.labels[u as usize].side == side {
                dist[u as usize] = cap;
                heap.push(HeapEntry { cost: cap, node: u });
            }
        }
        while let Some(HeapEntry { cost, node }) = heap.pop() {
            if cost > dist[node as usize] {
                continue;
            }
            for &(v, w) in &adj[node as usize] {
                let next = cost + w;
                if next < dist[v as usize] {
                    dist[v as usize] = next;
                    prev[v as usize] = node;
                    heap.push(HeapEntry {
                        cost: next,
                        node: v,
                    });
                }
            }
        }
        (dist, prev)
    }

    fn walk_to_boundary(&self, prev: &[u32], mut node: u32) -> Vec<u32> {
        let mut path = vec![node];
        while prev[node as usize] != u32::MAX {
            node = prev[node as usize];
            path.push(node);
        }
        path
    }
}

/// Estimate the resistance of a pole-separating Jordan curve at grid step
/// `h`, returning a validated witness polar path.
pub fn resistance(curve: &JordanCurve, h: f64) -> Result<ResistanceReport> {
    resistance_offset(curve, h, DEFAULT_OFFSET_FRAC)
}

pub fn resistance_offset(
    curve: &JordanCurve,
    h: f64,
    offset_frac: f64,
) -> Result<ResistanceReport> {
    let graph = build_region_graph_offset(curve, h, offset_frac)?;
    let (dist_above, prev_above) = graph.side_distances(Side::Above);
    let (dist_below, prev_below) = graph.side_distances(Side::Below);

    let mut best: Option<(f64, u32, u32)> = None;
    for &(u, v, w) in &graph.portal_edges {
        let total = dist_above[u as usize] + w + dist_below[v as usize];
        if total.is_finite() && best.map_or(true, |(b, ..)| total < b) {
            best = Some((total, u, v));
        }
    }
    let (grid_min, u, v) = best.ok_or_else(|| {
        Error::Internal("no admissible crossing pair; separation invariant violated".into())
    })?;

    // assemble the witness: pole → u (reversed walk), portal, v → pole;
    // on the cylinder the "pole" is the boundary circle, entered vertically
    let space = graph.space;
    let mut above_path = graph.walk_to_boundary(&prev_above, u);
    above_path.reverse(); // boundary row … u
    let below_path = graph.walk_to_boundary(&prev_below, v);
    let mut vertices = Vec::new();
    let north = match space {
        Space::Cylinder => {
            let first = graph.position(above_path[0]);
            match *first {
                SurfacePoint::Cylinder { theta, .. } => SurfacePoint::cylinder(theta, 1.0)?,
                _ => unreachable!(),
            }
        }
        _ => SurfacePoint::north_pole(space)?,
    };
    let south = match space {
        Space::Cylinder => {
            let last = graph.position(*below_path.last().unwrap());
            match *last {
                SurfacePoint::Cylinder { theta, .. } => SurfacePoint::cylinder(theta, -1.0)?,
                _ => unreachable!(),
            }
        }
        _ => SurfacePoint::south_pole(space)?,
    };
    vertices.push(north);
    for n in &above_path {
        vertices.push(*graph.position(*n));
    }
    for n in &below_path {
        vertices.push(*graph.position(*n));
    }
    vertices.push(south);
    let path = Polyline::open(vertices)?;

    let witness = PolarPathCandidate::new(path, curve)?;
    let length = witness.path.length();
    if (length - grid_min).abs() > 1e-9 * (1.0 + grid_min) {
        return Err(Error::Internal(format!(
            "witness length {length} disagrees with grid minimum {grid_min}"
        )));
    }
    let slack = 0.05 * grid_min + 4.0 * h;
    Ok(ResistanceReport {
        curve_id: String::new(),
        h,
        estimate: grid_min,
        lower_bound_certified: witness.is_polar(),
        witness,
        slack,
    })
}

/// Lower-semicontinuity experiment report: resistance of a base curve
/// against a sequence of perturbations, with Hausdorff distances and the
/// one-sided check `r(J) ≤ min over the reported tail of r(Jₙ) + tol(h)`.
///
/// The experiment asserts nothing about upper semicontinuity; a strictly
/// positive `min_tail − base` drop is reported as-is.
#[derive(Clone, Debug)]
pub struct LscReport {
    pub h: f64,
    pub base_resistance: f64,
    /// per perturbation: (Hausdorff distance to the base, resistance)
    pub entries: Vec<(f64, f64)>,
    /// minimum resistance over the tail (second half) of the sequence
    pub min_tail: f64,
    /// `0.05 · min(base, min_tail) + 4h`
    pub tol: f64,
    pub lsc_check: bool,
}

pub fn lsc_experiment(
    base: &JordanCurve,
    perturbations: &[JordanCurve],
    h: f64,
) -> Result<LscReport> {
    if perturbations.is_empty() {
        return Err(Error::InvalidInput("no perturbations given".into()));
    }
    for (k, p) in perturbations.iter().enumerate() {
        if !surface::separates_poles(p)? {
            return Err(Error::InvalidInput(format!(
                "perturbation {k} does not separate the poles"
            )));
        }
    }
    let base_resistance = resistance(base, h)?.estimate;
    let mut entries = Vec::with_capacity(perturbations.len());
    for p in perturbations {
        let d = surface::hausdorff_polylines(base.base(), p.base(), h)?;
        let r = resistance(p, h)?.estimate;
        entries.push((d, r));
    }
    let tail_start = entries.len() / 2;
    let min_tail = entries[tail_start..]
        .iter()
        .map(|&(_, r)| r)
        .fold(f64::INFINITY, f64::min);
    let tol = 0.05 * base_resistance.min(min_tail) + 4.0 * h;
    Ok(LscReport {
        h,
        base_resistance,
        entries,
        min_tail,
        tol,
        lsc_check: base_resistance <= min_tail + tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{equator, latitude_circle};

    #[test]
    fn equator_region_graph_labels() {
        let eq = equator(Space::Sphere, 256).unwrap();
        let g = build_region_graph(&eq, PI / 100.0).unwrap();
        assert!(g.portal_count() > 0);
        let above = g.labels.iter().filter(|l| l.side == Side::Above).count();
        let below = g.labels.iter().filter(|l| l.side == Side::Below).count();
        assert!(above > 0 && below > 0);
    }

    #[test]
    fn equator_resistance_close_to_pi() {
        let eq = equator(Space::Sphere, 400).unwrap();
        let r = resistance(&eq, PI / 200.0).unwrap();
        assert!(
            (r.estimate - PI).abs() <= 0.02 * PI,
            "estimate {} off π by more than 2%",
            r.estimate
        );
        assert!(r.witness.is_polar());
        assert!(r.lower_bound_certified);
        assert!(r.estimate >= PI * (1.0 - 2.0 * r.h));
    }

    #[test]
    fn latitude_circle_resistance_close_to_pi() {
        let c = latitude_circle(Space::Sphere, 0.5, 400).unwrap();
        let r = resistance(&c, PI / 200.0).unwrap();
        assert!(
            (r.estimate - PI).abs() <= 0.02 * PI,
            "estimate {} off π by more than 2%",
            r.estimate
        );
    }

    #[test]
    fn cylinder_equator_resistance_is_two() {
        let eq = equator(Space::Cylinder, 256).unwrap();
        let r = resistance(&eq, 0.02).unwrap();
        assert!(
            (r.estimate - 2.0).abs() <= 0.04,
            "estimate {} off 2 by more than 2%",
            r.estimate
        );
    }

    #[test]
    fn absurdly_coarse_grid_rejected() {
        let eq = equator(Space::Sphere, 64).unwrap();
        match build_region_graph(&eq, 10.0) {
            Err(Error::ResolutionTooCoarse(_)) => {}
            other => panic!("expected resolution-too-coarse, got {other:?}"),
        }
    }

    #[test]
    fn constant_sequence_lsc() {
        let eq = equator(Space::Sphere, 128).unwrap();
        let perts = vec![eq.clone(), eq.clone(), eq.clone()];
        let rep = lsc_experiment(&eq, &perts, PI / 64.0).unwrap();
        assert!(rep.lsc_check);
        assert!((rep.base_resistance - rep.min_tail).abs() <= 1e-9);
        for &(d, _) in &rep.entries {
            assert!(d <= 1e-9);
        }
    }

    #[test]
    fn mesh_offset_estimates_agree() {
        let eq = equator(Space::Sphere, 256).unwrap();
        let h = PI / 100.0;
        let a = resistance_offset(&eq, h, DEFAULT_OFFSET_FRAC).unwrap();
        let b = resistance_offset(&eq, h, DEFAULT_OFFSET_FRAC + 0.5).unwrap();
        assert!(
            (a.estimate - b.estimate).abs() <= 3.0 * h * a.estimate,
            "offset estimates {} vs {} disagree beyond 3h·estimate",
            a.estimate,
            b.estimate
        );
    }
}
