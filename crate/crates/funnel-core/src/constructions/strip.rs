//! S-shaped strips and zipper strips in a rectangle.
//!
//! The strip map is the identity near the rectangle boundary and carries the
//! straight middle band `[2a/5, 3a/5] × [0, b]` onto an S-shaped corridor:
//! three alternating full-width excursions force every top-to-bottom
//! crossing of the corridor to sweep the rectangle's width back and forth.

use super::slide::{BandMap, BandOp, MovingAxis, PiecewiseLinear, Trapezoid};
use crate::error::{Error, Result};

/// A rectangle self-map that folds the middle band into an S/zipper strip.
#[derive(Clone, Debug)]
pub struct StripMap {
    pub width: f64,
    pub height: f64,
    pub map: BandMap,
    /// image of the middle band as a closed polygon (exact: the band
    /// translates rigidly slice by slice)
    pub band_image: Vec<[f64; 2]>,
    /// identity collar width along the rectangle boundary
    pub collar: f64,
    /// designed lower bound for the horizontal variation of any
    /// top-to-bottom crossing of the band image
    pub forced_variation: f64,
}

/// Per-strip swing fraction of the width.
const SWING: f64 = 0.35;
/// Band half-width fraction.
const BAND_HW: f64 = 0.10;

/// Horizontal displacement of the band center at height fraction `s ∈ [0,1]`
/// inside one S-strip cell, given the three stacked slab windows.
fn cell_profile(windows: &[(Trapezoid, f64)], s: f64) -> f64 {
    windows.iter().map(|(w, d)| d * w.eval(s)).sum()
}

fn cell_windows(a: f64) -> Vec<(Trapezoid, f64)> {
    // three disjoint slabs in height fractions, alternating swing direction
    let slabs = [
        (0.63, 0.71, 0.79, 0.87, -SWING * a),
        (0.37, 0.45, 0.53, 0.61, SWING * a),
        (0.11, 0.19, 0.27, 0.35, -SWING * a),
    ];
    slabs
        .iter()
        .map(|&(y0, y1, y2, y3, d)| (Trapezoid::new(y0, y1, y2, y3).unwrap(), d))
        .collect()
}

/// The strip self-map of `[0, a] × [0, b]`.
///
/// Every sampled path crossing the band image top-to-bottom has horizontal
/// variation at least `a` (the designed bound is `forced_variation ≈ 1.3a`).
pub fn s_strip(a: f64, b: f64) -> Result<StripMap> {
    zipper(0.0, a, b)
}

/// Stack `n = max(1, ceil(L / a))` scaled S-strips so that every
/// top-to-bottom crossing of the zipper strip has length ≥ L.
pub fn zipper(l_target: f64, a: f64, b: f64) -> Result<StripMap> {
    if !(a > 0.0) || !(b > 0.0) || l_target < 0.0 {
        return Err(Error::InvalidInput(format!(
            "zipper needs positive dimensions, got L={l_target}, a={a}, b={b}"
        )));
    }
    let n = ((l_target / a).ceil() as usize).max(1);
    let cell_h = b / n as f64;
    let windows = cell_windows(a);

    // gate in x: plateau covers the band's full swing
    let gate = Trapezoid::new(0.015 * a, 0.04 * a, 0.96 * a, 0.985 * a)?;

    let mut ops = Vec::new();
    for k in 0..n {
        let y_base = k as f64 * cell_h;
        for (w, d) in &windows {
            let amount = PiecewiseLinear::new(
                vec![
                    y_base + w.x0 * cell_h,
                    y_base + w.x1 * cell_h,
                    y_base + w.x2 * cell_h,
                    y_base + w.x3 * cell_h,
                ],
                vec![0.0, *d, *d, 0.0],
                None,
            )?;
            ops.push(BandOp::Flow {
                axis: MovingAxis::X,
                amount,
                gate,
            });
        }
    }
    let map = BandMap::single_phase(ops);

    // exact band image: horizontal slices translate rigidly by the cell
    // profile; collect knot heights per cell
    let mut left = Vec::new();
    let mut right = Vec::new();
    let fracs = [
        0.0, 0.11, 0.19, 0.27, 0.35, 0.37, 0.45, 0.53, 0.61, 0.63, 0.71, 0.79, 0.87, 1.0,
    ];
    for k in 0..n {
        let y_base = k as f64 * cell_h;
        for (i, &s) in fracs.iter().enumerate() {
            if k > 0 && i == 0 {
                continue; // shared knot with the previous cell
            }
            let y = y_base + s * cell_h;
            let dx = cell_profile(&windows, s);
            left.push([(0.5 - BAND_HW) * a + dx, y]);
            right.push([(0.5 + BAND_HW) * a + dx, y]);
        }
    }
    let mut band_image = Vec::with_capacity(left.len() * 2);
    band_image.extend(left.iter().copied());
    band_image.extend(right.iter().rev().copied());

    // forced variation per cell: the band center visits width fractions
    // 0.5 → 0.15 → 0.85 → 0.15 → 0.5 (legs summing to 2.1·a), and a
    // crossing can cheat by one band width per leg
    let per_cell = a * (6.0 * SWING - 4.0 * 2.0 * BAND_HW);
    let forced = per_cell.max(0.0) * n as f64;

    Ok(StripMap {
        width: a,
        height: b,
        map,
        band_image,
        collar: (0.015 * a).min(0.11 * cell_h),
        forced_variation: forced,
    })
}

/// Even-odd point-in-polygon test (plane).
pub fn point_in_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let t = (p[1] - a[1]) / (b[1] - a[1]);
            let x = a[0] + t * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
    }
    inside
}

impl StripMap {
    pub fn forward(&self, p: [f64; 2]) -> [f64; 2] {
        self.map.forward(p)
    }

    pub fn inverse(&self, p: [f64; 2]) -> [f64; 2] {
        self.map.inverse(p)
    }

    /// The straight middle band of the domain rectangle.
    pub fn band_domain(&self) -> ([f64; 2], [f64; 2]) {
        ([0.4 * self.width, 0.0], [0.6 * self.width, self.height])
    }

    /// Sample forward and inverse maps on an `(n+1)²` grid.
    pub fn sample_grid(&self, n: usize) -> Vec<([f64; 2], [f64; 2], [f64; 2])> {
        let mut out = Vec::with_capacity((n + 1) * (n + 1));
        for i in 0..=n {
            for j in 0..=n {
                let p = [
                    self.width * i as f64 / n as f64,
                    self.height * j as f64 / n as f64,
                ];
                out.push((p, self.forward(p), self.inverse(p)));
            }
        }
        out
    }

    /// Shortest top-to-bottom path confined to the band image, by Dijkstra
    /// on an 8-neighbor grid of cell-center nodes at step ≈ `width / res`.
    /// An independent certificate for the zipper length bound.
    pub fn crossing_length_lower_bound(&self, res: usize) -> Result<f64> {
        let h = self.width / res as f64;
        let nx = (self.width / h).ceil() as i64;
        let ny = (self.height / h).ceil() as i64;
        if nx * ny > 8_000_000 {
            return Err(Error::ResourceLimit(format!(
                "crossing grid {nx}×{ny} too large"
            )));
        }
        let idx = |i: i64, j: i64| (i * ny + j) as usize;
        let mut open = vec![false; (nx * ny) as usize];
        for i in 0..nx {
            for j in 0..ny {
                let p = [(i as f64 + 0.5) * h, (j as f64 + 0.5) * h];
                open[idx(i, j)] = point_in_polygon(p, &self.band_image);
            }
        }
        // multi-source Dijkstra from the top row of in-band cells
        let mut dist = vec![f64::INFINITY; (nx * ny) as usize];
        let mut heap = std::collections::BinaryHeap::new();
        for i in 0..nx {
            let j = ny - 1;
            if open[idx(i, j)] {
                dist[idx(i, j)] = 0.0;
                heap.push(HeapEntry {
                    cost: 0.0,
                    node: idx(i, j),
                });
            }
        }
        let neighbor: [(i64, i64); 8] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ];
        while let Some(HeapEntry { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            let i = node as i64 / ny;
            let j = node as i64 % ny;
            for (di, dj) in neighbor {
                let (ii, jj) = (i + di, j + dj);
                if ii < 0 || ii >= nx || jj < 0 || jj >= ny || !open[idx(ii, jj)] {
                    continue;
                }
                let w = h * ((di * di + dj * dj) as f64).sqrt();
                let next = cost + w;
                if next < dist[idx(ii, jj)] {
                    dist[idx(ii, jj)] = next;
                    heap.push(HeapEntry {
                        cost: next,
                        node: idx(ii, jj),
                    });
                }
            }
        }
        let mut best = f64::INFINITY;
        for i in 0..nx {
            if open[idx(i, 0)] {
                best = best.min(dist[idx(i, 0)]);
            }
        }
        if best.is_infinite() {
            return Err(Error::ResolutionTooCoarse(
                "band image not resolved by the crossing grid".into(),
            ));
        }
        Ok(best)
    }

    /// Sup-norm of `forward` on sampled collar points (identity check).
    pub fn collar_identity_error(&self, samples: usize) -> f64 {
        let mut worst = 0.0f64;
        let c = self.collar * 0.9;
        for k in 0..=samples {
            let t = k as f64 / samples as f64;
            let pts = [
                [c * 0.5, t * self.height],
                [self.width - c * 0.5, t * self.height],
                [t * self.width, c * 0.5],
                [t * self.width, self.height - c * 0.5],
            ];
            for p in pts {
                let q = self.forward(p);
                worst = worst.max((q[0] - p[0]).hypot(q[1] - p[1]));
            }
        }
        worst
    }
}

struct HeapEntry {
    cost: f64,
    node: usize,
}
impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cost == other.cost
    }
}
impl Eq for HeapEntry {}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .unwrap_or(std::cmp::Ordering::Equal)
    }
}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn invalid_dimensions_rejected() {
        assert!(s_strip(0.0, 1.0).is_err());
        assert!(zipper(4.0, 1.0, -0.5).is_err());
    }

    #[test]
    fn collar_identity() {
        let s = s_strip(1.0, 1.0).unwrap();
        assert!(s.collar_identity_error(64) < 1e-9);
        let z = zipper(4.0, 1.0, 0.5).unwrap();
        assert!(z.collar_identity_error(64) < 1e-9);
    }

    #[test]
    fn forward_inverse_consistency_on_grid() {
        let z = zipper(3.0, 1.0, 0.5).unwrap();
        for (p, f, _) in z.sample_grid(20) {
            let back = z.inverse(f);
            let err = (back[0] - p[0]).hypot(back[1] - p[1]);
            assert!(err < 1e-6, "p={p:?} err={err}");
        }
    }

    #[test]
    fn band_center_maps_into_band_image() {
        let s = s_strip(1.0, 1.0).unwrap();
        for k in 1..40 {
            let p = [0.5, k as f64 / 40.0];
            let q = s.forward(p);
            assert!(
                point_in_polygon(q, &s.band_image),
                "image {q:?} of band center {p:?} outside the band polygon"
            );
        }
    }

    /// Random monotone crossing paths through the band image must sweep
    /// horizontal variation ≥ a.
    #[test]
    fn s_strip_forces_unit_horizontal_variation() {
        let s = s_strip(1.0, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let rows = 220;
        let mut paths_checked = 0;
        for _ in 0..200 {
            // sample a monotone path: one random in-band point per height
            let mut prev_x: Option<f64> = None;
            let mut variation = 0.0;
            let mut ok = true;
            for r in 0..=rows {
                let y = 1.0 - r as f64 / rows as f64;
                // collect the in-band x-interval(s) at this height by scanning
                let mut xs = Vec::new();
                for i in 0..=400 {
                    let x = i as f64 / 400.0;
                    if point_in_polygon([x, y.clamp(1e-6, 1.0 - 1e-6)], &s.band_image) {
                        xs.push(x);
                    }
                }
                if xs.is_empty() {
                    ok = false;
                    break;
                }
                let x = xs[rng.gen_range(0..xs.len())];
                if let Some(px) = prev_x {
                    variation += (x - px).abs();
                }
                prev_x = Some(x);
            }
            if ok {
                paths_checked += 1;
                assert!(
                    variation >= 1.0,
                    "crossing path with variation {variation} < 1"
                );
            }
        }
        assert!(paths_checked >= 150);
    }

    #[test]
    fn s_strip_variation_bound_independent_of_height() {
        let s = s_strip(1.0, 0.5).unwrap();
        assert!(s.forced_variation >= 1.0);
        // brute-force sampled crossing via the Dijkstra certificate: any
        // crossing is at least as long as its horizontal variation
        let len = s.crossing_length_lower_bound(160).unwrap();
        assert!(len >= 1.0, "shortest crossing {len} < width bound");
    }

    #[test]
    fn zipper_minimal_stack() {
        let z = zipper(0.5, 1.0, 1.0).unwrap();
        // L ≤ a: single S-strip
        assert!(z.forced_variation >= 1.0 && z.forced_variation < 2.0);
    }

    #[test]
    fn zipper_l4_crossing_length() {
        let z = zipper(4.0, 1.0, 0.5).unwrap();
        assert_eq!((z.forced_variation / 1.3).round() as usize, 4);
        let len = z.crossing_length_lower_bound(200).unwrap();
        assert!(
            len >= 4.0 * 0.95,
            "zipper crossing length {len} below 4·(1−0.05)"
        );
    }

    #[test]
    #[ignore = "slow oracle sweep; run explicitly"]
    fn zipper_l10_crossing_length() {
        let z = zipper(10.0, 1.0, 1.0).unwrap();
        let len = z.crossing_length_lower_bound(200).unwrap();
        assert!(len >= 10.0 * 0.95, "zipper crossing length {len} < 9.5");
    }
}
