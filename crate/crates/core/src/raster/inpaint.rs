//! Fast-marching inpainting after Telea (2004).
//!
//! Masked pixels are filled in order of increasing distance from the mask
//! boundary. The distance field `T` is grown with a first-order eikonal
//! solver; each newly reached pixel becomes a normalized weighted mean of the
//! already-known pixels within `radius`. Weights multiply three factors:
//! direction (alignment of the offset with the gradient of `T`), geometric
//! distance (`1/|r|^3`), and level-set distance (`1/(1 + |ΔT|)`).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{Mask, Raster, RasterError};

pub const DEFAULT_INPAINT_RADIUS: u32 = 3;

const KNOWN: u8 = 0;
const BAND: u8 = 1;
const INSIDE: u8 = 2;
const FAR: f64 = 1.0e6;

#[derive(Debug, Clone, Copy)]
struct Entry {
    t: f64,
    seq: u64,
    idx: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // Min-heap on (t, seq) so equal distances pop in insertion order.
    fn cmp(&self, other: &Self) -> Ordering {
        other.t.total_cmp(&self.t).then_with(|| other.seq.cmp(&self.seq))
    }
}

struct MinHeap {
    heap: BinaryHeap<Entry>,
    seq: u64,
}

impl MinHeap {
    fn new() -> Self {
        MinHeap {
            heap: BinaryHeap::new(),
            seq: 0,
        }
    }

    fn push(&mut self, t: f64, idx: usize) {
        self.heap.push(Entry { t, seq: self.seq, idx });
        self.seq += 1;
    }

    fn pop(&mut self) -> Option<Entry> {
        self.heap.pop()
    }
}

struct Grid {
    w: usize,
    h: usize,
}

impl Grid {
    #[inline]
    fn neighbors4(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (x, y) = (idx % self.w, idx / self.w);
        [
            (y > 0).then(|| idx - self.w),
            (x > 0).then(|| idx - 1),
            (x + 1 < self.w).then(|| idx + 1),
            (y + 1 < self.h).then(|| idx + self.w),
        ]
        .into_iter()
        .flatten()
    }
}

/// Inpaints the masked pixels of `img`. Unmasked pixels are returned
/// unchanged. A mask covering the whole image is filled against a synthetic
/// black border.
pub fn telea_inpaint(img: &Raster, mask: &Mask, radius: u32) -> Result<Raster, RasterError> {
    if (mask.width(), mask.height()) != img.dims() {
        return Err(RasterError::ShapeMismatch(
            img.width(),
            img.height(),
            mask.width(),
            mask.height(),
        ));
    }
    let masked = mask.count();
    if masked == 0 {
        return Ok(img.clone());
    }
    if masked == mask.bits().len() {
        tracing::warn!(
            width = img.width(),
            height = img.height(),
            "inpainting mask covers the whole image; filling from a black border"
        );
        return Ok(inpaint_against_black_border(img, radius));
    }
    Ok(inpaint_fmm(img, mask, radius.max(1)))
}

fn inpaint_against_black_border(img: &Raster, radius: u32) -> Raster {
    let (w, h) = img.dims();
    let padded = Raster::filled(w + 2, h + 2, [0, 0, 0]);
    let mut mask = Mask::new(w + 2, h + 2);
    for y in 1..=h {
        for x in 1..=w {
            mask.set(x, y, true);
        }
    }
    let filled = inpaint_fmm(&padded, &mask, radius.max(1));
    Raster::from_fn(w, h, |x, y| filled.get(x + 1, y + 1))
}

fn inpaint_fmm(img: &Raster, mask: &Mask, radius: u32) -> Raster {
    let grid = Grid {
        w: img.width() as usize,
        h: img.height() as usize,
    };
    let n = grid.w * grid.h;
    let bits = mask.bits();

    let mut flags = vec![KNOWN; n];
    let mut t = vec![0.0f64; n];
    let mut heap = MinHeap::new();
    for idx in 0..n {
        if bits[idx] {
            flags[idx] = INSIDE;
            t[idx] = FAR;
        }
    }
    let mut band = Vec::new();
    for idx in 0..n {
        if !bits[idx] && grid.neighbors4(idx).any(|nb| bits[nb]) {
            flags[idx] = BAND;
            band.push(idx);
        }
    }

    outside_distances(&grid, bits, &band, &mut t, f64::from(2 * radius + 2));
    for &idx in &band {
        heap.push(0.0, idx);
    }

    let mut out = img.clone();
    let w = grid.w;
    let r = radius as i64;
    let r2 = r * r;

    while let Some(Entry { idx, .. }) = heap.pop() {
        if flags[idx] == KNOWN {
            continue;
        }
        flags[idx] = KNOWN;
        let neighbors: Vec<usize> = grid.neighbors4(idx).collect();
        for nb in neighbors {
            if flags[nb] != INSIDE {
                continue;
            }
            let (x, y) = ((nb % w) as i64, (nb / w) as i64);
            let dist = solve_eikonal(&grid, &flags, &t, x, y);
            t[nb] = dist;

            let grad = gradient_t(&grid, &flags, &t, x, y);
            let mut acc = [0.0f64; 3];
            let mut total = 0.0f64;
            for ky in (y - r).max(0)..=(y + r).min(grid.h as i64 - 1) {
                for kx in (x - r).max(0)..=(x + r).min(grid.w as i64 - 1) {
                    let k = ky as usize * w + kx as usize;
                    if flags[k] == INSIDE {
                        continue;
                    }
                    let (ry, rx) = ((y - ky) as f64, (x - kx) as f64);
                    let len2 = rx * rx + ry * ry;
                    if len2 == 0.0 || (len2 as i64) > r2 {
                        continue;
                    }
                    let dst = 1.0 / (len2 * len2.sqrt());
                    let lev = 1.0 / (1.0 + (t[k] - dist).abs());
                    let mut dir = rx * grad.0 + ry * grad.1;
                    if dir.abs() <= 0.01 {
                        dir = 1.0e-6;
                    }
                    let weight = (dst * lev * dir).abs();
                    let px = out.get(kx as u32, ky as u32);
                    for c in 0..3 {
                        acc[c] += weight * f64::from(px[c]);
                    }
                    total += weight;
                }
            }
            if total > 0.0 {
                let mut value = [0u8; 3];
                for c in 0..3 {
                    value[c] = (acc[c] / total + 0.5).floor().clamp(0.0, 255.0) as u8;
                }
                out.put(x as u32, y as u32, value);
            }
            flags[nb] = BAND;
            heap.push(dist, nb);
        }
    }
    out
}

/// Marches outward from the band into known pixels, storing negated
/// distances so the level-set factor sees a signed field.
fn outside_distances(grid: &Grid, bits: &[bool], band: &[usize], t: &mut [f64], cap: f64) {
    let n = grid.w * grid.h;
    let mut flags = vec![KNOWN; n];
    let mut dist = vec![FAR; n];
    for idx in 0..n {
        if bits[idx] {
            dist[idx] = 0.0;
        } else {
            flags[idx] = INSIDE;
        }
    }
    let mut heap = MinHeap::new();
    for &idx in band {
        flags[idx] = BAND;
        dist[idx] = 0.0;
        heap.push(0.0, idx);
    }
    while let Some(Entry { idx, t: d, .. }) = heap.pop() {
        if flags[idx] == KNOWN {
            continue;
        }
        flags[idx] = KNOWN;
        if d > cap {
            continue;
        }
        let neighbors: Vec<usize> = grid.neighbors4(idx).collect();
        for nb in neighbors {
            if flags[nb] != INSIDE {
                continue;
            }
            let (x, y) = ((nb % grid.w) as i64, (nb / grid.w) as i64);
            let v = solve_eikonal(grid, &flags, &dist, x, y);
            dist[nb] = v;
            flags[nb] = BAND;
            heap.push(v, nb);
        }
    }
    for idx in 0..n {
        if !bits[idx] {
            t[idx] = -dist[idx];
        }
    }
}

fn at(grid: &Grid, x: i64, y: i64) -> Option<usize> {
    (x >= 0 && y >= 0 && (x as usize) < grid.w && (y as usize) < grid.h).then(|| y as usize * grid.w + x as usize)
}

fn solve_eikonal(grid: &Grid, flags: &[u8], t: &[f64], x: i64, y: i64) -> f64 {
    let pair = |a: Option<usize>, b: Option<usize>| -> f64 {
        let known = |i: Option<usize>| i.filter(|&i| flags[i] != INSIDE).map(|i| t[i]);
        match (known(a), known(b)) {
            (Some(t1), Some(t2)) => {
                if (t1 - t2).abs() >= 1.0 {
                    1.0 + t1.min(t2)
                } else {
                    (t1 + t2 + (2.0 - (t1 - t2) * (t1 - t2)).sqrt()) * 0.5
                }
            }
            (Some(t1), None) => 1.0 + t1,
            (None, Some(t2)) => 1.0 + t2,
            (None, None) => FAR,
        }
    };
    let up = at(grid, x, y - 1);
    let down = at(grid, x, y + 1);
    let left = at(grid, x - 1, y);
    let right = at(grid, x + 1, y);
    pair(up, left).min(pair(down, left)).min(pair(up, right)).min(pair(down, right))
}

/// Finite-difference gradient of `T` using only non-inside neighbors,
/// returned as `(d/dx, d/dy)`.
fn gradient_t(grid: &Grid, flags: &[u8], t: &[f64], x: i64, y: i64) -> (f64, f64) {
    let here = t[y as usize * grid.w + x as usize];
    let axis = |prev: Option<usize>, next: Option<usize>| -> f64 {
        let ok = |i: Option<usize>| i.filter(|&i| flags[i] != INSIDE);
        match (ok(prev), ok(next)) {
            (Some(p), Some(n)) => (t[n] - t[p]) * 0.5,
            (None, Some(n)) => t[n] - here,
            (Some(p), None) => here - t[p],
            (None, None) => 0.0,
        }
    };
    (
        axis(at(grid, x - 1, y), at(grid, x + 1, y)),
        axis(at(grid, x, y - 1), at(grid, x, y + 1)),
    )
}
