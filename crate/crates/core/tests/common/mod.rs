//! Independent oracles for the integration tests. Nothing here calls the
//! library's own closed forms.

#![allow(dead_code)]

use std::f64::consts::PI;

/// `Σ_{i ∈ mask} w_i` for every mask, summed bit by bit.
pub fn subset_sums(w: &[f64]) -> Vec<f64> {
    (0u64..1 << w.len())
        .map(|mask| (0..w.len()).filter(|i| mask >> i & 1 == 1).map(|i| w[i]).sum())
        .collect()
}

pub fn brute_total_variation(w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    subset_sums(w)
        .into_iter()
        .map(|a| a - (total - a))
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn brute_max_set(w: &[f64]) -> f64 {
    subset_sums(w).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

pub fn brute_sup_gap(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    subset_sums(&d).into_iter().map(f64::abs).fold(0.0, f64::max)
}

/// Weight of dyadic cell `i` of `2^level` under `r_k dλ`.
pub fn rademacher_weight(level: u32, k: u32, i: usize) -> f64 {
    let width = 1.0 / (1u64 << level) as f64;
    let block = 1usize << (level - k);
    if (i / block).is_multiple_of(2) {
        width
    } else {
        -width
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull by the monotone chain.
pub fn hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut h: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = h.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while h.len() >= start + 2 && cross(h[h.len() - 2], h[h.len() - 1], q) <= 0.0 {
                h.pop();
            }
            h.push(q);
        }
        h.pop();
    }
    h
}

fn seg_dist(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0)
    };
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Euclidean distance from `p` to the convex hull `h` (counter-clockwise).
pub fn dist_to_hull(p: [f64; 2], h: &[[f64; 2]]) -> f64 {
    match h.len() {
        1 => seg_dist(p, h[0], h[0]),
        2 => seg_dist(p, h[0], h[1]),
        k => {
            let inside = (0..k).all(|i| cross(h[i], h[(i + 1) % k], p) >= 0.0);
            if inside {
                return 0.0;
            }
            (0..k).map(|i| seg_dist(p, h[i], h[(i + 1) % k])).fold(f64::INFINITY, f64::min)
        }
    }
}

/// Exact Hausdorff distance of two planar convex hulls: the farthest
/// point of either body from the other is a vertex.
pub fn polygon_hausdorff(a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    let (ha, hb) = (hull(a), hull(b));
    let one = ha.iter().map(|&p| dist_to_hull(p, &hb)).fold(0.0, f64::max);
    let two = hb.iter().map(|&p| dist_to_hull(p, &ha)).fold(0.0, f64::max);
    one.max(two)
}

pub fn support2(points: &[[f64; 2]], u: [f64; 2]) -> f64 {
    points.iter().map(|p| p[0] * u[0] + p[1] * u[1]).fold(f64::NEG_INFINITY, f64::max)
}

pub fn dense_circle(m: usize) -> Vec<[f64; 2]> {
    (0..m)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / m as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

/// `∫_lo^hi` of a step function against a step density, cell by cell.
pub fn step_integral(
    fb: &[f64],
    fv: &[f64],
    db: &[f64],
    dv: &[f64],
    lo: f64,
    hi: f64,
) -> f64 {
    let mut cuts: Vec<f64> = fb.iter().chain(db).copied().filter(|&t| t > lo && t < hi).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let find = |b: &[f64], t: f64| b.windows(2).position(|w| w[0] <= t && t < w[1]).unwrap();
    cuts.windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            fv[find(fb, mid)] * dv[find(db, mid)] * (w[1] - w[0])
        })
        .sum()
}

/// Sorted dyadic breakpoints `0 = b₀ < … < 1` with `cuts` interior points
/// on the `1/32` grid.
pub fn dyadic_breaks(rng: &mut impl rand::Rng, cuts: usize) -> Vec<f64> {
    let mut b: Vec<f64> = (0..cuts).map(|_| rng.gen_range(1..32) as f64 / 32.0).collect();
    b.push(0.0);
    b.push(1.0);
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}
