//! Gauge (McShane) integration of step functions and step multifunctions on
//! `[0, 1]` against piecewise-constant densities.
//!
//! Cells are `[a, b)` except the last, which is `[a, 1]`; step functions are
//! right-continuous at their breakpoints.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::certificate::{Decay, DecayCertificate};
use crate::convex::{minkowski_combine, DirectionGrid, Polytope};
use crate::error::{check_finite, invalid, Error, Result};
use crate::integrability::effective_horizon;
use crate::measure::dot;
use crate::report::{doubles, stalls, AuxCheck, HypothesisResult, NamedCurve, TheoremReport, Verdict};

/// Points at which pointwise convergence is checked: `(k + ½) / 1024`.
pub const EVAL_POINTS: usize = 1024;

/// Dyadic level of the test grid added to every interval algebra.
pub const TEST_GRID_LEVEL: u32 = 5;

/// Thresholds at which equi-integrability is checked inside theorem checks.
pub const EQUI_EPSILONS: [f64; 2] = [1e-2, 1e-4];

/// Gauge constant: the inner radius near a jump is `ε / (GAUGE_FACTOR · K · ‖f‖∞ · ρ_max)`.
pub const GAUGE_FACTOR: f64 = 24.0;

const OSCILLATION_MAX_LEVEL: usize = 12;

fn check_breaks(breaks: &[f64]) -> Result<()> {
    check_finite(breaks)?;
    if breaks.len() < 2 || breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
        return Err(invalid("breakpoints must start at 0 and end at 1"));
    }
    if breaks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("breakpoints must be strictly increasing"));
    }
    Ok(())
}

/// Index of the cell containing `t`, with the last cell closed.
fn cell_index(breaks: &[f64], t: f64) -> usize {
    let k = breaks.partition_point(|&b| b <= t);
    k.saturating_sub(1).min(breaks.len() - 2)
}

/// Sorted union of two breakpoint lists.
fn refine(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x <= y => {
                i += 1;
                if x == y {
                    j += 1;
                }
                x
            }
            (Some(_), Some(&y)) => {
                j += 1;
                y
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        if out.last() != Some(&next) {
            out.push(next);
        }
    }
    out
}

fn check_point(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(invalid(format!("point {t} is outside [0, 1]")))
    }
}

/// A finite union of subintervals `[lo, hi)` of `[0, 1]`, sorted and disjoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    pieces: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn new(mut pieces: Vec<(f64, f64)>) -> Result<Self> {
        for &(lo, hi) in &pieces {
            check_finite(&[lo, hi])?;
            if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                return Err(invalid(format!("[{lo}, {hi}) is not a subinterval of [0, 1]")));
            }
        }
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pieces.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(invalid("interval pieces overlap"));
        }
        Ok(IntervalSet { pieces })
    }

    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        IntervalSet::new(vec![(lo, hi)])
    }

    pub fn unit() -> Self {
        IntervalSet {
            pieces: vec![(0.0, 1.0)],
        }
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(|(a, b)| b - a).sum()
    }

    fn endpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.pieces.iter().flat_map(|&(a, b)| [a, b]).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

/// `f: [0, 1] → R^d`, constant on each cell.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFn {
    breaks: Vec<f64>,
    dim: usize,
    values: Vec<f64>,
}

impl StepFn {
    pub fn new(breaks: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        check_breaks(&breaks)?;
        if values.len() != breaks.len() - 1 {
            return Err(Error::DimensionMismatch {
                expected: breaks.len() - 1,
                got: values.len(),
            });
        }
        let dim = values[0].len();
        if dim == 0 {
            return Err(invalid("step function values must have dimension at least 1"));
        }
        if let Some(v) = values.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
        let values: Vec<f64> = values.into_iter().flatten().collect();
        check_finite(&values)?;
        Ok(StepFn { breaks, dim, values })
    }

    pub fn scalar(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        StepFn::new(breaks, values.into_iter().map(|v| vec![v]).collect())
    }

    pub fn constant(value: &[f64]) -> Result<Self> {
        StepFn::new(vec![0.0, 1.0], vec![value.to_vec()])
    }

    /// `value · 1_[lo, hi)`; `hi = 1` includes the endpoint.
    pub fn indicator(lo: f64, hi: f64, value: &[f64]) -> Result<Self> {
        let zero = vec![0.0; value.len()];
        let (lo, hi) = (lo.clamp(0.0, 1.0), hi.clamp(0.0, 1.0));
        if lo >= hi {
            return StepFn::constant(&zero);
        }
        let mut breaks = vec![0.0];
        let mut values = Vec::new();
        if lo > 0.0 {
            breaks.push(lo);
            values.push(zero.clone());
        }
        values.push(value.to_vec());
        if hi < 1.0 {
            breaks.push(hi);
            values.push(zero);
        }
        breaks.push(1.0);
        StepFn::new(breaks, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn n_cells(&self) -> usize {
        self.breaks.len() - 1
    }

    pub fn cell_value(&self, cell: usize) -> &[f64] {
        &self.values[cell * self.dim..(cell + 1) * self.dim]
    }

    pub fn eval(&self, t: f64) -> Result<&[f64]> {
        check_point(t)?;
        Ok(self.cell_value(cell_index(&self.breaks, t)))
    }

    fn at_unchecked(&self, t: f64) -> &[f64] {
        self.cell_value(cell_index(&self.breaks, t))
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| dot(self.cell_value(c), self.cell_value(c)).sqrt())
            .fold(0.0, f64::max)
    }

    /// Interior breakpoints where the value actually changes.
    pub fn jumps(&self) -> Vec<f64> {
        (1..self.n_cells())
            .filter(|&c| self.cell_value(c) != self.cell_value(c - 1))
            .map(|c| self.breaks[c])
            .collect()
    }

    fn combine(&self, other: &StepFn, f: impl Fn(&[f64], &[f64]) -> Vec<f64>) -> Result<StepFn> {
        let breaks = refine(&self.breaks, &other.breaks);
        let values = breaks
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                f(self.at_unchecked(mid), other.at_unchecked(mid))
            })
            .collect();
        StepFn::new(breaks, values)
    }

    /// `self + t · other`.
    pub fn axpy(&self, t: f64, other: &StepFn) -> Result<StepFn> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        self.combine(other, |a, b| a.iter().zip(b).map(|(x, y)| x + t * y).collect())
    }

    pub fn sub(&self, other: &StepFn) -> Result<StepFn> {
        self.axpy(-1.0, other)
    }

    pub fn project(&self, u: &[f64]) -> Result<StepFn> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        let values = (0..self.n_cells()).map(|c| vec![dot(self.cell_value(c), u)]).collect();
        StepFn::new(self.breaks.clone(), values)
    }
}

#[derive(Serialize, Deserialize)]
struct StepFnRepr {
    breaks: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl Serialize for StepFn {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StepFnRepr {
            breaks: self.breaks.clone(),
            values: self.values.chunks(self.dim).map(<[f64]>::to_vec).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StepFn {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let r = StepFnRepr::deserialize(deserializer)?;
        StepFn::new(r.breaks, r.values).map_err(serde::de::Error::custom)
    }
}

/// `m(A) = ∫_A ρ` for a nonnegative piecewise-constant density `ρ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityMeasure {
    breaks: Vec<f64>,
    densities: Vec<f64>,
}

impl DensityMeasure {
    pub fn new(breaks: Vec<f64>, densities: Vec<f64>) -> Result<Self> {
        check_breaks(&breaks)?;
        check_finite(&densities)?;
        if densities.len() != breaks.len() - 1 {
            return Err(Error::DimensionMismatch {
                expected: breaks.len() - 1,
                got: densities.len(),
            });
        }
        if let Some((i, &d)) = densities.iter().enumerate().find(|(_, d)| **d < 0.0) {
            return Err(Error::NegativeMeasure { atom: i, weight: d });
        }
        Ok(DensityMeasure { breaks, densities })
    }

    pub fn lebesgue() -> Self {
        DensityMeasure {
            breaks: vec![0.0, 1.0],
            densities: vec![1.0],
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn density_at(&self, t: f64) -> f64 {
        self.densities[cell_index(&self.breaks, t)]
    }

    pub fn max_density(&self) -> f64 {
        self.densities.iter().copied().fold(0.0, f64::max)
    }

    /// `m([lo, hi))`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        if lo >= hi {
            return 0.0;
        }
        let first = cell_index(&self.breaks, lo);
        let mut total = 0.0;
        for c in first..self.densities.len() {
            let (a, b) = (self.breaks[c], self.breaks[c + 1]);
            if a >= hi {
                break;
            }
            total += self.densities[c] * (b.min(hi) - a.max(lo));
        }
        total
    }

    pub fn measure(&self, set: &IntervalSet) -> f64 {
        set.pieces.iter().map(|&(a, b)| self.mass(a, b)).sum()
    }

    pub fn total(&self) -> f64 {
        self.mass(0.0, 1.0)
    }

    fn combine(&self, other: &DensityMeasure, f: impl Fn(f64, f64) -> f64) -> (Vec<f64>, Vec<f64>) {
        let breaks = refine(&self.breaks, &other.breaks);
        let dens = breaks
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                f(self.density_at(mid), other.density_at(mid))
            })
            .collect();
        (breaks, dens)
    }

    /// `(1 - t) · self + t · other`.
    pub fn lerp(&self, other: &DensityMeasure, t: f64) -> Result<DensityMeasure> {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(format!("interpolation weight {t} is outside [0, 1]")));
        }
        let (b, d) = self.combine(other, |x, y| (1.0 - t) * x + t * y);
        DensityMeasure::new(b, d)
    }

    /// `|self - other|([0, 1])`.
    pub fn tv_distance(&self, other: &DensityMeasure) -> f64 {
        let (b, d) = self.combine(other, |x, y| (x - y).abs());
        b.windows(2).zip(d).map(|(w, d)| d * (w[1] - w[0])).sum()
    }
}

impl<'de> Deserialize<'de> for DensityMeasure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            breaks: Vec<f64>,
            densities: Vec<f64>,
        }
        let r = Repr::deserialize(deserializer)?;
        DensityMeasure::new(r.breaks, r.densities).map_err(serde::de::Error::custom)
    }
}

/// `∫_A f dm`, exact on the common refinement.
pub fn integral(f: &StepFn, m: &DensityMeasure, set: &IntervalSet) -> Vec<f64> {
    let mut acc = vec![0.0; f.dim];
    let grid = refine(&f.breaks, &m.breaks);
    for &(lo, hi) in &set.pieces {
        let start = grid.partition_point(|&b| b <= lo).saturating_sub(1);
        for w in grid[start..].windows(2) {
            let (a, b) = (w[0].max(lo), w[1].min(hi));
            if a >= hi {
                break;
            }
            if a >= b {
                continue;
            }
            let mid = 0.5 * (a + b);
            let mass = m.density_at(mid) * (b - a);
            for (x, v) in acc.iter_mut().zip(f.at_unchecked(mid)) {
                *x += v * mass;
            }
        }
    }
    acc
}

/// A piecewise-constant gauge `Δ(t) = (t - δ(t), t + δ(t)) ∩ [0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Gauge {
    breaks: Vec<f64>,
    radii: Vec<f64>,
    #[serde(skip)]
    min_radius: f64,
}

impl Gauge {
    pub fn new(breaks: Vec<f64>, radii: Vec<f64>) -> Result<Self> {
        check_breaks(&breaks)?;
        check_finite(&radii)?;
        if radii.len() != breaks.len() - 1 {
            return Err(Error::DimensionMismatch {
                expected: breaks.len() - 1,
                got: radii.len(),
            });
        }
        if radii.iter().any(|r| *r <= 0.0) {
            return Err(invalid("gauge radii must be positive"));
        }
        let min_radius = radii.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Gauge {
            breaks,
            radii,
            min_radius,
        })
    }

    pub fn constant(radius: f64) -> Result<Self> {
        Gauge::new(vec![0.0, 1.0], vec![radius])
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn min_radius(&self) -> f64 {
        self.min_radius
    }

    pub fn radius(&self, t: f64) -> f64 {
        self.radii[cell_index(&self.breaks, t)]
    }

    /// Whether `[lo, hi) ⊂ Δ(t)`.
    pub fn admits(&self, lo: f64, hi: f64, t: f64) -> bool {
        let r = self.radius(t);
        lo > t - r && hi < t + r
    }

    /// The pointwise minimum of two gauges.
    pub fn min(&self, other: &Gauge) -> Gauge {
        let breaks = refine(&self.breaks, &other.breaks);
        let radii = breaks
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                self.radius(mid).min(other.radius(mid))
            })
            .collect();
        Gauge::new(breaks, radii).expect("minimum of valid gauges")
    }
}

impl<'de> Deserialize<'de> for Gauge {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            breaks: Vec<f64>,
            radii: Vec<f64>,
        }
        let r = Repr::deserialize(deserializer)?;
        Gauge::new(r.breaks, r.radii).map_err(serde::de::Error::custom)
    }
}

/// The graded gauge around the points `jumps`: radius `η` within `2η` of a
/// jump, and `2^(k-1) η ≤ d/2` at distance `d ∈ [2^k η, 2^(k+1) η)`.
pub fn graded_gauge(jumps: &[f64], eta: f64) -> Result<Gauge> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(invalid(format!("gauge radius must be positive, got {eta}")));
    }
    if jumps.is_empty() {
        return Gauge::constant(1.0);
    }
    let mut points = vec![0.0, 1.0];
    for &b in jumps {
        points.push(b);
        let mut r = 2.0 * eta;
        while r < 1.0 {
            points.extend([b - r, b + r]);
            r *= 2.0;
        }
    }
    points.retain(|p| (0.0..=1.0).contains(p));
    points.sort_by(f64::total_cmp);
    points.dedup();
    let step = |d: f64| {
        let d = d * (1.0 - 1e-12);
        if d < 2.0 * eta {
            return eta;
        }
        let mut r = eta;
        while 4.0 * r <= d {
            r *= 2.0;
        }
        r.min(1.0)
    };
    let radii = points
        .windows(2)
        .map(|w| {
            jumps
                .iter()
                .map(|&b| {
                    if b <= w[0] {
                        step(w[0] - b)
                    } else if b >= w[1] {
                        step(b - w[1])
                    } else {
                        eta
                    }
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Gauge::new(points, radii)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaggedCell {
    pub set: IntervalSet,
    pub tag: f64,
}

/// A finite strict McShane partition: disjoint cells covering `[0, 1]`, each
/// with a tag that need not lie in its cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaggedPartition {
    pub cells: Vec<TaggedCell>,
}

impl TaggedPartition {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Checks that the cells tile `[0, 1]` and that every cell lies in its
    /// tag's gauge neighbourhood.
    pub fn verify(&self, gauge: &Gauge) -> Result<()> {
        let mut pieces: Vec<(f64, f64)> = Vec::new();
        for (i, c) in self.cells.iter().enumerate() {
            check_point(c.tag)?;
            for &(lo, hi) in c.set.pieces() {
                if !gauge.admits(lo, hi, c.tag) {
                    return Err(Error::Invariant(format!(
                        "cell {i} piece [{lo}, {hi}) is not inside the gauge neighbourhood of {}",
                        c.tag
                    )));
                }
                pieces.push((lo, hi));
            }
        }
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut at = 0.0;
        for (lo, hi) in pieces {
            if lo != at {
                return Err(Error::Invariant(format!("cells do not tile [0, 1] at {at}")));
            }
            at = hi;
        }
        if at != 1.0 {
            return Err(Error::Invariant(format!("cells stop at {at}")));
        }
        Ok(())
    }
}

fn cousin_cells(gauge: &Gauge, lo: f64, hi: f64, refinement: usize, out: &mut Vec<TaggedCell>) {
    let start = cell_index(&gauge.breaks, lo);
    for c in start..gauge.radii.len() {
        let (a, b) = (gauge.breaks[c].max(lo), gauge.breaks[c + 1].min(hi));
        if a >= hi {
            break;
        }
        if a >= b {
            continue;
        }
        let max_len = gauge.radii[c] / refinement as f64;
        let k = ((b - a) / max_len).floor() as usize + 1;
        let len = (b - a) / k as f64;
        let mut x = a;
        for j in 0..k {
            let y = if j + 1 == k { b } else { a + (j + 1) as f64 * len };
            out.push(TaggedCell {
                set: IntervalSet { pieces: vec![(x, y)] },
                tag: 0.5 * (x + y),
            });
            x = y;
        }
    }
}

/// Cousin-style construction: each gauge cell is split into intervals
/// shorter than its radius over `refinement`, tagged at their midpoints.
pub fn subordinate_partition(gauge: &Gauge, refinement: usize) -> TaggedPartition {
    let mut cells = Vec::new();
    cousin_cells(gauge, 0.0, 1.0, refinement.max(1), &mut cells);
    TaggedPartition { cells }
}

/// A random partition subordinate to `gauge`: random cell lengths, tags
/// drawn anywhere in the admissible region, occasional two-piece cells.
pub fn random_subordinate_partition(rng: &mut impl Rng, gauge: &Gauge) -> TaggedPartition {
    let mut cells: Vec<TaggedCell> = Vec::new();
    let mut a = 0.0f64;
    while a < 1.0 {
        let r = gauge.radius(a);
        let mut chosen = None;
        for _ in 0..8 {
            let t = if rng.gen_bool(0.9) {
                (a + rng.gen_range(-r..r)).clamp(0.0, 1.0)
            } else {
                rng.gen_range(0.0..=1.0)
            };
            let rt = gauge.radius(t);
            if a > t - rt && a < t + rt {
                chosen = Some((t, rt));
                break;
            }
        }
        let (mut t, rt) = chosen.unwrap_or((a, r));
        let reach = t + rt;
        let mut b = if reach > 1.0 && rng.gen_bool(0.3) {
            1.0
        } else {
            a + rng.gen_range(0.3..1.0) * (reach.min(1.0) - a)
        };
        if b <= a || !gauge.admits(a, b, t) {
            t = a;
            b = (a + 0.5 * r).min(1.0);
        }
        cells.push(TaggedCell {
            set: IntervalSet { pieces: vec![(a, b)] },
            tag: t,
        });
        a = b;
    }
    let mut i = 0;
    while i + 2 < cells.len() {
        let (lo, hi) = cells[i + 2].set.pieces[0];
        if rng.gen_bool(0.1) && gauge.admits(lo, hi, cells[i].tag) {
            let moved = cells.remove(i + 2);
            cells[i].set.pieces.extend(moved.set.pieces);
        }
        i += 1;
    }
    TaggedPartition { cells }
}

/// `Σᵢ f(tᵢ) m(Aᵢ)`.
pub fn riemann_sum(f: &StepFn, m: &DensityMeasure, p: &TaggedPartition) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; f.dim];
    for c in &p.cells {
        let v = f.eval(c.tag)?;
        let mass = m.measure(&c.set);
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x * mass;
        }
    }
    Ok(acc)
}

/// The McShane integral of a step function, with its certified gauges.
#[derive(Clone, Debug, PartialEq)]
pub struct McShaneIntegral {
    pub value: Vec<f64>,
    jumps: Vec<f64>,
    sup_norm: f64,
    max_density: f64,
}

impl McShaneIntegral {
    /// A gauge such that every subordinate partition's Riemann sum lies
    /// within `epsilon` of the integral.
    pub fn gauge_for(&self, epsilon: f64) -> Result<Gauge> {
        if !(epsilon > 0.0) {
            return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        let scale = GAUGE_FACTOR * self.jumps.len() as f64 * self.sup_norm * self.max_density;
        if scale == 0.0 {
            return Gauge::constant(1.0);
        }
        graded_gauge(&self.jumps, epsilon / scale)
    }

    pub fn inner_radius(&self, epsilon: f64) -> f64 {
        let scale = GAUGE_FACTOR * self.jumps.len() as f64 * self.sup_norm * self.max_density;
        if scale == 0.0 {
            1.0
        } else {
            epsilon / scale
        }
    }
}

pub fn ms_integral(f: &StepFn, m: &DensityMeasure) -> McShaneIntegral {
    McShaneIntegral {
        value: integral(f, m, &IntervalSet::unit()),
        jumps: f.jumps(),
        sup_norm: f.sup_norm(),
        max_density: m.max_density(),
    }
}

/// `Γ: [0, 1] → polytopes in R^d`, constant on each cell.
#[derive(Clone, Debug, PartialEq)]
pub struct StepMulti {
    breaks: Vec<f64>,
    dim: usize,
    bodies: Vec<Polytope>,
}

impl StepMulti {
    pub fn new(breaks: Vec<f64>, bodies: Vec<Polytope>) -> Result<Self> {
        check_breaks(&breaks)?;
        if bodies.len() != breaks.len() - 1 {
            return Err(Error::DimensionMismatch {
                expected: breaks.len() - 1,
                got: bodies.len(),
            });
        }
        let dim = bodies[0].dim();
        if let Some(b) = bodies.iter().find(|b| b.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: b.dim() });
        }
        Ok(StepMulti { breaks, dim, bodies })
    }

    pub fn constant(body: &Polytope) -> Self {
        StepMulti {
            breaks: vec![0.0, 1.0],
            dim: body.dim(),
            bodies: vec![body.clone()],
        }
    }

    pub fn singletons(f: &StepFn) -> Result<Self> {
        let bodies = (0..f.n_cells())
            .map(|c| Polytope::point(f.cell_value(c)))
            .collect::<Result<Vec<_>>>()?;
        StepMulti::new(f.breaks.clone(), bodies)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn bodies(&self) -> &[Polytope] {
        &self.bodies
    }

    pub fn body_at(&self, t: f64) -> Result<&Polytope> {
        check_point(t)?;
        Ok(&self.bodies[cell_index(&self.breaks, t)])
    }

    pub fn radius(&self) -> f64 {
        self.bodies.iter().map(Polytope::radius).fold(0.0, f64::max)
    }

    pub fn jumps(&self) -> Vec<f64> {
        (1..self.bodies.len())
            .filter(|&c| self.bodies[c] != self.bodies[c - 1])
            .map(|c| self.breaks[c])
            .collect()
    }

    pub fn scale(&self, lambda: f64) -> Result<StepMulti> {
        let bodies = self.bodies.iter().map(|b| b.scale(lambda)).collect::<Result<Vec<_>>>()?;
        StepMulti::new(self.breaks.clone(), bodies)
    }

    /// `t ↦ Γ(t) + shift(t)`.
    pub fn translate_by(&self, shift: &StepFn) -> Result<StepMulti> {
        if shift.dim != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: shift.dim,
            });
        }
        let breaks = refine(&self.breaks, &shift.breaks);
        let bodies = breaks
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                self.bodies[cell_index(&self.breaks, mid)].translate(shift.at_unchecked(mid))
            })
            .collect::<Result<Vec<_>>>()?;
        StepMulti::new(breaks, bodies)
    }

    /// `t ↦ s(u, Γ(t))`.
    pub fn support_fn(&self, u: &[f64]) -> Result<StepFn> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: u.len(),
            });
        }
        let values = self.bodies.iter().map(|b| vec![b.support(u)]).collect();
        StepFn::new(self.breaks.clone(), values)
    }

    /// `i ∘ Γ`: the support vector on `grid` in each cell.
    pub fn embed(&self, grid: &DirectionGrid) -> Result<StepFn> {
        if grid.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: grid.dim(),
            });
        }
        let values = self
            .bodies
            .iter()
            .map(|b| grid.directions().map(|u| b.support(u)).collect())
            .collect();
        StepFn::new(self.breaks.clone(), values)
    }
}

#[derive(Serialize, Deserialize)]
struct StepMultiRepr {
    breaks: Vec<f64>,
    bodies: Vec<Polytope>,
}

impl Serialize for StepMulti {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StepMultiRepr {
            breaks: self.breaks.clone(),
            bodies: self.bodies.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StepMulti {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let r = StepMultiRepr::deserialize(deserializer)?;
        StepMulti::new(r.breaks, r.bodies).map_err(serde::de::Error::custom)
    }
}

/// `Σ_cells m(cell) · Γ(cell)` as a polytope (`d ≤ 2`).
pub fn ms_integral_body(g: &StepMulti, m: &DensityMeasure) -> Result<Polytope> {
    let masses: Vec<f64> = g.breaks.windows(2).map(|w| m.mass(w[0], w[1])).collect();
    minkowski_combine(&masses, &g.bodies)
}

/// `Σᵢ Γ(tᵢ) m(Aᵢ)` as a polytope (`d ≤ 2`).
pub fn riemann_sum_multi(g: &StepMulti, m: &DensityMeasure, p: &TaggedPartition) -> Result<Polytope> {
    let mut masses = Vec::with_capacity(p.len());
    let mut bodies = Vec::with_capacity(p.len());
    for c in &p.cells {
        bodies.push(g.body_at(c.tag)?.clone());
        masses.push(m.measure(&c.set));
    }
    minkowski_combine(&masses, &bodies)
}

/// Atoms `[p_k, p_{k+1})` of the finite algebra generated by a point set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalAlgebra {
    points: Vec<f64>,
}

impl IntervalAlgebra {
    pub fn generated(points: &[f64]) -> Self {
        let mut p: Vec<f64> = points.iter().copied().filter(|x| (0.0..=1.0).contains(x)).collect();
        p.extend([0.0, 1.0]);
        p.sort_by(f64::total_cmp);
        p.dedup();
        IntervalAlgebra { points: p }
    }

    pub fn n_atoms(&self) -> usize {
        self.points.len() - 1
    }

    pub fn atom(&self, k: usize) -> IntervalSet {
        IntervalSet {
            pieces: vec![(self.points[k], self.points[k + 1])],
        }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// The union of the atoms selected by `mask`.
    pub fn set(&self, mask: &[bool]) -> Result<IntervalSet> {
        let mut pieces: Vec<(f64, f64)> = Vec::new();
        for (k, _) in mask.iter().enumerate().filter(|(_, b)| **b) {
            let (a, b) = (self.points[k], self.points[k + 1]);
            match pieces.last_mut() {
                Some(last) if last.1 == a => last.1 = b,
                _ => pieces.push((a, b)),
            }
        }
        if pieces.is_empty() {
            return Err(invalid("the empty set has no interval representation"));
        }
        Ok(IntervalSet { pieces })
    }

    pub fn random_set(&self, rng: &mut impl Rng) -> IntervalSet {
        loop {
            let mask: Vec<bool> = (0..self.n_atoms()).map(|_| rng.gen_bool(0.5)).collect();
            if let Ok(s) = self.set(&mask) {
                return s;
            }
        }
    }
}

fn dyadic_points(level: u32) -> Vec<f64> {
    let n = 1usize << level;
    (0..=n).map(|k| k as f64 / n as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
enum DensityRule {
    Constant,
    ConvexMix { mu: DensityMeasure, rate: Decay },
    /// `ρₙ = ρ (1 + rₙ)` with `rₙ = ±1` on the halves of level-`n` dyadic cells.
    Oscillating,
}

/// A sequence `(mₙ)` of density measures with limit `m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityFamily {
    name: String,
    limit: DensityMeasure,
    #[serde(flatten)]
    rule: DensityRule,
}

impl DensityFamily {
    pub fn constant(m: &DensityMeasure) -> Self {
        DensityFamily {
            name: "constant".into(),
            limit: m.clone(),
            rule: DensityRule::Constant,
        }
    }

    /// `mₙ = (1 - aₙ) m + aₙ μ`.
    pub fn convex_mix(m: &DensityMeasure, mu: &DensityMeasure, rate: Decay) -> Result<Self> {
        Ok(DensityFamily {
            name: "convex_mix".into(),
            limit: m.clone(),
            rule: DensityRule::ConvexMix {
                mu: mu.clone(),
                rate: rate.validated()?,
            },
        })
    }

    /// Setwise convergent on every fixed interval but at total variation
    /// distance `m([0, 1])` from the limit.
    pub fn oscillating(m: &DensityMeasure) -> Self {
        DensityFamily {
            name: "oscillating".into(),
            limit: m.clone(),
            rule: DensityRule::Oscillating,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn limit(&self) -> &DensityMeasure {
        &self.limit
    }

    pub fn max_index(&self) -> Option<usize> {
        match self.rule {
            DensityRule::Oscillating => Some(OSCILLATION_MAX_LEVEL),
            _ => None,
        }
    }

    pub fn at(&self, n: usize) -> Result<DensityMeasure> {
        if n == 0 || self.max_index().is_some_and(|k| n > k) {
            return Err(Error::IndexOutOfRange {
                index: n,
                max: self.max_index().unwrap_or(usize::MAX),
            });
        }
        match &self.rule {
            DensityRule::Constant => Ok(self.limit.clone()),
            DensityRule::ConvexMix { mu, rate } => self.limit.lerp(mu, rate.weight(n)),
            DensityRule::Oscillating => {
                let breaks = refine(&self.limit.breaks, &dyadic_points(n as u32 + 1));
                let cells = (1u64 << (n + 1)) as f64;
                let dens = breaks
                    .windows(2)
                    .map(|w| {
                        let mid = 0.5 * (w[0] + w[1]);
                        let k = (mid * cells).floor() as u64;
                        let sign = if k.is_multiple_of(2) { 2.0 } else { 0.0 };
                        self.limit.density_at(mid) * sign
                    })
                    .collect();
                DensityMeasure::new(breaks, dens)
            }
        }
    }

    /// `sup_n mₙ([0, 1])`.
    pub fn mass_bound(&self) -> f64 {
        match &self.rule {
            DensityRule::Constant => self.limit.total(),
            DensityRule::ConvexMix { mu, .. } => self.limit.total().max(mu.total()),
            DensityRule::Oscillating => 2.0 * self.limit.total(),
        }
    }

    /// `sup_n max ρₙ`.
    pub fn density_bound(&self) -> f64 {
        match &self.rule {
            DensityRule::Constant => self.limit.max_density(),
            DensityRule::ConvexMix { mu, .. } => self.limit.max_density().max(mu.max_density()),
            DensityRule::Oscillating => 2.0 * self.limit.max_density(),
        }
    }

    pub fn tv_cert(&self) -> Option<DecayCertificate> {
        match &self.rule {
            DensityRule::Constant => Some(DecayCertificate::zero("constant")),
            DensityRule::ConvexMix { mu, rate } => Some(DecayCertificate {
                bound: rate.scale(mu.tv_distance(&self.limit)),
                description: "aₙ · |μ - m|([0, 1])".into(),
            }),
            DensityRule::Oscillating => None,
        }
    }

    /// A bound on `sup_A |mₙ(A) - m(A)|` over an algebra refining the
    /// breakpoints of the limit.
    pub fn setwise_cert(&self, algebra: &IntervalAlgebra) -> Option<DecayCertificate> {
        match &self.rule {
            DensityRule::Oscillating => Some(DecayCertificate {
                bound: Decay::Geometric {
                    c: 0.5 * algebra.n_atoms() as f64 * self.limit.max_density(),
                    q: 0.5,
                },
                description: "atoms · ρ_max · 2^-(n+1)".into(),
            }),
            _ => self.tv_cert(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
enum StepRule {
    Constant,
    Perturbed { g: StepFn, rate: Decay },
    /// `fₙ = base + h · 1_[p + aₙ, 1]`, limit `base + h · 1_[p, 1]`.
    Drift { base: StepFn, at: f64, height: Vec<f64>, rate: Decay },
    /// `fₙ = base + n h · 1_[p, p + n⁻²)`, limit `base`.
    Spike { at: f64, height: Vec<f64> },
    Support { multi: Box<StepMultiFamily>, u: Vec<f64> },
    Embedded {
        multi: Box<StepMultiFamily>,
        #[serde(skip)]
        grid: Arc<DirectionGrid>,
    },
}

/// A sequence `(fₙ)` of step functions with limit `f`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepFamily {
    name: String,
    limit: StepFn,
    #[serde(flatten)]
    rule: StepRule,
}

impl StepFamily {
    pub fn constant(f: &StepFn) -> Self {
        StepFamily {
            name: "constant".into(),
            limit: f.clone(),
            rule: StepRule::Constant,
        }
    }

    /// `fₙ = f + aₙ g`.
    pub fn perturbed(f: &StepFn, g: &StepFn, rate: Decay) -> Result<Self> {
        f.axpy(1.0, g)?;
        Ok(StepFamily {
            name: "perturbed".into(),
            limit: f.clone(),
            rule: StepRule::Perturbed {
                g: g.clone(),
                rate: rate.validated()?,
            },
        })
    }

    /// A jump of size `height` at `at + aₙ` drifting to `at`.
    pub fn drift(base: &StepFn, at: f64, height: &[f64], rate: Decay) -> Result<Self> {
        if !(0.0 < at && at < 1.0) {
            return Err(invalid(format!("drift point {at} must lie in (0, 1)")));
        }
        let limit = base.axpy(1.0, &StepFn::indicator(at, 1.0, height)?)?;
        Ok(StepFamily {
            name: "drift".into(),
            limit,
            rule: StepRule::Drift {
                base: base.clone(),
                at,
                height: height.to_vec(),
                rate: rate.validated()?,
            },
        })
    }

    /// A spike of height `n · height` on `[at, at + n⁻²)`.
    pub fn spike(base: &StepFn, at: f64, height: &[f64]) -> Result<Self> {
        if !(0.0 < at && at < 1.0) {
            return Err(invalid(format!("spike point {at} must lie in (0, 1)")));
        }
        if height.len() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                got: height.len(),
            });
        }
        Ok(StepFamily {
            name: "spike".into(),
            limit: base.clone(),
            rule: StepRule::Spike {
                at,
                height: height.to_vec(),
            },
        })
    }

    /// `fₙ = s(u, Γₙ(·))`.
    pub fn support(multi: &StepMultiFamily, u: &[f64]) -> Result<Self> {
        Ok(StepFamily {
            name: format!("{} · u={u:?}", multi.name),
            limit: multi.limit.support_fn(u)?,
            rule: StepRule::Support {
                multi: Box::new(multi.clone()),
                u: u.to_vec(),
            },
        })
    }

    /// `fₙ = i ∘ Γₙ` on `grid`.
    pub fn embedded(multi: &StepMultiFamily, grid: &Arc<DirectionGrid>) -> Result<Self> {
        Ok(StepFamily {
            name: format!("i∘{}", multi.name),
            limit: multi.limit.embed(grid)?,
            rule: StepRule::Embedded {
                multi: Box::new(multi.clone()),
                grid: grid.clone(),
            },
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn limit(&self) -> &StepFn {
        &self.limit
    }

    pub fn dim(&self) -> usize {
        self.limit.dim
    }

    pub fn at(&self, n: usize) -> Result<StepFn> {
        if n == 0 {
            return Err(Error::IndexOutOfRange { index: 0, max: usize::MAX });
        }
        match &self.rule {
            StepRule::Constant => Ok(self.limit.clone()),
            StepRule::Perturbed { g, rate } => self.limit.axpy(rate.eval(n), g),
            StepRule::Drift { base, at, height, rate } => {
                base.axpy(1.0, &StepFn::indicator(at + rate.eval(n), 1.0, height)?)
            }
            StepRule::Spike { at, height } => {
                let h: Vec<f64> = height.iter().map(|x| x * n as f64).collect();
                let width = 1.0 / (n as f64 * n as f64);
                self.limit.axpy(1.0, &StepFn::indicator(*at, at + width, &h)?)
            }
            StepRule::Support { multi, u } => multi.at(n)?.support_fn(u),
            StepRule::Embedded { multi, grid } => multi.at(n)?.embed(grid),
        }
    }

    /// `sup_n ‖fₙ‖∞`, when the rule bounds it.
    pub fn sup_norm_bound(&self) -> Option<f64> {
        let norm = |v: &[f64]| dot(v, v).sqrt();
        match &self.rule {
            StepRule::Constant => Some(self.limit.sup_norm()),
            StepRule::Perturbed { g, rate } => Some(self.limit.sup_norm() + rate.eval(1) * g.sup_norm()),
            StepRule::Drift { base, height, .. } => Some(base.sup_norm() + norm(height)),
            StepRule::Spike { .. } => None,
            StepRule::Support { multi, .. } => multi.radius_bound(),
            StepRule::Embedded { multi, grid } => multi.radius_bound().map(|r| r * (grid.len() as f64).sqrt()),
        }
    }

    /// `sup_n` of the number of jumps of `fₙ`, when the rule bounds it.
    pub fn jump_bound(&self) -> Option<usize> {
        match &self.rule {
            StepRule::Constant => Some(self.limit.jumps().len()),
            StepRule::Perturbed { g, .. } => Some(refine(&self.limit.jumps(), &g.jumps()).len()),
            StepRule::Drift { base, .. } => Some(base.jumps().len() + 1),
            StepRule::Spike { .. } => Some(self.limit.jumps().len() + 2),
            StepRule::Support { multi, .. } | StepRule::Embedded { multi, .. } => multi.jump_bound(),
        }
    }

    /// A bound on `sup_t |fₙ(t) - f(t)|` in the norm the gaps are measured in
    /// (the grid sup norm for embedded families).
    pub fn uniform_deviation(&self) -> Option<Decay> {
        match &self.rule {
            StepRule::Constant => Some(Decay::Zero),
            StepRule::Perturbed { g, rate } => Some(rate.scale(g.sup_norm())),
            StepRule::Drift { .. } | StepRule::Spike { .. } => None,
            StepRule::Support { multi, .. } | StepRule::Embedded { multi, .. } => multi.hausdorff_deviation(),
        }
    }

    /// Whether `fₙ(t) → f(t)`.
    pub fn converges_at(&self, t: f64) -> bool {
        match &self.rule {
            StepRule::Constant | StepRule::Perturbed { .. } => true,
            StepRule::Drift { at, rate, .. } => {
                t < *at || (t > *at && rate.index_below(t - at, usize::MAX / 2).is_some())
            }
            StepRule::Spike { at, .. } => t != *at,
            StepRule::Support { multi, .. } | StepRule::Embedded { multi, .. } => multi.converges_at(t),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
enum StepMultiRule {
    Constant,
    Scaled { rate: Decay },
    Translated { shift: StepFn, rate: Decay },
    Singleton { ff: StepFamily },
}

/// A sequence `(Γₙ)` of step multifunctions with limit `Γ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepMultiFamily {
    name: String,
    limit: StepMulti,
    #[serde(flatten)]
    rule: StepMultiRule,
}

impl StepMultiFamily {
    pub fn constant(g: &StepMulti) -> Self {
        StepMultiFamily {
            name: "constant".into(),
            limit: g.clone(),
            rule: StepMultiRule::Constant,
        }
    }

    /// `Γₙ = (1 + aₙ) Γ`.
    pub fn scaled(g: &StepMulti, rate: Decay) -> Result<Self> {
        Ok(StepMultiFamily {
            name: "scaled".into(),
            limit: g.clone(),
            rule: StepMultiRule::Scaled { rate: rate.validated()? },
        })
    }

    /// `Γₙ = Γ + aₙ · shift`.
    pub fn translated(g: &StepMulti, shift: &StepFn, rate: Decay) -> Result<Self> {
        g.translate_by(shift)?;
        Ok(StepMultiFamily {
            name: "translated".into(),
            limit: g.clone(),
            rule: StepMultiRule::Translated {
                shift: shift.clone(),
                rate: rate.validated()?,
            },
        })
    }

    /// `Γₙ = {fₙ}`.
    pub fn singleton(ff: &StepFamily) -> Result<Self> {
        Ok(StepMultiFamily {
            name: format!("{{{}}}", ff.name),
            limit: StepMulti::singletons(&ff.limit)?,
            rule: StepMultiRule::Singleton { ff: ff.clone() },
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn limit(&self) -> &StepMulti {
        &self.limit
    }

    pub fn dim(&self) -> usize {
        self.limit.dim
    }

    pub fn at(&self, n: usize) -> Result<StepMulti> {
        if n == 0 {
            return Err(Error::IndexOutOfRange { index: 0, max: usize::MAX });
        }
        match &self.rule {
            StepMultiRule::Constant => Ok(self.limit.clone()),
            StepMultiRule::Scaled { rate } => self.limit.scale(1.0 + rate.eval(n)),
            StepMultiRule::Translated { shift, rate } => {
                let s = StepFn::constant(&vec![0.0; shift.dim])?.axpy(rate.eval(n), shift)?;
                self.limit.translate_by(&s)
            }
            StepMultiRule::Singleton { ff } => StepMulti::singletons(&ff.at(n)?),
        }
    }

    pub fn radius_bound(&self) -> Option<f64> {
        match &self.rule {
            StepMultiRule::Constant => Some(self.limit.radius()),
            StepMultiRule::Scaled { rate } => Some((1.0 + rate.eval(1)) * self.limit.radius()),
            StepMultiRule::Translated { shift, rate } => Some(self.limit.radius() + rate.eval(1) * shift.sup_norm()),
            StepMultiRule::Singleton { ff } => ff.sup_norm_bound(),
        }
    }

    pub fn jump_bound(&self) -> Option<usize> {
        match &self.rule {
            StepMultiRule::Constant | StepMultiRule::Scaled { .. } => Some(self.limit.jumps().len()),
            StepMultiRule::Translated { shift, .. } => Some(refine(&self.limit.jumps(), &shift.jumps()).len()),
            StepMultiRule::Singleton { ff } => ff.jump_bound(),
        }
    }

    /// A bound on `sup_t d_H(Γₙ(t), Γ(t))`.
    pub fn hausdorff_deviation(&self) -> Option<Decay> {
        match &self.rule {
            StepMultiRule::Constant => Some(Decay::Zero),
            StepMultiRule::Scaled { rate } => Some(rate.scale(self.limit.radius())),
            StepMultiRule::Translated { shift, rate } => Some(rate.scale(shift.sup_norm())),
            StepMultiRule::Singleton { ff } => ff.uniform_deviation(),
        }
    }

    pub fn converges_at(&self, t: f64) -> bool {
        match &self.rule {
            StepMultiRule::Singleton { ff } => ff.converges_at(t),
            _ => true,
        }
    }
}

/// A partition on which a gauge valid up to `valid_up_to` fails at `n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquiWitness {
    pub n: usize,
    pub valid_up_to: usize,
    /// The cell `[lo, hi)` tagged at the jump `tag` that carries the error.
    pub straddle: (f64, f64, f64),
    pub cells: usize,
    pub error: f64,
    #[serde(skip)]
    pub partition: TaggedPartition,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquiIntegrability {
    pub epsilon: f64,
    pub horizon: usize,
    pub verdict: Verdict,
    pub gauge: Option<Gauge>,
    pub witness: Option<EquiWitness>,
    pub detail: String,
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A partition subordinate to `gauge` whose cell left of `p` is tagged at `p`.
fn straddling_partition(gauge: &Gauge, p: f64) -> Option<(TaggedPartition, (f64, f64, f64))> {
    let r = (0.999 * gauge.radius(p)).min(p);
    let lo = p - r;
    if !(lo < p) || !gauge.admits(lo, p, p) {
        return None;
    }
    let mut cells = Vec::new();
    if lo > 0.0 {
        cousin_cells(gauge, 0.0, lo, 1, &mut cells);
    }
    cells.push(TaggedCell {
        set: IntervalSet { pieces: vec![(lo, p)] },
        tag: p,
    });
    cousin_cells(gauge, p, 1.0, 1, &mut cells);
    Some((TaggedPartition { cells }, (lo, p, p)))
}

fn search_witness(
    ff: &StepFamily,
    mf: &DensityFamily,
    epsilon: f64,
    h: usize,
    gauges: &[Gauge],
) -> Result<Option<EquiWitness>> {
    let mut n0 = 1;
    while 2 * n0 <= h {
        let shared = gauges[..n0].iter().skip(1).fold(gauges[0].clone(), |g, x| g.min(x));
        let step = ((h - n0) / 16).max(1);
        let mut n = h;
        while n > n0 {
            let f = ff.at(n)?;
            let m = mf.at(n)?;
            let exact = integral(&f, &m, &IntervalSet::unit());
            for p in f.jumps() {
                if let Some((partition, straddle)) = straddling_partition(&shared, p) {
                    partition.verify(&shared)?;
                    let error = norm_diff(&riemann_sum(&f, &m, &partition)?, &exact);
                    if error > epsilon {
                        return Ok(Some(EquiWitness {
                            n,
                            valid_up_to: n0,
                            straddle,
                            cells: partition.len(),
                            error,
                            partition,
                        }));
                    }
                }
            }
            n = n.saturating_sub(step);
        }
        n0 *= 2;
    }
    Ok(None)
}

/// Looks for one gauge serving every `n` at threshold `epsilon`.
///
/// Holds when the rule bounds `‖fₙ‖∞`, the jump count and the density
/// uniformly: the constant gauge `ε / (GAUGE_FACTOR · K · F · ρ)` then works for
/// every `n`. Fails when the required radius keeps shrinking and a partition
/// subordinate to the shared gauge of the first indices misses by more than
/// `epsilon` later on.
pub fn check_equi_integrable(
    ff: &StepFamily,
    mf: &DensityFamily,
    epsilon: f64,
    horizon: usize,
) -> Result<EquiIntegrability> {
    if !(epsilon > 0.0) {
        return Err(invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let h = effective_horizon(horizon, &[mf.max_index()]);
    let mut radii = Vec::with_capacity(h);
    let mut gauges = Vec::with_capacity(h);
    let (mut f_max, mut k_max, mut rho_max) = (0.0f64, 0usize, 0.0f64);
    for n in 1..=h {
        let f = ff.at(n)?;
        let m = mf.at(n)?;
        let ms = ms_integral(&f, &m);
        radii.push(ms.inner_radius(epsilon));
        f_max = f_max.max(f.sup_norm());
        k_max = k_max.max(f.jumps().len());
        rho_max = rho_max.max(m.max_density());
        gauges.push(ms.gauge_for(epsilon)?);
    }
    let bounds = ff.sup_norm_bound().zip(ff.jump_bound());
    if let Some((f_bound, k_bound)) = bounds {
        let rho_bound = mf.density_bound();
        let tol = 1e-12 * (1.0 + f_bound);
        if f_max > f_bound + tol || k_max > k_bound || rho_max > rho_bound * (1.0 + 1e-12) {
            return Err(Error::Invariant(format!(
                "family bounds breached on the horizon: ‖f‖ {f_max} > {f_bound}, jumps {k_max} > {k_bound} or density {rho_max} > {rho_bound}"
            )));
        }
        let scale = GAUGE_FACTOR * k_bound as f64 * f_bound * rho_bound;
        let r = if scale == 0.0 { 1.0 } else { (epsilon / scale).min(1.0) };
        return Ok(EquiIntegrability {
            epsilon,
            horizon: h,
            verdict: Verdict::Holds,
            gauge: Some(Gauge::constant(r)?),
            witness: None,
            detail: format!("constant gauge {r:e} from ‖fₙ‖ ≤ {f_bound}, {k_bound} jumps, density ≤ {rho_bound}"),
        });
    }
    let inverse: Vec<f64> = radii.iter().map(|r| 1.0 / r).collect();
    let shared = gauges.iter().skip(1).fold(gauges[0].clone(), |g, x| g.min(x));
    if doubles(&inverse) {
        if let Some(w) = search_witness(ff, mf, epsilon, h, &gauges)? {
            let detail = format!(
                "the gauge valid for n ≤ {} misses by {:e} at n = {}",
                w.valid_up_to, w.error, w.n
            );
            return Ok(EquiIntegrability {
                epsilon,
                horizon: h,
                verdict: Verdict::Fails,
                gauge: Some(shared),
                witness: Some(w),
                detail,
            });
        }
    }
    Ok(EquiIntegrability {
        epsilon,
        horizon: h,
        verdict: Verdict::Inconclusive,
        gauge: Some(shared),
        witness: None,
        detail: "no uniform bound on the family and no failing partition found".into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceMode {
    Setwise,
    Tv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GapNorm {
    Euclidean,
    Sup,
}

impl GapNorm {
    fn of(self, v: &[f64]) -> f64 {
        match self {
            GapNorm::Euclidean => dot(v, v).sqrt(),
            GapNorm::Sup => v.iter().fold(0.0, |a, x| a.max(x.abs())),
        }
    }
}

/// `sup_A` of the gap over the algebra from per-atom contributions `c_k`:
/// exact for scalars and for the sup norm, and a direction-grid lower bound
/// for the Euclidean norm in `d ≥ 2`.
fn algebra_sup(c: &[Vec<f64>], norm: GapNorm) -> Result<f64> {
    let dim = c.first().map_or(1, Vec::len);
    let split = |coord: &dyn Fn(&[f64]) -> f64| {
        let (mut pos, mut neg) = (0.0, 0.0);
        for v in c {
            let x = coord(v);
            if x > 0.0 {
                pos += x;
            } else {
                neg -= x;
            }
        }
        f64::max(pos, neg)
    };
    if dim == 1 || norm == GapNorm::Sup {
        return Ok((0..dim).map(|j| split(&|v: &[f64]| v[j])).fold(0.0, f64::max));
    }
    let grid = DirectionGrid::default_for(dim)?;
    Ok(grid.directions().map(|u| split(&|v: &[f64]| dot(v, u))).fold(0.0, f64::max))
}

fn pointwise_hypothesis(ff: &StepFamily) -> HypothesisResult {
    let bad = (0..EVAL_POINTS)
        .map(|k| (k as f64 + 0.5) / EVAL_POINTS as f64)
        .find(|&t| !ff.converges_at(t));
    let bounded = ff.sup_norm_bound().is_some();
    match (bad, bounded) {
        (Some(t), _) => HypothesisResult::new("pointwise", Verdict::Fails, format!("no convergence at t = {t}")),
        (None, false) => HypothesisResult::new("pointwise", Verdict::Fails, "no uniform bound on ‖fₙ‖∞"),
        (None, true) => HypothesisResult::new(
            "pointwise",
            Verdict::Holds,
            format!("converges at all {EVAL_POINTS} evaluation points with a uniform bound"),
        ),
    }
}

fn equi_hypothesis(ff: &StepFamily, mf: &DensityFamily, h: usize) -> Result<HypothesisResult> {
    let mut verdict = Verdict::Holds;
    let mut shown = None;
    for eps in EQUI_EPSILONS {
        let e = check_equi_integrable(ff, mf, eps, h)?;
        verdict = verdict.and(e.verdict);
        if shown.is_none() || e.verdict != Verdict::Holds {
            shown = Some(e);
        }
        if verdict == Verdict::Fails {
            break;
        }
    }
    let shown = shown.expect("at least one epsilon");
    Ok(HypothesisResult::new("equi_integrable", verdict, format!("ε = {}: {}", shown.epsilon, shown.detail))
        .with_certificate(&shown))
}

fn algebra_for(ff: &StepFamily, mf: &DensityFamily, sets: &[IntervalSet]) -> IntervalAlgebra {
    let mut points = dyadic_points(TEST_GRID_LEVEL);
    points.extend_from_slice(ff.limit().breaks());
    points.extend_from_slice(mf.limit().breaks());
    for s in sets {
        points.extend(s.endpoints());
    }
    IntervalAlgebra::generated(&points)
}

fn convergence_hypothesis(
    mf: &DensityFamily,
    algebra: &IntervalAlgebra,
    mode: ConvergenceMode,
    h: usize,
) -> Result<HypothesisResult> {
    let limit = mf.limit();
    let mut curve = Vec::with_capacity(h);
    for n in 1..=h {
        let mn = mf.at(n)?;
        curve.push(match mode {
            ConvergenceMode::Tv => mn.tv_distance(limit),
            ConvergenceMode::Setwise => {
                let c: Vec<Vec<f64>> = (0..algebra.n_atoms())
                    .map(|k| {
                        let a = algebra.atom(k);
                        vec![mn.measure(&a) - limit.measure(&a)]
                    })
                    .collect();
                algebra_sup(&c, GapNorm::Sup)?
            }
        });
    }
    let (label, cert) = match mode {
        ConvergenceMode::Tv => ("total_variation", mf.tv_cert()),
        ConvergenceMode::Setwise => ("setwise", mf.setwise_cert(algebra)),
    };
    let verdict = match &cert {
        Some(c) if c.verify_values(&curve).is_none() => Verdict::Holds,
        _ if stalls(&curve) => Verdict::Fails,
        _ => Verdict::Inconclusive,
    };
    let detail = format!(
        "{} atoms; gap at n = {h}: {:e}",
        algebra.n_atoms(),
        curve.last().copied().unwrap_or(0.0)
    );
    Ok(HypothesisResult::new(label, verdict, detail).with_certificate(&cert))
}

#[allow(clippy::too_many_arguments)]
fn mcshane_core(
    theorem: &str,
    ff: &StepFamily,
    mf: &DensityFamily,
    sets: &[IntervalSet],
    tol: f64,
    horizon: usize,
    mode: ConvergenceMode,
    norm: GapNorm,
    pointwise: HypothesisResult,
) -> Result<TheoremReport> {
    let h = effective_horizon(horizon, &[mf.max_index()]);
    let family = format!("{} / {}", ff.name(), mf.name());
    let mut report = TheoremReport::new(theorem, &family, h, tol);
    let owned_full = [IntervalSet::unit()];
    let sets = if sets.is_empty() { &owned_full[..] } else { sets };
    let algebra = algebra_for(ff, mf, sets);
    report.hypothesis(equi_hypothesis(ff, mf, h)?);
    report.hypothesis(pointwise);
    report.hypothesis(convergence_hypothesis(mf, &algebra, mode, h)?);

    let f = ff.limit();
    let m = mf.limit();
    let limit_sets: Vec<Vec<f64>> = sets.iter().map(|s| integral(f, m, s)).collect();
    let limit_atoms: Vec<Vec<f64>> = (0..algebra.n_atoms()).map(|k| integral(f, m, &algebra.atom(k))).collect();
    let mut per_set: Vec<NamedCurve> = (0..sets.len())
        .map(|k| NamedCurve {
            label: format!("set#{k}"),
            points: Vec::with_capacity(h),
        })
        .collect();
    let mut algebra_curve = Vec::with_capacity(h);
    for n in 1..=h {
        let fnn = ff.at(n)?;
        let mn = mf.at(n)?;
        let mut worst = 0.0f64;
        for ((s, lim), curve) in sets.iter().zip(&limit_sets).zip(per_set.iter_mut()) {
            let v = integral(&fnn, &mn, s);
            let gap = norm.of(&v.iter().zip(lim).map(|(a, b)| a - b).collect::<Vec<_>>());
            curve.points.push((n, gap));
            worst = worst.max(gap);
        }
        if mode == ConvergenceMode::Tv {
            let c: Vec<Vec<f64>> = (0..algebra.n_atoms())
                .map(|k| {
                    let v = integral(&fnn, &mn, &algebra.atom(k));
                    v.iter().zip(&limit_atoms[k]).map(|(a, b)| a - b).collect()
                })
                .collect();
            let sup = algebra_sup(&c, norm)?;
            algebra_curve.push((n, sup));
            worst = worst.max(sup);
        }
        report.curve.push((n, worst));
    }
    report.curves = per_set;
    if mode == ConvergenceMode::Tv {
        report.curves.push(NamedCurve {
            label: "algebra sup".into(),
            points: algebra_curve,
        });
        if norm == GapNorm::Euclidean && ff.dim() > 1 {
            report
                .notes
                .push("the algebra supremum of a vector gap is a direction-grid lower bound".into());
        }
    }
    let f_norm = match norm {
        GapNorm::Euclidean => f.sup_norm(),
        GapNorm::Sup => (0..f.n_cells()).map(|c| norm.of(f.cell_value(c))).fold(0.0, f64::max),
    };
    let measure_term = match mode {
        ConvergenceMode::Tv => mf.tv_cert().map(|c| f_norm * c.eval(h)),
        ConvergenceMode::Setwise => mf.setwise_cert(&algebra).map(|c| 2.0 * f_norm * c.eval(h)),
    };
    report.tail_bound = ff
        .uniform_deviation()
        .zip(measure_term)
        .map(|(dev, meas)| dev.eval(h) * mf.mass_bound() + meas);
    report.notes.push(format!(
        "set convergence is checked on the algebra of {} intervals generated by the limit breakpoints, the test sets and the level-{TEST_GRID_LEVEL} dyadic grid",
        algebra.n_atoms()
    ));
    report.conclude();
    Ok(report)
}

/// `lim ∫_A fₙ dmₙ = ∫_A f dm` for the test sets, and in `Tv` mode uniformly
/// over the generated interval algebra.
pub fn check_thmcsequi(
    ff: &StepFamily,
    mf: &DensityFamily,
    sets: &[IntervalSet],
    tol: f64,
    horizon: usize,
    mode: ConvergenceMode,
) -> Result<TheoremReport> {
    let pointwise = pointwise_hypothesis(ff);
    mcshane_core("thmcsequi", ff, mf, sets, tol, horizon, mode, GapNorm::Euclidean, pointwise)
}

/// The multivalued version through the embedding `i ∘ Γₙ`; gaps are grid
/// sup norms, with the mesh-corrected Hausdorff upper curve alongside.
pub fn check_thmc_multivalued(
    gf: &StepMultiFamily,
    mf: &DensityFamily,
    sets: &[IntervalSet],
    tol: f64,
    horizon: usize,
    mode: ConvergenceMode,
) -> Result<TheoremReport> {
    let grid = DirectionGrid::default_for(gf.dim())?;
    let embedded = StepFamily::embedded(gf, &grid)?;
    let bad = (0..EVAL_POINTS)
        .map(|k| (k as f64 + 0.5) / EVAL_POINTS as f64)
        .find(|&t| !gf.converges_at(t));
    let pointwise = match (bad, gf.radius_bound()) {
        (Some(t), _) => HypothesisResult::new("pointwise_hausdorff", Verdict::Fails, format!("no convergence at t = {t}")),
        (None, None) => HypothesisResult::new("pointwise_hausdorff", Verdict::Fails, "no uniform bound on ‖Γₙ‖"),
        (None, Some(r)) => HypothesisResult::new(
            "pointwise_hausdorff",
            Verdict::Holds,
            format!("d_H(Γₙ(t), Γ(t)) → 0 at all evaluation points, ‖Γₙ‖ ≤ {r}"),
        ),
    };
    let mut report = mcshane_core("thmc", &embedded, mf, sets, tol, horizon, mode, GapNorm::Sup, pointwise)?;
    report.family = format!("{} / {}", gf.name(), mf.name());
    let slack_mass = gf.radius_bound().unwrap_or(f64::INFINITY) * mf.mass_bound();
    let upper = report
        .curve
        .iter()
        .map(|&(n, g)| (n, g + 2.0 * grid.mesh() * slack_mass))
        .collect();
    report.curves.push(NamedCurve {
        label: "hausdorff upper".into(),
        points: upper,
    });
    if gf.dim() <= 2 {
        let h = report.horizon;
        let g = gf.at(h)?;
        let m = mf.at(h)?;
        let body = ms_integral_body(&g, &m)?;
        let direct = ms_integral(&g.embed(&grid)?, &m).value;
        let diff = grid
            .directions()
            .zip(&direct)
            .map(|(u, v)| (body.support(u) - v).abs())
            .fold(0.0, f64::max);
        report.auxiliary.push(AuxCheck {
            label: "embedding".into(),
            verdict: Verdict::from_bool(diff <= 1e-12 * (1.0 + body.radius())),
            value: diff,
            detail: "i(∫Γ dm) against ∫ i∘Γ dm at the horizon".into(),
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_step() -> StepFn {
        StepFn::scalar(vec![0.0, 0.5, 1.0], vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn step_fn_basics() {
        let f = two_step();
        assert_eq!(f.eval(0.5).unwrap(), &[2.0]);
        assert_eq!(f.eval(0.49).unwrap(), &[1.0]);
        assert_eq!(f.eval(1.0).unwrap(), &[2.0]);
        assert!(f.eval(1.5).is_err());
        assert_eq!(f.jumps(), vec![0.5]);
        assert!(StepFn::scalar(vec![0.0, 0.7, 0.5, 1.0], vec![1.0; 3]).is_err());
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"breaks":[0.0,0.5,1.0],"values":[[1.0],[2.0]]}"#);
        assert_eq!(serde_json::from_str::<StepFn>(&json).unwrap(), f);
    }

    #[test]
    fn subordinate_partition_examples() {
        let g = Gauge::constant(0.3).unwrap();
        let p = subordinate_partition(&g, 1);
        assert_eq!(p.len(), 4);
        for c in &p.cells {
            let (a, b) = c.set.pieces()[0];
            assert!((b - a - 0.25).abs() < 1e-15);
            assert_eq!(c.tag, 0.5 * (a + b));
        }
        p.verify(&g).unwrap();
        assert_eq!(subordinate_partition(&g, 2).len(), 7);

        let fine = Gauge::new(vec![0.0, 0.45, 0.55, 1.0], vec![0.2, 0.01, 0.2]).unwrap();
        let p = subordinate_partition(&fine, 1);
        p.verify(&fine).unwrap();
        for c in &p.cells {
            let (a, b) = c.set.pieces()[0];
            assert!(!(a < 0.45 && b > 0.45) && !(a < 0.55 && b > 0.55));
        }
    }

    #[test]
    fn verify_rejects_bad_partitions() {
        let g = Gauge::constant(0.3).unwrap();
        let mut p = subordinate_partition(&g, 1);
        p.cells[0].tag = 0.9;
        assert!(p.verify(&g).is_err());
        let mut p = subordinate_partition(&g, 1);
        p.cells.pop();
        assert!(p.verify(&g).is_err());
    }

    #[test]
    fn riemann_examples() {
        let leb = DensityMeasure::lebesgue();
        let g = Gauge::new(vec![0.0, 0.5, 1.0], vec![0.1, 0.1]).unwrap();
        let p = subordinate_partition(&g, 1);
        assert_eq!(riemann_sum(&two_step(), &leb, &p).unwrap(), vec![1.5]);
        let c = StepFn::constant(&[3.0]).unwrap();
        let s = riemann_sum(&c, &leb, &p).unwrap()[0];
        assert!((s - 3.0).abs() < 1e-15);
        let zero = DensityMeasure::new(vec![0.0, 1.0], vec![0.0]).unwrap();
        assert_eq!(riemann_sum(&two_step(), &zero, &p).unwrap(), vec![0.0]);
        let mut bad = p.clone();
        bad.cells[0].tag = -0.1;
        assert!(riemann_sum(&two_step(), &leb, &bad).is_err());
    }

    #[test]
    fn gauge_certificate_holds_on_random_partitions() {
        let f = StepFn::scalar(vec![0.0, 0.25, 0.5, 0.8, 1.0], vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        let m = DensityMeasure::new(vec![0.0, 0.3, 1.0], vec![2.0, 0.5]).unwrap();
        let ms = ms_integral(&f, &m);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for eps in [1e-1, 1e-3] {
            let g = ms.gauge_for(eps).unwrap();
            for _ in 0..200 {
                let p = random_subordinate_partition(&mut rng, &g);
                p.verify(&g).unwrap();
                let s = riemann_sum(&f, &m, &p).unwrap()[0];
                assert!((s - ms.value[0]).abs() <= eps, "{s} vs {}", ms.value[0]);
            }
        }
    }

    #[test]
    fn graded_gauge_is_bounded_by_half_distance() {
        let jumps = [0.2, 0.7];
        let g = graded_gauge(&jumps, 1e-4).unwrap();
        for k in 0..10_000 {
            let t = (k as f64 + 0.5) / 10_000.0;
            let d = jumps.iter().map(|b| (t - b).abs()).fold(f64::INFINITY, f64::min);
            let r = g.radius(t);
            assert!(r <= 1e-4 || r <= d / 2.0, "t = {t}");
        }
    }

    #[test]
    fn equi_integrability_examples() {
        let leb = DensityMeasure::lebesgue();
        let f = two_step();
        let e = check_equi_integrable(&StepFamily::constant(&f), &DensityFamily::constant(&leb), 1e-3, 64).unwrap();
        assert_eq!(e.verdict, Verdict::Holds);

        let mu = DensityMeasure::new(vec![0.0, 0.5, 1.0], vec![2.0, 0.0]).unwrap();
        let drift = StepFamily::drift(&f, 0.3, &[1.0], Decay::harmonic()).unwrap();
        let mf = DensityFamily::convex_mix(&leb, &mu, Decay::harmonic()).unwrap();
        assert_eq!(check_equi_integrable(&drift, &mf, 1e-3, 64).unwrap().verdict, Verdict::Holds);

        let spike = StepFamily::spike(&StepFn::constant(&[0.0]).unwrap(), 0.5, &[1.0]).unwrap();
        let e = check_equi_integrable(&spike, &DensityFamily::constant(&leb), 1e-2, 512).unwrap();
        assert_eq!(e.verdict, Verdict::Fails, "{}", e.detail);
        let w = e.witness.unwrap();
        assert!(w.straddle.0 < 0.5 && w.straddle.1 == 0.5 && w.straddle.2 == 0.5);
        assert!(w.error > 1e-2);
    }

    #[test]
    fn thmcsequi_examples() {
        let leb = DensityMeasure::lebesgue();
        let f = two_step();
        let g = StepFn::scalar(vec![0.0, 0.25, 1.0], vec![1.0, -1.0]).unwrap();
        let mu = DensityMeasure::new(vec![0.0, 0.75, 1.0], vec![0.0, 4.0]).unwrap();
        let ff = StepFamily::perturbed(&f, &g, Decay::harmonic()).unwrap();
        let mf = DensityFamily::convex_mix(&leb, &mu, Decay::harmonic()).unwrap();
        let sets = [IntervalSet::interval(0.1, 0.6).unwrap()];
        for mode in [ConvergenceMode::Setwise, ConvergenceMode::Tv] {
            let r = check_thmcsequi(&ff, &mf, &sets, 1e-2, 256, mode).unwrap();
            assert_eq!(r.verdict, crate::report::ReportVerdict::Pass, "{r:#?}");
            let tail = r.tail_bound.unwrap();
            assert!(r.final_gap.unwrap() <= tail + 1e-12);
        }
        let r = check_thmcsequi(&StepFamily::constant(&f), &DensityFamily::constant(&leb), &[], 1e-12, 16, ConvergenceMode::Tv)
            .unwrap();
        assert!(r.curve.iter().all(|p| p.1 == 0.0));

        let osc = DensityFamily::oscillating(&leb);
        let r = check_thmcsequi(&StepFamily::constant(&f), &osc, &[], 1e-2, 64, ConvergenceMode::Setwise).unwrap();
        assert_eq!(r.hypothesis_verdict("setwise"), Some(Verdict::Holds));
        let r = check_thmcsequi(&StepFamily::constant(&f), &osc, &[], 1e-2, 64, ConvergenceMode::Tv).unwrap();
        assert_eq!(r.hypothesis_verdict("total_variation"), Some(Verdict::Fails));

        let spike = StepFamily::spike(&StepFn::constant(&[0.0]).unwrap(), 0.5, &[1.0]).unwrap();
        let r = check_thmcsequi(&spike, &DensityFamily::constant(&leb), &[], 1e-2, 256, ConvergenceMode::Setwise).unwrap();
        assert_eq!(r.verdict, crate::report::ReportVerdict::HypothesisFailed);
    }

    #[test]
    fn thmc_interval_example() {
        let seg = Polytope::interval(0.0, 1.0).unwrap();
        let gf = StepMultiFamily::scaled(&StepMulti::constant(&seg), Decay::harmonic()).unwrap();
        let r = check_thmc_multivalued(&gf, &DensityFamily::constant(&DensityMeasure::lebesgue()), &[], 1e-2, 128, ConvergenceMode::Setwise)
            .unwrap();
        for &(n, gap) in &r.curve {
            assert!((gap - 1.0 / n as f64).abs() < 1e-15);
        }
        assert_eq!(r.verdict, crate::report::ReportVerdict::Pass);
    }

    #[test]
    fn embedding_commutes_with_the_integral() {
        let tri = Polytope::new(2, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let sq = Polytope::cuboid(&[-0.5, -0.5], &[0.5, 0.5]).unwrap();
        let g = StepMulti::new(vec![0.0, 0.4, 1.0], vec![tri, sq]).unwrap();
        let m = DensityMeasure::new(vec![0.0, 0.2, 1.0], vec![3.0, 0.5]).unwrap();
        let grid = DirectionGrid::default_for(2).unwrap();
        let body = ms_integral_body(&g, &m).unwrap();
        let direct = ms_integral(&g.embed(&grid).unwrap(), &m).value;
        for (u, v) in grid.directions().zip(&direct) {
            assert!((body.support(u) - v).abs() < 1e-12);
        }
    }
}
