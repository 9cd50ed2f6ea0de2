//! Convex bodies in `R^d` (d ≤ 3) given by vertex lists, their support
//! functions, the Hausdorff metric, Minkowski combinations and the
//! direction-grid embedding `C ↦ (s(u, C))_u`.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use robust::{orient2d, Coord};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_finite, invalid, Error, Result};
use crate::measure::dot;

pub const MAX_DIM: usize = 3;

/// Default grid sizes: the exact pair for d = 1, 360 equiangular directions
/// for d = 2 and a 1000-point Fibonacci sphere for d = 3.
pub const DEFAULT_CIRCLE_SIZE: usize = 360;
pub const DEFAULT_SPHERE_SIZE: usize = 1000;

const DEDUP_TOL: f64 = 1e-12;

/// `conv(vertices)` for a nonempty finite vertex list.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<f64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        return Err(invalid(format!("dimension must be in 1..={MAX_DIM}, got {dim}")));
    }
    Ok(())
}

impl Polytope {
    pub fn new(dim: usize, vertices: &[Vec<f64>]) -> Result<Self> {
        check_dim(dim)?;
        if vertices.is_empty() {
            return Err(invalid("a polytope needs at least one vertex"));
        }
        let mut flat = Vec::with_capacity(dim * vertices.len());
        for v in vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            flat.extend_from_slice(v);
        }
        check_finite(&flat)?;
        Ok(Polytope {
            dim,
            vertices: flat,
        })
    }

    fn from_flat(dim: usize, vertices: Vec<f64>) -> Self {
        debug_assert!(!vertices.is_empty() && vertices.len().is_multiple_of(dim));
        Polytope { dim, vertices }
    }

    pub fn point(p: &[f64]) -> Result<Self> {
        Polytope::new(p.len(), &[p.to_vec()])
    }

    pub fn origin(dim: usize) -> Result<Self> {
        Polytope::point(&vec![0.0; dim])
    }

    /// The interval `[a, b]` in `R^1`.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if a > b {
            return Err(invalid(format!("interval endpoints out of order: [{a}, {b}]")));
        }
        Polytope::new(1, &[vec![a], vec![b]])
    }

    /// The axis-aligned box `[lo, hi]`.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        let dim = lo.len();
        check_dim(dim)?;
        let vertices: Vec<Vec<f64>> = (0..1usize << dim)
            .map(|mask| {
                (0..dim)
                    .map(|k| if mask >> k & 1 == 1 { hi[k] } else { lo[k] })
                    .collect()
            })
            .collect();
        Polytope::new(dim, &vertices)
    }

    /// `radius · conv{±e_k}`, whose support function is `radius · max_k |u_k|`.
    pub fn cross(dim: usize, radius: f64) -> Result<Self> {
        check_dim(dim)?;
        let mut vertices = Vec::new();
        for k in 0..dim {
            for sign in [1.0, -1.0] {
                let mut v = vec![0.0; dim];
                v[k] = sign * radius;
                vertices.push(v);
            }
        }
        Polytope::new(dim, &vertices)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len() / self.dim
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        &self.vertices[i * self.dim..(i + 1) * self.dim]
    }

    pub fn vertices(&self) -> impl Iterator<Item = &[f64]> {
        self.vertices.chunks_exact(self.dim)
    }

    pub fn is_singleton(&self) -> bool {
        let first = self.vertex(0);
        self.vertices().all(|v| v == first)
    }

    /// `s(u, C) = max_v <u, v>`; `u` need not be a unit vector.
    pub fn support(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.dim);
        self.vertices()
            .map(|v| dot(u, v))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest vertex norm; the Lipschitz constant of `s(·, C)`.
    pub fn radius(&self) -> f64 {
        self.vertices()
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// `λ C` for `λ ≥ 0`.
    pub fn scale(&self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) {
            return Err(invalid(format!("body scaling needs a nonnegative factor, got {lambda}")));
        }
        Ok(Polytope::from_flat(
            self.dim,
            self.vertices.iter().map(|x| x * lambda).collect(),
        ))
    }

    pub fn translate(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: shift.len(),
            });
        }
        let vertices = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, x)| x + shift[i % self.dim])
            .collect();
        Ok(Polytope::from_flat(self.dim, vertices))
    }

    /// Extreme-point reduction: exact orientation tests for d ≤ 2, a `1e-12`
    /// tolerance for d = 3.
    pub fn canonical(&self) -> Polytope {
        match self.dim {
            1 => {
                let lo = self.vertices.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = self.vertices.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if lo == hi {
                    Polytope::from_flat(1, vec![lo])
                } else {
                    Polytope::from_flat(1, vec![lo, hi])
                }
            }
            2 => hull_2d(self),
            _ => extreme_points_3d(self),
        }
    }

    /// `C + D`; materialized only for d ≤ 2.
    pub fn minkowski_sum(&self, other: &Polytope) -> Result<Polytope> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        if self.dim > 2 {
            return Err(invalid("vertex representation of Minkowski sums is limited to d <= 2"));
        }
        let a = self.canonical();
        let b = other.canonical();
        let mut sums = Vec::with_capacity(a.vertices.len() * b.n_vertices());
        for v in a.vertices() {
            for w in b.vertices() {
                sums.extend(v.iter().zip(w).map(|(x, y)| x + y));
            }
        }
        Ok(Polytope::from_flat(self.dim, sums).canonical())
    }
}

fn hull_2d(p: &Polytope) -> Polytope {
    let mut pts: Vec<[f64; 2]> = p.vertices().map(|v| [v[0], v[1]]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return Polytope::from_flat(2, pts.into_iter().flatten().collect());
    }
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        orient2d(
            Coord { x: a[0], y: a[1] },
            Coord { x: b[0], y: b[1] },
            Coord { x: c[0], y: c[1] },
        )
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &q in &pts {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &q in pts.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Polytope::from_flat(2, lower.into_iter().flatten().collect())
}

fn sub3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Whether `p` lies in `conv(pts)` (d = 3), by Carathéodory over simplices
/// of up to four points.
fn in_hull_3d(p: &[f64], pts: &[&[f64]], tol: f64) -> bool {
    let n = pts.len();
    let near = |a: &[f64], b: &[f64]| sub3(a, b).iter().all(|x| x.abs() <= tol);
    if pts.iter().any(|q| near(p, q)) {
        return true;
    }
    let on_segment = |a: &[f64], b: &[f64]| {
        let d = sub3(b, a);
        let len2 = dot3(d, d);
        if len2 <= tol * tol {
            return false;
        }
        let t = dot3(sub3(p, a), d) / len2;
        if !(-tol..=1.0 + tol).contains(&t) {
            return false;
        }
        let proj = [a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]];
        near(p, &proj)
    };
    let in_triangle = |a: &[f64], b: &[f64], c: &[f64]| {
        let e1 = sub3(b, a);
        let e2 = sub3(c, a);
        let normal = cross3(e1, e2);
        let area2 = dot3(normal, normal);
        if area2 <= tol * tol {
            return false;
        }
        let w = sub3(p, a);
        if (dot3(w, normal) / area2.sqrt()).abs() > tol {
            return false;
        }
        let l1 = dot3(cross3(w, e2), normal) / area2;
        let l2 = dot3(cross3(e1, w), normal) / area2;
        l1 >= -tol && l2 >= -tol && l1 + l2 <= 1.0 + tol
    };
    let in_tetra = |a: &[f64], b: &[f64], c: &[f64], d: &[f64]| {
        let e1 = sub3(b, a);
        let e2 = sub3(c, a);
        let e3 = sub3(d, a);
        let det = dot3(e1, cross3(e2, e3));
        if det.abs() <= tol {
            return false;
        }
        let w = sub3(p, a);
        let l1 = dot3(w, cross3(e2, e3)) / det;
        let l2 = dot3(e1, cross3(w, e3)) / det;
        let l3 = dot3(e1, cross3(e2, w)) / det;
        l1 >= -tol && l2 >= -tol && l3 >= -tol && l1 + l2 + l3 <= 1.0 + tol
    };
    for i in 0..n {
        for j in i + 1..n {
            if on_segment(pts[i], pts[j]) {
                return true;
            }
            for k in j + 1..n {
                if in_triangle(pts[i], pts[j], pts[k]) {
                    return true;
                }
                for l in k + 1..n {
                    if in_tetra(pts[i], pts[j], pts[k], pts[l]) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

fn extreme_points_3d(p: &Polytope) -> Polytope {
    let mut pts: Vec<&[f64]> = Vec::new();
    for v in p.vertices() {
        if !pts.iter().any(|q| sub3(v, q).iter().all(|x| x.abs() <= DEDUP_TOL)) {
            pts.push(v);
        }
    }
    let mut keep: Vec<&[f64]> = pts.clone();
    let mut i = 0;
    while i < keep.len() {
        let others: Vec<&[f64]> = keep
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| *q)
            .collect();
        if !others.is_empty() && in_hull_3d(keep[i], &others, DEDUP_TOL) {
            keep.remove(i);
        } else {
            i += 1;
        }
    }
    keep.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Polytope::from_flat(3, keep.into_iter().flatten().copied().collect())
}

#[derive(Serialize, Deserialize)]
struct PolytopeRepr {
    dim: usize,
    vertices: Vec<Vec<f64>>,
}

impl Serialize for Polytope {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        PolytopeRepr {
            dim: self.dim,
            vertices: self.vertices().map(<[f64]>::to_vec).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Polytope {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = PolytopeRepr::deserialize(deserializer)?;
        Polytope::new(repr.dim, &repr.vertices).map_err(serde::de::Error::custom)
    }
}

/// A finite set of unit directions with a covering angle: every unit vector
/// is within `mesh` radians of some grid direction.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionGrid {
    id: String,
    dim: usize,
    dirs: Vec<f64>,
    mesh: f64,
}

impl DirectionGrid {
    /// `{+1, -1}`, exact in one dimension.
    pub fn line() -> Self {
        DirectionGrid {
            id: "line".into(),
            dim: 1,
            dirs: vec![1.0, -1.0],
            mesh: 0.0,
        }
    }

    /// `m` equiangular directions on the circle, starting at `(1, 0)`.
    pub fn circle(m: usize) -> Result<Self> {
        if m < 4 || !m.is_multiple_of(4) {
            return Err(invalid(format!("circle grids need a multiple of 4 directions, got {m}")));
        }
        let mut dirs = Vec::with_capacity(2 * m);
        for k in 0..m {
            let a = 2.0 * PI * k as f64 / m as f64;
            let (s, c) = a.sin_cos();
            dirs.extend([c, s]);
        }
        // pin the axis directions exactly
        for k in [0, m / 4, m / 2, 3 * m / 4] {
            let (c, s) = match k * 4 / m {
                0 => (1.0, 0.0),
                1 => (0.0, 1.0),
                2 => (-1.0, 0.0),
                _ => (0.0, -1.0),
            };
            dirs[2 * k] = c;
            dirs[2 * k + 1] = s;
        }
        Ok(DirectionGrid {
            id: format!("circle-{m}"),
            dim: 2,
            dirs,
            mesh: PI / m as f64,
        })
    }

    /// A Fibonacci sphere of `m` points, with a certified covering angle.
    ///
    /// The mesh is bounded by sampling cell centres of a `64 × 64` grid on
    /// each cube face: every unit vector lies within `2·asin(h/(2√2))` of
    /// such a sample (radial projection is 1-Lipschitz outside the ball).
    pub fn sphere(m: usize) -> Result<Self> {
        if m < 8 {
            return Err(invalid(format!("sphere grids need at least 8 directions, got {m}")));
        }
        let golden = PI * (3.0 - 5f64.sqrt());
        let mut dirs = Vec::with_capacity(3 * m);
        for i in 0..m {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / m as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            dirs.extend([r * phi.cos(), r * phi.sin(), z]);
        }
        let k = 64usize;
        let h = 2.0 / k as f64;
        let sample_cover = 2.0 * (h / (2.0 * 2f64.sqrt())).asin();
        let mut worst = 0.0f64;
        for face in 0..6 {
            let axis = face / 2;
            let sign = if face % 2 == 0 { 1.0 } else { -1.0 };
            for a in 0..k {
                for b in 0..k {
                    let x = -1.0 + h * (a as f64 + 0.5);
                    let y = -1.0 + h * (b as f64 + 0.5);
                    let mut p = [0.0; 3];
                    p[axis] = sign;
                    p[(axis + 1) % 3] = x;
                    p[(axis + 2) % 3] = y;
                    let norm = dot3(p, p).sqrt();
                    let best = dirs
                        .chunks_exact(3)
                        .map(|g| (g[0] * p[0] + g[1] * p[1] + g[2] * p[2]) / norm)
                        .fold(f64::NEG_INFINITY, f64::max);
                    worst = worst.max(best.clamp(-1.0, 1.0).acos());
                }
            }
        }
        Ok(DirectionGrid {
            id: format!("fibonacci-{m}"),
            dim: 3,
            dirs,
            mesh: worst + sample_cover,
        })
    }

    /// A user-supplied grid; directions are normalized and `mesh` is trusted.
    pub fn custom(id: &str, dim: usize, dirs: &[Vec<f64>], mesh: f64) -> Result<Self> {
        check_dim(dim)?;
        let mut flat = Vec::new();
        for d in dirs {
            if d.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: d.len(),
                });
            }
            let n = dot(d, d).sqrt();
            if !(n > 0.0) {
                return Err(invalid("grid directions must be nonzero"));
            }
            flat.extend(d.iter().map(|x| x / n));
        }
        if flat.is_empty() || !(mesh >= 0.0) {
            return Err(invalid("grids need directions and a nonnegative mesh"));
        }
        Ok(DirectionGrid {
            id: id.into(),
            dim,
            dirs: flat,
            mesh,
        })
    }

    /// The shared default grid for a dimension.
    pub fn default_for(dim: usize) -> Result<Arc<DirectionGrid>> {
        static LINE: OnceLock<Arc<DirectionGrid>> = OnceLock::new();
        static CIRCLE: OnceLock<Arc<DirectionGrid>> = OnceLock::new();
        static SPHERE: OnceLock<Arc<DirectionGrid>> = OnceLock::new();
        match dim {
            1 => Ok(LINE.get_or_init(|| Arc::new(DirectionGrid::line())).clone()),
            2 => Ok(CIRCLE
                .get_or_init(|| Arc::new(DirectionGrid::circle(DEFAULT_CIRCLE_SIZE).expect("valid size")))
                .clone()),
            3 => Ok(SPHERE
                .get_or_init(|| Arc::new(DirectionGrid::sphere(DEFAULT_SPHERE_SIZE).expect("valid size")))
                .clone()),
            _ => Err(invalid(format!("no default grid for dimension {dim}"))),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.dirs.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        &self.dirs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn directions(&self) -> impl Iterator<Item = &[f64]> {
        self.dirs.chunks_exact(self.dim)
    }

    /// Up to `max` directions spread evenly over the grid.
    pub fn subsample(&self, max: usize) -> Vec<&[f64]> {
        let stride = self.len().div_ceil(max.max(1)).max(1);
        self.directions().step_by(stride).collect()
    }
}

/// `s(u, C)`.
pub fn support(u: &[f64], body: &Polytope) -> Result<f64> {
    if u.len() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            got: u.len(),
        });
    }
    Ok(body.support(u))
}

/// Grid bounds on `d_H(C, D)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HausdorffBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Two-sided bound on the Hausdorff distance from support values on a grid.
///
/// `lower` is the largest support gap over the grid; `upper` adds
/// `2·max(R_C, R_D)·mesh`. In one dimension both equal the exact
/// `max(|a_C - a_D|, |b_C - b_D|)`.
pub fn hausdorff(c: &Polytope, d: &Polytope, grid: &DirectionGrid) -> Result<HausdorffBounds> {
    if c.dim() != d.dim() || c.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: if c.dim() != grid.dim() { c.dim() } else { d.dim() },
        });
    }
    if c.dim() == 1 {
        let (ca, cb) = (-c.support(&[-1.0]), c.support(&[1.0]));
        let (da, db) = (-d.support(&[-1.0]), d.support(&[1.0]));
        let exact = f64::max((ca - da).abs(), (cb - db).abs());
        return Ok(HausdorffBounds {
            lower: exact,
            upper: exact,
        });
    }
    let lower = grid
        .directions()
        .map(|u| (c.support(u) - d.support(u)).abs())
        .fold(0.0, f64::max);
    let lip = 2.0 * c.radius().max(d.radius());
    Ok(HausdorffBounds {
        lower,
        upper: lower + lip * grid.mesh(),
    })
}

/// Support values of a body on a direction grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportVector {
    grid: Arc<DirectionGrid>,
    values: Vec<f64>,
    signed: bool,
}

impl SupportVector {
    pub fn from_values(grid: Arc<DirectionGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        check_finite(&values)?;
        Ok(SupportVector {
            grid,
            values,
            signed: false,
        })
    }

    pub fn zero(grid: Arc<DirectionGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        SupportVector {
            grid,
            values,
            signed: false,
        }
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// True when built from a combination with a negative coefficient; such
    /// vectors need not be support functions of any body.
    pub fn is_signed_combination(&self) -> bool {
        self.signed
    }

    fn check_grid(&self, other: &SupportVector) -> Result<()> {
        if self.grid.id() != other.grid.id() || self.values.len() != other.values.len() {
            return Err(invalid(format!(
                "support vectors live on different grids ({} vs {})",
                self.grid.id(),
                other.grid.id()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &SupportVector) -> Result<SupportVector> {
        self.check_grid(other)?;
        Ok(SupportVector {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
            signed: self.signed || other.signed,
        })
    }

    pub fn scale(&self, lambda: f64) -> SupportVector {
        SupportVector {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * lambda).collect(),
            signed: self.signed || lambda < 0.0,
        }
    }

    /// `max_u |self(u) - other(u)|`, the grid sup-norm distance.
    pub fn distance(&self, other: &SupportVector) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Largest violation of the sublinearity inequalities the grid can see
    /// without interpolation: `s(u) + s(-u) ≥ 0` always, and in the plane
    /// `s(u_i) + s(u_j) ≥ |u_i + u_j| s(bisector)` for grid bisectors.
    pub fn sublinearity_defect(&self) -> f64 {
        let grid = &self.grid;
        let mut worst = 0.0f64;
        let find = |v: &[f64]| {
            grid.directions()
                .position(|g| g.iter().zip(v).all(|(a, b)| (a + b).abs() < 1e-12))
        };
        for (i, u) in grid.directions().enumerate() {
            if let Some(j) = find(u) {
                worst = worst.max(-(self.values[i] + self.values[j]));
            }
        }
        if grid.dim() == 2 && grid.id().starts_with("circle-") {
            let m = grid.len();
            for i in 0..m {
                for j in (i + 2..i + m / 2).step_by(2) {
                    let jj = j % m;
                    let mid = ((i + j) / 2) % m;
                    let half = PI * (j - i) as f64 / m as f64;
                    let scale = 2.0 * half.cos();
                    let rhs = self.values[i] + self.values[jj];
                    worst = worst.max(scale * self.values[mid] - rhs);
                }
            }
        }
        worst
    }
}

impl Serialize for SupportVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            grid: &'a str,
            values: &'a [f64],
        }
        Repr {
            grid: self.grid.id(),
            values: &self.values,
        }
        .serialize(serializer)
    }
}

/// The grid Rådström embedding `C ↦ (s(u, C))_u`.
pub fn radstrom_embed(body: &Polytope, grid: &Arc<DirectionGrid>) -> Result<SupportVector> {
    if body.dim() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: body.dim(),
        });
    }
    let values = grid.directions().map(|u| body.support(u)).collect();
    SupportVector::from_values(grid.clone(), values)
}

/// `Σ λ_i C_i` as a body (d ≤ 2, all `λ_i ≥ 0`).
pub fn minkowski_combine(coeffs: &[f64], bodies: &[Polytope]) -> Result<Polytope> {
    if coeffs.len() != bodies.len() || bodies.is_empty() {
        return Err(invalid("minkowski_combine needs one coefficient per body"));
    }
    if let Some(c) = coeffs.iter().find(|c| !(**c >= 0.0)) {
        return Err(invalid(format!(
            "negative coefficient {c}: Minkowski differences are not body-valued"
        )));
    }
    let mut acc = Polytope::origin(bodies[0].dim())?;
    for (c, b) in coeffs.iter().zip(bodies) {
        acc = acc.minkowski_sum(&b.scale(*c)?)?;
    }
    Ok(acc)
}

/// `Σ λ_i s(·, C_i)` on a grid; signed coefficients are allowed and flagged.
pub fn minkowski_support(
    coeffs: &[f64],
    bodies: &[Polytope],
    grid: &Arc<DirectionGrid>,
) -> Result<SupportVector> {
    if coeffs.len() != bodies.len() {
        return Err(invalid("minkowski_support needs one coefficient per body"));
    }
    let mut acc = SupportVector::zero(grid.clone());
    for (c, b) in coeffs.iter().zip(bodies) {
        acc = acc.add(&radstrom_embed(b, grid)?.scale(*c))?;
    }
    Ok(acc)
}

/// Largest sampled violation of sublinearity for a positively homogeneous
/// function on `R^d`: `φ(u + v) - φ(u) - φ(v)` over pairs of grid
/// directions, and `|φ(λu) - λφ(u)|` for `λ ∈ {0.5, 2}`.
pub fn sublinearity_violation(
    phi: impl Fn(&[f64]) -> f64,
    grid: &DirectionGrid,
    max_dirs: usize,
) -> f64 {
    let dirs = grid.subsample(max_dirs);
    let vals: Vec<f64> = dirs.iter().map(|u| phi(u)).collect();
    let mut worst = 0.0f64;
    let mut buf = vec![0.0; grid.dim()];
    for (i, u) in dirs.iter().enumerate() {
        for lambda in [0.5, 2.0] {
            for (b, x) in buf.iter_mut().zip(u.iter()) {
                *b = lambda * x;
            }
            let scale = 1.0 + vals[i].abs() * lambda;
            worst = worst.max((phi(&buf) - lambda * vals[i]).abs() / scale);
        }
        for (j, v) in dirs.iter().enumerate().skip(i + 1) {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = u[k] + v[k];
            }
            let scale = 1.0 + vals[i].abs() + vals[j].abs();
            worst = worst.max((phi(&buf) - vals[i] - vals[j]) / scale);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polytope {
        Polytope::cuboid(&[-1.0, -1.0], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn support_examples() {
        assert_eq!(support(&[1.0, 0.0], &square()).unwrap(), 1.0);
        let p = Polytope::point(&[2.0, -1.0]).unwrap();
        assert_eq!(support(&[0.5, 2.0], &p).unwrap(), -1.0);
        let seg = Polytope::new(2, &[vec![0.0, 0.0], vec![2.0, 1.0]]).unwrap();
        let u = [1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()];
        assert!((support(&u, &seg).unwrap() - 3.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(support(&[1.0], &square()).is_err());
    }

    #[test]
    fn hausdorff_examples() {
        let line = DirectionGrid::line();
        let a = Polytope::interval(0.0, 1.0).unwrap();
        let b = Polytope::interval(0.0, 2.0).unwrap();
        let h = hausdorff(&a, &b, &line).unwrap();
        assert_eq!((h.lower, h.upper), (1.0, 1.0));
        let h = hausdorff(&a, &a, &line).unwrap();
        assert_eq!(h.lower, 0.0);

        let grid = DirectionGrid::circle(360).unwrap();
        let unit = Polytope::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let t = 0.375;
        let shifted = unit.translate(&[t, 0.0]).unwrap();
        let h = hausdorff(&unit, &shifted, &grid).unwrap();
        assert!((h.lower - t).abs() < 1e-15);
        assert!(h.upper >= t);
    }

    #[test]
    fn minkowski_examples() {
        let s = minkowski_combine(
            &[1.0, 1.0],
            &[Polytope::interval(0.0, 1.0).unwrap(), Polytope::interval(1.0, 3.0).unwrap()],
        )
        .unwrap();
        assert_eq!(s.canonical(), Polytope::interval(1.0, 4.0).unwrap());
        let z = minkowski_combine(&[0.0], &[square()]).unwrap();
        assert!(z.is_singleton());
        assert_eq!(z.vertex(0), &[0.0, 0.0]);

        let grid = DirectionGrid::default_for(2).unwrap();
        let unit = Polytope::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let half = minkowski_support(&[0.5, 0.5], &[unit.clone(), unit.clone()], &grid).unwrap();
        let direct = radstrom_embed(&unit, &grid).unwrap();
        assert!(half.distance(&direct).unwrap() < 1e-15);
        assert!(minkowski_combine(&[-1.0], &[unit]).is_err());
    }

    #[test]
    fn embedding_examples() {
        let line = Arc::new(DirectionGrid::line());
        let e = radstrom_embed(&Polytope::interval(-0.5, 3.0).unwrap(), &line).unwrap();
        assert_eq!(e.values(), &[3.0, 0.5]);
        let a = radstrom_embed(&Polytope::interval(0.0, 1.0).unwrap(), &line).unwrap();
        let b = radstrom_embed(&Polytope::interval(0.0, 2.0).unwrap(), &line).unwrap();
        assert_eq!(a.distance(&b).unwrap(), 1.0);
    }

    #[test]
    fn signed_combinations_are_flagged() {
        let grid = DirectionGrid::default_for(2).unwrap();
        let v = minkowski_support(&[1.0, -1.0], &[square(), square()], &grid).unwrap();
        assert!(v.is_signed_combination());
        let w = minkowski_support(&[1.0, 1.0], &[square(), square()], &grid).unwrap();
        assert!(!w.is_signed_combination());
        assert!(w.sublinearity_defect() <= 1e-12);
    }

    #[test]
    fn non_support_vectors_are_caught() {
        let grid = DirectionGrid::default_for(2).unwrap();
        let mut vals = radstrom_embed(&square(), &grid).unwrap().values().to_vec();
        vals[10] += 0.5;
        let bad = SupportVector::from_values(grid, vals).unwrap();
        assert!(bad.sublinearity_defect() > 0.1);
    }

    #[test]
    fn canonical_drops_interior_points() {
        let p = Polytope::new(
            2,
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.25], vec![0.0, 1.0], vec![0.5, 0.0]],
        )
        .unwrap();
        assert_eq!(p.canonical().n_vertices(), 3);
        let c = Polytope::cuboid(&[0.0; 3], &[1.0; 3]).unwrap();
        let mut vs: Vec<Vec<f64>> = c.vertices().map(<[f64]>::to_vec).collect();
        vs.push(vec![0.5, 0.5, 0.5]);
        vs.push(vec![0.5, 0.0, 0.0]);
        vs.push(vec![1.0, 1.0, 1.0]);
        let q = Polytope::new(3, &vs).unwrap().canonical();
        assert_eq!(q.n_vertices(), 8);
    }

    #[test]
    fn sphere_mesh_is_small_and_valid() {
        let g = DirectionGrid::default_for(3).unwrap();
        assert_eq!(g.len(), DEFAULT_SPHERE_SIZE);
        assert!(g.mesh() > 0.0 && g.mesh() < 0.15, "mesh {}", g.mesh());
        for d in g.directions() {
            assert!((dot(d, d) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn polytope_json() {
        let p: Polytope = serde_json::from_str(r#"{"dim":2,"vertices":[[0,0],[1,0]]}"#).unwrap();
        assert_eq!(p.n_vertices(), 2);
        assert!(serde_json::from_str::<Polytope>(r#"{"dim":2,"vertices":[[0]]}"#).is_err());
        assert!(serde_json::from_str::<Polytope>(r#"{"dim":4,"vertices":[[0,0,0,0]]}"#).is_err());
    }
}
