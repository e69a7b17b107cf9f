//! Geometry of finite point configurations: unit-ball volumes, simplex
//! volumes, support values, distance to a convex hull, and orthogonal
//! complements of affine spans.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::algebra::{IndexSet, MAX_VARS};
use crate::error::{Error, Result};
use crate::sampling::Substream;

pub const MAX_DIM: usize = 8;

/// Relative tolerance for rank and projection tests; multiplied by the
/// configuration diameter.
pub const DEGENERACY_TOL: f64 = 1e-9;

const HULL_MAX_ITER: usize = 10_000;

/// Volume of the unit ball in `R^d`: `π^{d/2} / Γ(d/2 + 1)`.
pub fn kappa(d: usize) -> f64 {
    assert!(d <= 64, "kappa is tabulated up to dimension 64");
    // κ_d = κ_{d-2} · 2π / d
    let mut k = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut j = if d.is_multiple_of(2) { 2 } else { 3 };
    while j <= d {
        k *= 2.0 * std::f64::consts::PI / j as f64;
        j += 2;
    }
    k
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `N ≤ 16` labelled points in `R^d`, `1 ≤ d ≤ 8`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfig {
    dim: usize,
    coords: Vec<f64>,
}

impl PointConfig {
    pub fn new(dim: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::Invalid(format!(
                "dimension {dim} out of range 1..={MAX_DIM}"
            )));
        }
        if rows.is_empty() || rows.len() > MAX_VARS {
            return Err(Error::Invalid(format!(
                "point count {} out of range 1..={MAX_VARS}",
                rows.len()
            )));
        }
        let mut coords = Vec::with_capacity(dim * rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Invalid(format!(
                    "point {} has {} coordinates, expected {dim}",
                    i + 1,
                    row.len()
                )));
            }
            if row.iter().any(|c| !c.is_finite()) {
                return Err(Error::Invalid(format!(
                    "point {} has a non-finite coordinate",
                    i + 1
                )));
            }
            coords.extend_from_slice(row);
        }
        Ok(PointConfig { dim, coords })
    }

    /// Internal constructor used for embeddings, which may exceed `MAX_DIM`.
    fn from_flat(dim: usize, coords: Vec<f64>) -> Self {
        debug_assert!(dim > 0 && coords.len().is_multiple_of(dim));
        PointConfig { dim, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    pub fn all(&self) -> IndexSet {
        IndexSet::full(self.len())
    }

    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut best = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                best = best.max(dist(self.point(i), self.point(j)));
            }
        }
        best
    }

    /// Absolute tolerance for degeneracy tests.
    pub fn tolerance(&self, relative: f64) -> f64 {
        relative * self.diameter().max(f64::MIN_POSITIVE)
    }

    pub fn centroid(&self) -> Vec<f64> {
        let n = self.len() as f64;
        (0..self.dim)
            .map(|c| self.points().map(|p| p[c]).sum::<f64>() / n)
            .collect()
    }

    pub fn translated(&self, t: &[f64]) -> Self {
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(k, x)| x + t[k % self.dim])
            .collect();
        Self::from_flat(self.dim, coords)
    }

    pub fn scaled_about_centroid(&self, factor: f64) -> Self {
        let c = self.centroid();
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(k, x)| c[k % self.dim] + factor * (x - c[k % self.dim]))
            .collect();
        Self::from_flat(self.dim, coords)
    }

    /// Zero-pads every point to `dim ≥ self.dim()` coordinates.
    pub fn embedded(&self, dim: usize) -> Self {
        assert!(dim >= self.dim, "cannot embed into a lower dimension");
        let mut coords = Vec::with_capacity(dim * self.len());
        for p in self.points() {
            coords.extend_from_slice(p);
            coords.extend(std::iter::repeat_n(0.0, dim - self.dim));
        }
        Self::from_flat(dim, coords)
    }

    /// Adds independent uniform noise in `[-eta, eta]` to every coordinate.
    pub fn perturbed(&self, eta: f64, stream: Substream) -> Self {
        let mut rng = stream.rng();
        let coords = self
            .coords
            .iter()
            .map(|x| x + eta * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        Self::from_flat(self.dim, coords)
    }

    /// Replaces point `i`.
    pub fn with_point(&self, i: usize, p: &[f64]) -> Self {
        let mut coords = self.coords.clone();
        coords[i * self.dim..(i + 1) * self.dim].copy_from_slice(p);
        Self::from_flat(self.dim, coords)
    }

    /// Bounding box of the points, as `(min, max)` per coordinate.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for p in self.points() {
            for c in 0..self.dim {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        (lo, hi)
    }
}

/// `k`-volume of the simplex spanned by `k+1` vertices, `sqrt(det G) / k!`
/// with the Gram matrix of the edge vectors from the first vertex.
pub fn simplex_volume<P: AsRef<[f64]>>(vertices: &[P]) -> f64 {
    assert!(!vertices.is_empty(), "a simplex needs at least one vertex");
    let k = vertices.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let v0 = vertices[0].as_ref();
    let edges: Vec<Vec<f64>> = vertices[1..]
        .iter()
        .map(|v| v.as_ref().iter().zip(v0).map(|(a, b)| a - b).collect())
        .collect();
    let gram = DMatrix::from_fn(k, k, |a, b| dot(&edges[a], &edges[b]));
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    gram.determinant().max(0.0).sqrt() / factorial
}

/// Support value `max_{i∈I} <u, p_i>`.
pub fn support_value(p: &PointConfig, indices: IndexSet, u: &[f64]) -> Result<f64> {
    if indices.is_empty() {
        return Err(Error::Invalid(
            "support value over an empty index set".into(),
        ));
    }
    Ok(indices
        .iter()
        .map(|i| dot(u, p.point(i)))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Gram–Schmidt on the edge vectors `p_{i_k} - p_{i_1}`; returns an
/// orthonormal basis of their span, or `None` if they are dependent at
/// absolute tolerance `tol`.
fn span_basis(p: &PointConfig, indices: IndexSet, tol: f64) -> Option<Vec<Vec<f64>>> {
    let mut it = indices.iter();
    let first = p.point(it.next()?);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in it {
        let mut v: Vec<f64> = p.point(i).iter().zip(first).map(|(a, b)| a - b).collect();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm <= tol {
            return None;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v);
    }
    Some(basis)
}

/// Whether the points indexed by `indices` are affinely independent at
/// relative tolerance `relative_tol`.
pub fn affinely_independent(p: &PointConfig, indices: IndexSet, relative_tol: f64) -> bool {
    indices.len() <= p.dim() + 1 && span_basis(p, indices, p.tolerance(relative_tol)).is_some()
}

/// Checks that every `m`-element subset of the points is affinely independent.
pub fn check_general_position(p: &PointConfig, m: usize, relative_tol: f64) -> Result<()> {
    let m = m.min(p.len());
    for s in IndexSet::k_subsets(p.len(), m) {
        if !affinely_independent(p, s, relative_tol) {
            return Err(Error::GeneralPosition(format!(
                "points {s} are affinely dependent in R^{}",
                p.dim()
            )));
        }
    }
    Ok(())
}

/// Orthonormal basis of the orthogonal complement of the linear span of
/// `p_{i_2} - p_{i_1}, …`; it has `d - |S| + 1` vectors.
pub fn orthocomplement_basis(
    p: &PointConfig,
    indices: IndexSet,
    relative_tol: f64,
) -> Result<Vec<Vec<f64>>> {
    if indices.is_empty() {
        return Err(Error::Invalid("empty index set".into()));
    }
    let d = p.dim();
    let span = (indices.len() <= d + 1)
        .then(|| span_basis(p, indices, p.tolerance(relative_tol)))
        .flatten()
        .ok_or_else(|| {
            Error::GeneralPosition(format!("points {indices} are affinely dependent in R^{d}"))
        })?;
    let mut basis = span.clone();
    let mut complement = Vec::new();
    while basis.len() < d {
        // greedily take the coordinate axis with the largest residual
        let mut best: Option<(f64, Vec<f64>)> = None;
        for axis in 0..d {
            let mut v = vec![0.0; d];
            v[axis] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&v, b);
                    v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                }
            }
            let norm = dot(&v, &v).sqrt();
            if best.as_ref().is_none_or(|(n, _)| norm > *n) {
                best = Some((norm, v));
            }
        }
        let (norm, mut v) = best.expect("dimension is positive");
        v.iter_mut().for_each(|x| *x /= norm);
        basis.push(v.clone());
        complement.push(v);
    }
    Ok(complement)
}

/// Euclidean distance from `x` to the convex hull of the points in `indices`.
///
/// Uses Wolfe's minimum-norm-point iteration: support queries in the
/// direction of the current iterate, with the active vertex set kept
/// affinely independent by line searches. No facet enumeration.
pub fn dist_to_hull(p: &PointConfig, indices: IndexSet, x: &[f64]) -> Result<f64> {
    Ok(nearest_in_hull(p, indices, x)?.0)
}

/// Distance to the hull together with the offset `y - x` to the nearest hull
/// point `y` (zero when `x` is inside).
pub fn nearest_in_hull(p: &PointConfig, indices: IndexSet, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    if indices.is_empty() {
        return Err(Error::Invalid(
            "distance to the hull of an empty index set".into(),
        ));
    }
    let shifted: Vec<Vec<f64>> = indices
        .iter()
        .map(|i| p.point(i).iter().zip(x).map(|(a, b)| a - b).collect())
        .collect();
    min_norm_point(&shifted, dot(x, x).sqrt())
}

/// Affine combination of `pts[active]` with minimum norm; weights sum to 1.
fn affine_minimizer(pts: &[Vec<f64>], active: &[usize]) -> Vec<f64> {
    let s = active.len();
    if s == 1 {
        return vec![1.0];
    }
    let base = &pts[active[0]];
    let d = base.len();
    let diffs = DMatrix::from_fn(d, s - 1, |r, c| pts[active[c + 1]][r] - base[r]);
    let base_v = DVector::from_column_slice(base);
    let gram = diffs.transpose() * &diffs;
    let rhs = -(diffs.transpose() * base_v);
    let eps = 1e-14 * gram.norm().max(f64::MIN_POSITIVE);
    let beta = gram
        .svd(true, true)
        .solve(&rhs, eps)
        .expect("SVD with both factors computed");
    let mut w = Vec::with_capacity(s);
    w.push(1.0 - beta.sum());
    w.extend(beta.iter().copied());
    w
}

fn combine(pts: &[Vec<f64>], active: &[usize], w: &[f64]) -> Vec<f64> {
    let d = pts[0].len();
    let mut y = vec![0.0; d];
    for (&a, &wa) in active.iter().zip(w) {
        y.iter_mut().zip(&pts[a]).for_each(|(yy, q)| *yy += wa * q);
    }
    y
}

fn min_norm_point(pts: &[Vec<f64>], x_norm: f64) -> Result<(f64, Vec<f64>)> {
    let scale2 = pts
        .iter()
        .map(|q| dot(q, q))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let start = (0..pts.len())
        .min_by(|&a, &b| dot(&pts[a], &pts[a]).total_cmp(&dot(&pts[b], &pts[b])))
        .expect("nonempty point set");
    let mut active = vec![start];
    let mut w = vec![1.0];
    let mut y = pts[start].clone();
    let mut gap = f64::INFINITY;
    for _ in 0..HULL_MAX_ITER {
        let yy = dot(&y, &y);
        if yy <= 1e-24 * scale2 || active.len() > y.len() {
            return Ok((0.0, vec![0.0; y.len()]));
        }
        let (j, best) = (0..pts.len())
            .map(|j| (j, dot(&y, &pts[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty point set");
        gap = yy - best;
        // dist >= |y| - gap/|y|
        if gap <= 1e-11 * (1.0 + x_norm) * yy.sqrt() || gap <= 1e-15 * scale2 || active.contains(&j)
        {
            return Ok((yy.sqrt(), y));
        }
        active.push(j);
        w.push(0.0);
        loop {
            let alpha = affine_minimizer(pts, &active);
            if alpha.iter().all(|&a| a > 1e-14) {
                w = alpha;
                break;
            }
            let theta = w
                .iter()
                .zip(&alpha)
                .filter(|(_, &a)| a <= 1e-14)
                .map(|(&wi, &ai)| if wi - ai > 0.0 { wi / (wi - ai) } else { 0.0 })
                .fold(1.0, f64::min);
            let mut next_active = Vec::with_capacity(active.len());
            let mut next_w = Vec::with_capacity(active.len());
            for ((&a, &wi), &ai) in active.iter().zip(&w).zip(&alpha) {
                let v = theta * ai + (1.0 - theta) * wi;
                if v > 1e-14 {
                    next_active.push(a);
                    next_w.push(v);
                }
            }
            if next_active.is_empty() {
                // numerical breakdown; keep the best single vertex
                next_active.push(j);
                next_w.push(1.0);
            }
            let total: f64 = next_w.iter().sum();
            next_w.iter_mut().for_each(|v| *v /= total);
            active = next_active;
            w = next_w;
            if active.len() == 1 {
                break;
            }
        }
        y = combine(pts, &active, &w);
    }
    Err(Error::NoConvergence {
        iterations: HULL_MAX_ITER,
        residual: gap,
    })
}
