//! Volumes of Boolean combinations of congruent balls, parallel bodies of
//! hulls, and large-radius expansions.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::algebra::{AtomSet, IndexSet};
use crate::error::{Error, Result};
use crate::geometry::{dist_to_hull, kappa, nearest_in_hull, PointConfig};
use crate::sampling::{fill_sphere, run_batches, sample_moments, MCEstimate, SampleRng, Substream};
use crate::volumes::{v_boolean_def, EstimatorOptions};

const TAG_VOLUME: u64 = 11;
const TAG_PARALLEL: u64 = 12;
const TAG_GAP: u64 = 13;
const TAG_FIT: u64 = 14;

/// Condition numbers above this make [`asymptotic_fit`] fail.
pub const MAX_CONDITION: f64 = 1e12;

fn check_radius(r: f64) -> Result<()> {
    if r.is_finite() && r > 0.0 {
        Ok(())
    } else {
        Err(Error::Invalid(format!(
            "radius must be positive and finite, got {r}"
        )))
    }
}

fn check_shape(f: &AtomSet, p: &PointConfig) -> Result<()> {
    if f.n() != p.len() {
        return Err(Error::Invalid(format!(
            "expression has {} variables but the configuration has {} points",
            f.n(),
            p.len()
        )));
    }
    Ok(())
}

/// Excluded index set of `x`: the balls of radius `r` that miss it.
fn excluded(p: &PointConfig, r: f64, x: &[f64]) -> IndexSet {
    let r2 = r * r;
    let mut bits = 0u32;
    for (i, c) in p.points().enumerate() {
        let d2: f64 = c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 > r2 {
            bits |= 1 << i;
        }
    }
    IndexSet::from_bits(bits)
}

/// Whether `x` lies in `B_f(p, r)`.
pub fn member(f: &AtomSet, p: &PointConfig, r: f64, x: &[f64]) -> bool {
    f.contains(excluded(p, r, x))
}

/// Hit counts of `inside` for uniform points of the bounding box of the
/// configuration padded by `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct BoxHits {
    hits: u64,
    samples: u64,
    box_volume: f64,
}

impl BoxHits {
    fn estimate(&self, seed: u64) -> MCEstimate {
        let n = self.samples as f64;
        let frac = self.hits as f64 / n;
        let stderr = if self.samples > 1 {
            self.box_volume * (frac * (1.0 - frac) / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MCEstimate {
            value: self.box_volume * frac,
            stderr,
            samples: self.samples,
            seed,
        }
    }
}

fn box_hits<F>(
    p: &PointConfig,
    r: f64,
    samples: u64,
    stream: Substream,
    inside: F,
) -> Result<BoxHits>
where
    F: Fn(&[f64]) -> Result<bool> + Sync,
{
    let (lo, hi) = p.bounds();
    let lo: Vec<f64> = lo.iter().map(|x| x - r).collect();
    let width: Vec<f64> = hi.iter().zip(&lo).map(|(h, l)| h + r - l).collect();
    let counts = run_batches(samples, stream, |len, rng| {
        let mut x = vec![0.0; lo.len()];
        let mut hits = 0u64;
        for _ in 0..len {
            for ((xi, l), w) in x.iter_mut().zip(&lo).zip(&width) {
                *xi = l + w * rng.random::<f64>();
            }
            if inside(&x)? {
                hits += 1;
            }
        }
        Ok(hits)
    })?;
    Ok(BoxHits {
        hits: counts.iter().sum(),
        samples,
        box_volume: width.iter().product(),
    })
}

fn volume_hits(
    f: &AtomSet,
    p: &PointConfig,
    r: f64,
    samples: u64,
    stream: Substream,
) -> Result<BoxHits> {
    check_shape(f, p)?;
    check_radius(r)?;
    if samples == 0 {
        return Err(Error::Invalid("samples must be at least 1".into()));
    }
    if !f.in_c() {
        return Err(Error::NotBounded);
    }
    box_hits(p, r, samples, stream, |x| Ok(member(f, p, r, x)))
}

/// Hit-or-miss estimate of `Vol_d(B_f(p, r))` over the padded bounding box.
/// The sample points depend on `(p, r, samples, seed)` only, so estimates
/// for disjoint elements with one seed add up exactly in their hit counts.
pub fn mc_volume(
    f: &AtomSet,
    p: &PointConfig,
    r: f64,
    samples: u64,
    seed: u64,
) -> Result<MCEstimate> {
    Ok(volume_hits(f, p, r, samples, Substream::new(seed).child(TAG_VOLUME))?.estimate(seed))
}

/// Area of the intersection of two disks of radius `r` with centers `l` apart.
pub fn lens_area(r: f64, l: f64) -> f64 {
    if l >= 2.0 * r {
        0.0
    } else {
        2.0 * r * r * (l / (2.0 * r)).acos() - l / 2.0 * (4.0 * r * r - l * l).sqrt()
    }
}

/// Exact area of `B_f` for two disks of radius `r` with centers `l` apart.
pub fn two_disk_oracle(f: &AtomSet, l: f64, r: f64) -> Result<f64> {
    if f.n() != 2 {
        return Err(Error::Invalid(format!(
            "the two-disk oracle needs 2 variables, got {}",
            f.n()
        )));
    }
    check_radius(r)?;
    if !(l.is_finite() && l >= 0.0) {
        return Err(Error::Invalid(format!(
            "center distance must be non-negative, got {l}"
        )));
    }
    if !f.in_c() {
        return Err(Error::NotBounded);
    }
    let lens = lens_area(r, l);
    let crescent = PI * r * r - lens;
    Ok(f.atoms()
        .map(|atom| if atom.is_empty() { lens } else { crescent })
        .sum())
}

/// Hit-or-miss estimate of the parallel body `conv{p_i : i ∈ I} + r B`.
pub fn parallel_body_volume(
    p: &PointConfig,
    indices: IndexSet,
    r: f64,
    samples: u64,
    seed: u64,
) -> Result<MCEstimate> {
    check_radius(r)?;
    if indices.is_empty() || !indices.is_subset(p.all()) {
        return Err(Error::Invalid(format!(
            "index set {indices} is empty or out of range"
        )));
    }
    if samples == 0 {
        return Err(Error::Invalid("samples must be at least 1".into()));
    }
    let r2 = r * r;
    let hits = box_hits(
        p,
        r,
        samples,
        Substream::new(seed).child(TAG_PARALLEL),
        |x| {
            let near_vertex = indices.iter().any(|i| {
                p.point(i)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    <= r2
            });
            Ok(near_vertex || dist_to_hull(p, indices, x)? <= r)
        },
    )?;
    Ok(hits.estimate(seed))
}

/// Largest `t` with `dist(c + t u, K) ≤ rho`, by safeguarded Newton steps
/// from the outside of `K_rho`.
fn ray_exit(p: &PointConfig, c: &[f64], u: &[f64], rho: f64, reach: f64) -> Result<f64> {
    let all = p.all();
    let mut lo = 0.0;
    let mut hi = rho + reach;
    let mut t = hi;
    let mut x = vec![0.0; c.len()];
    for _ in 0..200 {
        for ((xi, ci), ui) in x.iter_mut().zip(c).zip(u) {
            *xi = ci + t * ui;
        }
        let (dist, offset) = nearest_in_hull(p, all, &x)?;
        let g = dist - rho;
        if g > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        if hi - lo <= 1e-13 * (1.0 + hi) || g.abs() <= 1e-13 * (1.0 + rho) {
            return Ok(t.max(lo));
        }
        // d dist / dt = <u, x - y> / dist with y the nearest hull point
        let slope = if dist > 0.0 {
            -u.iter().zip(&offset).map(|(a, b)| a * b).sum::<f64>() / dist
        } else {
            0.0
        };
        let newton = t - g / slope;
        t = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(hi)
}

/// Estimate of `Vol(K_r) − Vol(⋃ B_i)` for the hull `K` of all points.
///
/// For `r ≥ diam K` the union contains `K_{r'}` with `r' = r − diam²/r`, so
/// only the shell `K_r ∖ K_{r'}` can contribute. Points of the shell are
/// drawn along rays from the centroid with radial density `∝ t^{d-1}`,
/// which makes the estimator `κ_d (t_r^d − t_{r'}^d) [x ∉ ⋃ B_i]`.
pub fn hull_union_gap(p: &PointConfig, r: f64, samples: u64, seed: u64) -> Result<MCEstimate> {
    check_radius(r)?;
    if samples == 0 {
        return Err(Error::Invalid("samples must be at least 1".into()));
    }
    let diameter = p.diameter();
    if r < diameter {
        return Err(Error::Invalid(format!(
            "radius {r} is below the configuration diameter {diameter}"
        )));
    }
    let inner = r - diameter * diameter / r;
    if inner >= r {
        return Ok(MCEstimate::exact(0.0, seed));
    }
    let c = p.centroid();
    let d = p.dim();
    let reach = p
        .points()
        .map(|q| {
            q.iter()
                .zip(&c)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    let scale = kappa(d);
    let slack = r * (1.0 + 1e-12);
    let [m] = sample_moments::<1, _>(
        samples,
        Substream::new(seed).child(TAG_GAP),
        |rng: &mut SampleRng| {
            let mut u = vec![0.0; d];
            fill_sphere(&mut u, rng);
            let t_in = ray_exit(p, &c, &u, inner, reach)?;
            let t_out = ray_exit(p, &c, &u, r, reach)?;
            let (a, b) = (t_in.powi(d as i32), t_out.powi(d as i32));
            let weight = (b - a).max(0.0);
            let t = (a + rng.random::<f64>() * weight).powf(1.0 / d as f64);
            let x: Vec<f64> = c.iter().zip(&u).map(|(ci, ui)| ci + t * ui).collect();
            let covered = excluded(p, slack, &x) != p.all();
            Ok(Some([if covered { 0.0 } else { scale * weight }]))
        },
    )?;
    Ok(m.estimate(seed))
}

/// Outcome of fitting `c_d r^d + c_{d-1} r^{d-1} + c_{d-2} r^{d-2}` to
/// measured volumes, next to the predictions `κ_{d-k} V_{f,k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticReport {
    pub dim: usize,
    pub radii: Vec<f64>,
    pub volumes: Vec<MCEstimate>,
    /// Coefficients of `r^d`, `r^{d-1}`, `r^{d-2}`.
    pub fitted: [f64; 3],
    pub fitted_stderr: [f64; 3],
    pub covariance: [[f64; 3]; 3],
    pub predicted: [MCEstimate; 3],
    /// Weighted sum of squared residuals.
    pub residual: f64,
    pub condition: f64,
}

impl AsymptoticReport {
    /// `|fitted − predicted|` over the combined standard error, per term.
    pub fn z_scores(&self) -> [f64; 3] {
        std::array::from_fn(|i| {
            let diff = (self.fitted[i] - self.predicted[i].value).abs();
            let sigma = self.fitted_stderr[i].hypot(self.predicted[i].stderr);
            if sigma > 0.0 {
                diff / sigma
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
    }

    /// Whether every term agrees within `max(sigmas · σ, floor)`.
    pub fn agrees(&self, sigmas: f64, floor: f64) -> bool {
        (0..3).all(|i| {
            let diff = (self.fitted[i] - self.predicted[i].value).abs();
            let sigma = self.fitted_stderr[i].hypot(self.predicted[i].stderr);
            diff <= (sigmas * sigma).max(floor)
        })
    }
}

/// Weighted least squares of `volumes` against `r^d, r^{d-1}, r^{d-2}`.
fn weighted_fit(
    d: usize,
    radii: &[f64],
    volumes: &[MCEstimate],
) -> Result<([f64; 3], [[f64; 3]; 3], f64, f64)> {
    let rows = radii.len();
    let weights: Vec<f64> = volumes
        .iter()
        .map(|v| 1.0 / v.stderr.max(1e-12 * v.value.abs()).max(f64::MIN_POSITIVE))
        .collect();
    let design = DMatrix::from_fn(rows, 3, |i, j| weights[i] * radii[i].powi((d - j) as i32));
    let target = DVector::from_fn(rows, |i, _| weights[i] * volumes[i].value);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned(condition));
    }
    let coef = svd
        .solve(&target, 0.0)
        .map_err(|_| Error::IllConditioned(condition))?;
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut covariance = [[0.0; 3]; 3];
    for (a, row) in covariance.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            *cell = (0..3)
                .map(|s| {
                    v_t[(s, a)] * v_t[(s, b)] / (svd.singular_values[s] * svd.singular_values[s])
                })
                .sum();
        }
    }
    let residual = (&design * &coef - &target).norm_squared();
    Ok(([coef[0], coef[1], coef[2]], covariance, residual, condition))
}

/// Fits the three leading terms of `Vol(B_f(p, r))` in `r` and compares them
/// with `κ_d V_{f,0}`, `κ_{d-1} V_{f,1}`, `κ_{d-2} V_{f,2}`.
///
/// `opts.samples` is used both per radius and per sphere integral; the
/// perturbation in `opts` applies to the `V_{f,2}` prediction only.
pub fn asymptotic_fit(
    f: &AtomSet,
    p: &PointConfig,
    radii: &[f64],
    opts: &EstimatorOptions,
) -> Result<AsymptoticReport> {
    check_shape(f, p)?;
    opts.validate()?;
    let d = p.dim();
    if d < 2 {
        return Err(Error::Invalid(
            "the three-term fit needs dimension at least 2".into(),
        ));
    }
    if radii.len() < 3 {
        return Err(Error::Invalid(format!(
            "at least 3 radii are needed, got {}",
            radii.len()
        )));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid("radii must be strictly increasing".into()));
    }
    let diameter = p.diameter();
    if radii[0] < 2.0 * diameter {
        return Err(Error::Invalid(format!(
            "radii must be at least twice the diameter {diameter}"
        )));
    }
    if !f.in_c() {
        return Err(Error::NotBounded);
    }
    let root = Substream::new(opts.seed).child(TAG_FIT);
    let volumes = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            Ok(volume_hits(f, p, r, opts.samples, root.child(i as u64))?.estimate(opts.seed))
        })
        .collect::<Result<Vec<_>>>()?;
    let (fitted, covariance, residual, condition) = weighted_fit(d, radii, &volumes)?;
    let predicted: [MCEstimate; 3] = [
        v_boolean_def(f, p, 0, opts)?.estimate.scaled(kappa(d)),
        v_boolean_def(f, p, 1, opts)?.estimate.scaled(kappa(d - 1)),
        v_boolean_def(f, p, 2, opts)?.estimate.scaled(kappa(d - 2)),
    ];
    Ok(AsymptoticReport {
        dim: d,
        radii: radii.to_vec(),
        volumes,
        fitted,
        fitted_stderr: std::array::from_fn(|i| covariance[i][i].max(0.0).sqrt()),
        covariance,
        predicted,
        residual,
        condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::eval_to_atoms;
    use crate::expr::parse;

    fn atoms(text: &str, n: usize) -> AtomSet {
        eval_to_atoms(&parse(text).unwrap(), n).unwrap()
    }

    fn cfg(rows: &[&[f64]]) -> PointConfig {
        PointConfig::new(rows[0].len(), rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn within(e: &MCEstimate, target: f64, sigmas: f64) -> bool {
        (e.value - target).abs() <= sigmas * e.stderr
    }

    #[test]
    fn membership_examples() {
        let p = cfg(&[&[0.0, 0.0], &[3.0, 0.0]]);
        assert!(member(&atoms("x1", 2), &p, 1.0, &[0.0, 0.0]));
        assert!(member(&atoms("x1 \\ x2", 2), &p, 1.0, &[0.0, 0.0]));
        assert!(!member(&atoms("x1 & x2", 2), &p, 1.0, &[10.0, 10.0]));
        assert!(!member(&atoms("x1 | x2", 2), &p, 1.0, &[1.5, 0.0]));
    }

    #[test]
    fn lens_values() {
        assert_eq!(lens_area(1.0, 2.0), 0.0);
        assert!((lens_area(2.0, 0.0) - 4.0 * PI).abs() < 1e-12);
        let expected = 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0;
        assert!((lens_area(1.0, 1.0) - expected).abs() < 1e-12);
        let union = two_disk_oracle(&atoms("x1 | x2", 2), 1.0, 1.0).unwrap();
        assert!((union - (2.0 * PI - expected)).abs() < 1e-12);
        assert!((union - 5.0548).abs() < 1e-4);
        assert!(matches!(
            two_disk_oracle(&atoms("~x1", 2), 1.0, 1.0),
            Err(Error::NotBounded)
        ));
    }

    #[test]
    fn disk_and_union_volumes() {
        let disk = cfg(&[&[0.0, 0.0]]);
        let v = mc_volume(&atoms("x1", 1), &disk, 1.0, 200_000, 1).unwrap();
        assert!(within(&v, PI, 3.0), "{v:?}");
        let p = cfg(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let v = mc_volume(&atoms("x1 | x2", 2), &p, 1.0, 200_000, 2).unwrap();
        let exact = two_disk_oracle(&atoms("x1 | x2", 2), 1.0, 1.0).unwrap();
        assert!(within(&v, exact, 3.0), "{v:?} vs {exact}");
        assert!(matches!(
            mc_volume(&atoms("~x1", 2), &p, 1.0, 10, 0),
            Err(Error::NotBounded)
        ));
    }

    #[test]
    fn shared_stream_volumes_are_additive() {
        let p = cfg(&[&[0.0, 0.0], &[1.0, 0.3], &[0.4, 1.1]]);
        let stream = Substream::new(8).child(TAG_VOLUME);
        let f = atoms("x1 \\ x2", 3);
        let g = atoms("x2 & x3", 3);
        assert!(f.is_disjoint(&g));
        let a = volume_hits(&f, &p, 1.2, 50_000, stream).unwrap();
        let b = volume_hits(&g, &p, 1.2, 50_000, stream).unwrap();
        let c = volume_hits(&f.union(&g), &p, 1.2, 50_000, stream).unwrap();
        assert_eq!(a.hits + b.hits, c.hits);
        assert_eq!(a.box_volume, c.box_volume);
    }

    #[test]
    fn parallel_bodies_follow_steiner() {
        let r = 0.7;
        let point = cfg(&[&[0.5, 0.5]]);
        let v = parallel_body_volume(&point, point.all(), r, 100_000, 1).unwrap();
        assert!(within(&v, PI * r * r, 3.0), "{v:?}");
        let square = cfg(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        let v = parallel_body_volume(&square, square.all(), r, 100_000, 2).unwrap();
        assert!(within(&v, 1.0 + 4.0 * r + PI * r * r, 3.0), "{v:?}");
        let seg = cfg(&[&[0.0, 0.0], &[1.5, 0.0]]);
        let v = parallel_body_volume(&seg, seg.all(), r, 100_000, 3).unwrap();
        assert!(within(&v, 2.0 * 1.5 * r + PI * r * r, 3.0), "{v:?}");
    }

    #[test]
    fn union_sits_inside_the_parallel_body() {
        let p = cfg(&[&[0.0, 0.0], &[1.0, 0.2], &[0.3, 0.9]]);
        let union = atoms("x1 | x2 | x3", 3);
        let mut rng = Substream::new(4).rng();
        for _ in 0..5_000 {
            let x = [rng.random_range(-2.0..3.0), rng.random_range(-2.0..3.0)];
            if member(&union, &p, 1.1, &x) {
                assert!(dist_to_hull(&p, p.all(), &x).unwrap() <= 1.1 + 1e-9);
            }
        }
    }

    #[test]
    fn ray_exits_of_a_square() {
        let square = cfg(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        let c = square.centroid();
        let t = ray_exit(&square, &c, &[1.0, 0.0], 2.0, 1.0).unwrap();
        assert!((t - 2.5).abs() < 1e-9, "{t}");
        let t = ray_exit(&square, &c, &[0.0, -1.0], 0.0, 1.0).unwrap();
        assert!((t - 0.5).abs() < 1e-9, "{t}");
        let diag = [0.5f64.sqrt(), 0.5f64.sqrt()];
        let t = ray_exit(&square, &c, &diag, 1.0, 1.0).unwrap();
        assert!((t - (0.5f64.sqrt() + 1.0)).abs() < 1e-9, "{t}");
    }

    #[test]
    fn segment_gap_matches_closed_form() {
        // stadium minus two disks: 4 ∫_0^{L/2} (r − sqrt(r² − s²)) ds
        let l: f64 = 1.0;
        let r: f64 = 5.0;
        let h = l / 2.0;
        let exact =
            4.0 * (r * h - (h / 2.0 * (r * r - h * h).sqrt() + r * r / 2.0 * (h / r).asin()));
        let seg = cfg(&[&[-h, 0.0], &[h, 0.0]]);
        let g = hull_union_gap(&seg, r, 200_000, 7).unwrap();
        assert!(within(&g, exact, 3.0), "{g:?} vs {exact}");
        assert!((exact - l.powi(3) / (12.0 * r)).abs() < 1e-4);
    }

    #[test]
    fn single_point_gap_is_zero() {
        let p = cfg(&[&[0.2, -0.4, 1.0]]);
        let g = hull_union_gap(&p, 3.0, 1000, 1).unwrap();
        assert_eq!((g.value, g.stderr), (0.0, 0.0));
    }

    #[test]
    fn fit_recovers_a_known_polynomial() {
        let radii = [2.0, 3.0, 5.0, 8.0];
        let volumes: Vec<MCEstimate> = radii
            .iter()
            .map(|r| MCEstimate {
                value: PI * r * r + 4.0 * r + 1.0,
                stderr: 0.01,
                samples: 1,
                seed: 0,
            })
            .collect();
        let (coef, cov, residual, _) = weighted_fit(2, &radii, &volumes).unwrap();
        for (c, e) in coef.iter().zip([PI, 4.0, 1.0]) {
            assert!((c - e).abs() < 1e-9);
        }
        assert!(residual < 1e-12);
        assert!(cov[0][0] > 0.0 && cov[2][2] > cov[0][0]);
    }

    #[test]
    fn fit_rejects_bad_radii() {
        let p = cfg(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let f = atoms("x1 \\ x2", 2);
        let opts = EstimatorOptions::new(100, 0);
        for radii in [&[5.0, 10.0][..], &[5.0, 5.0, 10.0], &[1.0, 5.0, 10.0]] {
            assert!(matches!(
                asymptotic_fit(&f, &p, radii, &opts),
                Err(Error::Invalid(_))
            ));
        }
        let err = asymptotic_fit(&f, &p, &[5.0, 5.0, 6.0], &opts).unwrap_err();
        assert_eq!(
            err.to_string(),
            "invalid input: radii must be strictly increasing"
        );
    }
}
