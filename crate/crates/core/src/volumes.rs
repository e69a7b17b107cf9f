//! Boolean intrinsic volumes `V_{f,k}(p)`.
//!
//! Three estimators are provided:
//!
//! * [`v_boolean_def`]: `Σ_I m_{f,I} V_k(K_I)`, with `V_1` of each hull from
//!   its mean width and `V_2` from the normal-cone fractions of its triangles;
//! * [`v_boolean_cones`]: `Σ_{|S|=k+1} ν_{f,S} Vol_k(σ_S)`, where `ν_{f,S}` is
//!   the mean over the unit sphere orthogonal to `σ_S` of the integer
//!   function [`n_value`];
//! * [`v1_minmax`]: for lattice elements, the sphere integral of `f` evaluated
//!   on the support values with `∪ = max` and `∩ = min`.
//!
//! Sphere directions come from substreams keyed by the estimator and the
//! simplex `S` only, never by `f`. Two elements evaluated with the same seed
//! therefore see identical directions, which makes additivity, complement
//! and duality identities hold sample by sample.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::algebra::{AtomSet, IndexSet};
use crate::error::{Error, Result};
use crate::geometry::{
    self, binomial, check_general_position, dot, kappa, orthocomplement_basis, simplex_volume,
    PointConfig,
};
use crate::sampling::{
    accept_loop, fill_sphere, run_batches, sample_moments, MCEstimate, Moments, SampleRng,
    Substream,
};

const TAG_CONES: u64 = 1;
const TAG_DEFINITION: u64 = 2;
const TAG_MINMAX: u64 = 3;
const TAG_PERTURB: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorOptions {
    /// Direction samples per sphere integral.
    pub samples: u64,
    pub seed: u64,
    /// Magnitude of uniform coordinate noise applied before the
    /// general-position check.
    pub perturb: Option<f64>,
    /// Relative degeneracy and tie tolerance, scaled by the diameter.
    pub tolerance: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        EstimatorOptions {
            samples: 1_000_000,
            seed: 0,
            perturb: None,
            tolerance: geometry::DEGENERACY_TOL,
        }
    }
}

impl EstimatorOptions {
    pub fn new(samples: u64, seed: u64) -> Self {
        EstimatorOptions {
            samples,
            seed,
            ..Default::default()
        }
    }

    pub fn perturbed(self, eta: f64) -> Self {
        EstimatorOptions {
            perturb: Some(eta),
            ..self
        }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        EstimatorOptions { seed, ..self }
    }

    fn stream(&self, tag: u64) -> Substream {
        Substream::new(self.seed).child(tag)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Invalid("samples must be at least 1".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(Error::Invalid(
                "tolerance must be a finite non-negative number".into(),
            ));
        }
        if let Some(eta) = self.perturb {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(Error::Invalid(
                    "perturbation must be a finite positive number".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Definition,
    Cones,
    MinMax,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Definition => "definition",
            Method::Cones => "cones",
            Method::MinMax => "minmax",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "definition" => Ok(Method::Definition),
            "cones" => Ok(Method::Cones),
            "minmax" => Ok(Method::MinMax),
            other => Err(Error::Invalid(format!(
                "unknown method {other:?}; expected definition, cones or minmax"
            ))),
        }
    }
}

/// Sphere average of an integer cone function over one simplex `σ_S`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSample {
    pub subset: IndexSet,
    pub simplex_volume: f64,
    /// Number of samples that produced each value.
    pub histogram: BTreeMap<i64, u64>,
    pub estimate: MCEstimate,
}

impl ConeSample {
    fn negated(mut self) -> Self {
        self.histogram = self.histogram.into_iter().map(|(n, c)| (-n, c)).collect();
        self.estimate = self.estimate.scaled(-1.0);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicVolumeReport {
    pub k: usize,
    /// Ambient dimension of the configuration as given.
    pub dim: usize,
    pub method: Method,
    pub estimate: MCEstimate,
    pub perturbation: Option<f64>,
    /// Per-simplex averages; empty for estimators that do not use them.
    pub cones: Vec<ConeSample>,
}

impl IntrinsicVolumeReport {
    pub fn value(&self) -> f64 {
        self.estimate.value
    }

    pub fn stderr(&self) -> f64 {
        self.estimate.stderr
    }

    /// `(j, W^d_{f,j})` with `j = d - k`, using `W^d_{f,j} = κ_j V_{f,d-j} / C(d,j)`.
    pub fn quermassintegral(&self, d: usize) -> Option<(usize, MCEstimate)> {
        (self.k <= d).then(|| {
            let j = d - self.k;
            (j, self.estimate.scaled(kappa(j) / binomial(d, j)))
        })
    }

    fn negated(mut self) -> Self {
        self.estimate = self.estimate.scaled(-1.0);
        self.cones = self.cones.into_iter().map(ConeSample::negated).collect();
        self
    }
}

fn check_inputs(f: &AtomSet, p: &PointConfig, opts: &EstimatorOptions) -> Result<()> {
    opts.validate()?;
    if f.n() != p.len() {
        return Err(Error::Invalid(format!(
            "expression has {} variables but the configuration has {} points",
            f.n(),
            p.len()
        )));
    }
    Ok(())
}

/// Embeds into `R^{k+1}` when `k ≥ d`, applies the optional perturbation and
/// checks that any `k+2` points are affinely independent.
fn cone_geometry(p: &PointConfig, k: usize, opts: &EstimatorOptions) -> Result<PointConfig> {
    let mut q = if k >= p.dim() {
        p.embedded(k + 1)
    } else {
        p.clone()
    };
    if let Some(eta) = opts.perturb {
        q = q.perturbed(eta, opts.stream(TAG_PERTURB));
    }
    check_general_position(&q, k + 2, opts.tolerance)?;
    Ok(q)
}

/// Points strictly on the negative side of the hyperplane through `σ_S`
/// orthogonal to `u`; `None` if some point outside `S` is within `tie` of it.
fn negative_side(p: &PointConfig, s: IndexSet, u: &[f64], tie: f64) -> Option<IndexSet> {
    let anchor = dot(u, p.point(s.iter().next()?));
    let mut minus = 0u32;
    for j in 0..p.len() {
        if s.contains(j) {
            continue;
        }
        let t = dot(u, p.point(j)) - anchor;
        if t.abs() < tie {
            return None;
        }
        if t < 0.0 {
            minus |= 1 << j;
        }
    }
    Some(IndexSet::from_bits(minus))
}

/// `(-1)^{|S|} χ̃` of `f` with `x_j → ∅` on `minus`, `x_j → X` off `S ∪ minus`.
fn n_from_split(f: &AtomSet, s: IndexSet, minus: IndexSet) -> i64 {
    let chi: i64 = s
        .subsets()
        .filter(|&j| f.contains(minus.union(j)))
        .map(|j| if j.len() % 2 == 1 { 1 } else { -1 })
        .sum();
    if s.len().is_multiple_of(2) {
        chi
    } else {
        -chi
    }
}

/// The integer `n_{f,S,p}(u)` for a unit vector `u` orthogonal to the affine
/// span of `σ_S`. Returns `Ok(None)` when a point outside `S` lies within
/// `tie` of the hyperplane; callers resample `u` in that case.
pub fn n_value(
    f: &AtomSet,
    s: IndexSet,
    p: &PointConfig,
    u: &[f64],
    tie: f64,
) -> Result<Option<i64>> {
    if f.n() != p.len() {
        return Err(Error::Invalid(
            "variable count differs from point count".into(),
        ));
    }
    if s.is_empty() || !s.is_subset(p.all()) {
        return Err(Error::Invalid(format!(
            "index set {s} is empty or out of range"
        )));
    }
    if u.len() != p.dim() {
        return Err(Error::Invalid(format!(
            "direction has {} coordinates, expected {}",
            u.len(),
            p.dim()
        )));
    }
    Ok(negative_side(p, s, u, tie).map(|minus| n_from_split(f, s, minus)))
}

/// Mean of `value(negative side)` over the unit sphere orthogonal to `σ_S`.
/// Directions are drawn in antipodal pairs `±u`, and each sample is the pair
/// average.
fn sphere_mean<G>(
    p: &PointConfig,
    s: IndexSet,
    samples: u64,
    stream: Substream,
    relative_tol: f64,
    value: G,
) -> Result<ConeSample>
where
    G: Fn(IndexSet) -> i64 + Sync,
{
    let k = s.len() - 1;
    let basis = orthocomplement_basis(p, s, relative_tol)?;
    let tie = p.tolerance(relative_tol);
    let vertices: Vec<&[f64]> = s.iter().map(|i| p.point(i)).collect();
    let volume = simplex_volume(&vertices);
    let bound = 1i64 << k;
    let checked = |n: i64| {
        assert!(
            n.abs() <= bound,
            "cone value {n} outside [-{bound}, {bound}]"
        );
        n
    };

    if basis.len() == 1 {
        let up = basis[0].clone();
        let down: Vec<f64> = up.iter().map(|x| -x).collect();
        let mut histogram = BTreeMap::new();
        let mut total = 0;
        for u in [&up, &down] {
            let minus = negative_side(p, s, u, tie).ok_or_else(|| {
                Error::GeneralPosition(format!("a point lies in the affine hull of {s}"))
            })?;
            let n = checked(value(minus));
            *histogram.entry(n).or_insert(0) += 1;
            total += n;
        }
        return Ok(ConeSample {
            subset: s,
            simplex_volume: volume,
            histogram,
            estimate: MCEstimate::exact(total as f64 / 2.0, stream.seed()),
        });
    }

    let d = p.dim();
    let batches = run_batches(samples, stream, |len, rng| {
        let mut coeffs = vec![0.0; basis.len()];
        let mut u = vec![0.0; d];
        let mut moments = Moments::default();
        let mut histogram = BTreeMap::new();
        accept_loop(
            len,
            rng,
            |rng: &mut SampleRng| {
                fill_sphere(&mut coeffs, rng);
                u.iter_mut().for_each(|x| *x = 0.0);
                for (c, b) in coeffs.iter().zip(&basis) {
                    u.iter_mut().zip(b).for_each(|(x, y)| *x += c * y);
                }
                Ok(negative_side(p, s, &u, tie).map(|minus| {
                    let opposite = p.all().minus(s).minus(minus);
                    (value(minus), value(opposite))
                }))
            },
            |(a, b)| {
                let (a, b) = (checked(a), checked(b));
                moments.push((a + b) as f64 / 2.0);
                *histogram.entry(a).or_insert(0u64) += 1;
                *histogram.entry(b).or_insert(0u64) += 1;
            },
        )?;
        Ok((moments, histogram))
    })?;
    let mut moments = Moments::default();
    let mut histogram = BTreeMap::new();
    for (m, h) in &batches {
        moments.merge(m);
        for (n, c) in h {
            *histogram.entry(*n).or_insert(0) += c;
        }
    }
    Ok(ConeSample {
        subset: s,
        simplex_volume: volume,
        histogram,
        estimate: moments.estimate(stream.seed()),
    })
}

/// `ν_{f,S,p}`, the mean of [`n_value`] over the unit sphere orthogonal to
/// `σ_S`. Exact when that sphere has two points.
pub fn nu_mean(
    f: &AtomSet,
    s: IndexSet,
    p: &PointConfig,
    opts: &EstimatorOptions,
) -> Result<ConeSample> {
    check_inputs(f, p, opts)?;
    if s.is_empty() || !s.is_subset(p.all()) {
        return Err(Error::Invalid(format!(
            "index set {s} is empty or out of range"
        )));
    }
    if s.len() > p.dim() {
        return Err(Error::Invalid(format!(
            "a simplex on {} points needs dimension at least {}",
            s.len(),
            s.len()
        )));
    }
    let stream = opts.stream(TAG_CONES).child(s.bits() as u64);
    sphere_mean(p, s, opts.samples, stream, opts.tolerance, |minus| {
        n_from_split(f, s, minus)
    })
}

fn combine_cones(cones: &[ConeSample], seed: u64) -> MCEstimate {
    let value = cones
        .iter()
        .map(|c| c.estimate.value * c.simplex_volume)
        .sum();
    let variance: f64 = cones
        .iter()
        .map(|c| (c.estimate.stderr * c.simplex_volume).powi(2))
        .sum();
    MCEstimate {
        value,
        stderr: variance.sqrt(),
        samples: cones.iter().map(|c| c.estimate.samples).sum(),
        seed,
    }
}

/// `V_{f,k}` as `Σ_{|S|=k+1} ν_{f,S} Vol_k(σ_S)`.
///
/// Any `k+2` points must be affinely independent unless a perturbation is
/// requested. For `k ≥ d` the configuration is zero-padded into `R^{k+1}`.
/// Elements containing the unbounded atom are handled through their
/// complement.
pub fn v_boolean_cones(
    f: &AtomSet,
    p: &PointConfig,
    k: usize,
    opts: &EstimatorOptions,
) -> Result<IntrinsicVolumeReport> {
    check_inputs(f, p, opts)?;
    if !f.in_c() {
        return Ok(v_boolean_cones(&f.complement(), p, k, opts)?.negated());
    }
    let mut report = IntrinsicVolumeReport {
        k,
        dim: p.dim(),
        method: Method::Cones,
        estimate: MCEstimate::exact(0.0, opts.seed),
        perturbation: opts.perturb,
        cones: Vec::new(),
    };
    if k + 1 > p.len() {
        return Ok(report);
    }
    let q = cone_geometry(p, k, opts)?;
    let root = opts.stream(TAG_CONES);
    report.cones = IndexSet::k_subsets(p.len(), k + 1)
        .map(|s| {
            sphere_mean(
                &q,
                s,
                opts.samples,
                root.child(s.bits() as u64),
                opts.tolerance,
                |minus| n_from_split(f, s, minus),
            )
        })
        .collect::<Result<_>>()?;
    report.estimate = combine_cones(&report.cones, opts.seed);
    Ok(report)
}

/// Nonzero inclusion–exclusion coefficients of a bounded element.
fn coefficient_terms(f: &AtomSet) -> Result<Vec<(IndexSet, i64)>> {
    Ok(f.coefficients()?.nonzero().collect())
}

/// `Σ_I m_I (max_{i∈I} t_i − min_{i∈I} t_i)` for projections `t`.
fn width_combination(terms: &[(IndexSet, i64)], t: &[f64]) -> f64 {
    terms
        .iter()
        .map(|&(set, m)| {
            let (lo, hi) = set
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
                    (lo.min(t[i]), hi.max(t[i]))
                });
            m as f64 * (hi - lo)
        })
        .sum()
}

fn project(p: &PointConfig, u: &[f64], t: &mut [f64]) {
    for (ti, pi) in t.iter_mut().zip(p.points()) {
        *ti = dot(u, pi);
    }
}

/// `V_1 = (d κ_d / κ_{d-1}) E[h(u)]`; averaging `u` with `-u` turns the
/// support value into half the width.
fn mean_width_scale(d: usize) -> f64 {
    d as f64 * kappa(d) / kappa(d - 1) / 2.0
}

fn width_estimate(
    p: &PointConfig,
    terms: &[(IndexSet, i64)],
    samples: u64,
    stream: Substream,
) -> Result<MCEstimate> {
    let d = p.dim();
    let scale = mean_width_scale(d);
    let mut t = vec![0.0; p.len()];
    if d == 1 {
        project(p, &[1.0], &mut t);
        return Ok(MCEstimate::exact(
            scale * width_combination(terms, &t),
            stream.seed(),
        ));
    }
    let [m] = sample_moments::<1, _>(samples, stream, |rng| {
        let mut u = vec![0.0; d];
        let mut t = vec![0.0; p.len()];
        fill_sphere(&mut u, rng);
        project(p, &u, &mut t);
        Ok(Some([scale * width_combination(terms, &t)]))
    })?;
    Ok(m.estimate(stream.seed()))
}

/// `V_{f,2}` from the normal-cone fractions of the hull triangles: for a
/// direction `u` orthogonal to `σ_S`, `σ_S` is exposed in `K_I` exactly when
/// `S ⊆ I` and every other point of `I` lies on the negative side.
fn triangle_estimate(
    p: &PointConfig,
    terms: &[(IndexSet, i64)],
    opts: &EstimatorOptions,
) -> Result<(MCEstimate, Vec<ConeSample>)> {
    let q = cone_geometry(p, 2, opts)?;
    let root = opts.stream(TAG_DEFINITION);
    let mut cones = Vec::new();
    for s in IndexSet::k_subsets(p.len(), 3) {
        let relevant: Vec<(IndexSet, i64)> = terms
            .iter()
            .copied()
            .filter(|(set, _)| s.is_subset(*set))
            .collect();
        if relevant.is_empty() {
            continue;
        }
        cones.push(sphere_mean(
            &q,
            s,
            opts.samples,
            root.child(s.bits() as u64),
            opts.tolerance,
            |minus| {
                relevant
                    .iter()
                    .filter(|(set, _)| set.minus(s).is_subset(minus))
                    .map(|(_, m)| m)
                    .sum()
            },
        )?);
    }
    Ok((combine_cones(&cones, opts.seed), cones))
}

/// `V_{f,k} = Σ_I m_{f,I} V_k(K_I)` for `k ∈ {0, 1, 2}`.
///
/// `V_0` is exact. `V_1` averages hull widths over shared random directions.
/// `V_2` sums normal-cone fractions of hull triangles and carries the same
/// general-position requirement as [`v_boolean_cones`].
pub fn v_boolean_def(
    f: &AtomSet,
    p: &PointConfig,
    k: usize,
    opts: &EstimatorOptions,
) -> Result<IntrinsicVolumeReport> {
    check_inputs(f, p, opts)?;
    if !f.in_c() {
        return Ok(v_boolean_def(&f.complement(), p, k, opts)?.negated());
    }
    let terms = coefficient_terms(f)?;
    let mut report = IntrinsicVolumeReport {
        k,
        dim: p.dim(),
        method: Method::Definition,
        estimate: MCEstimate::exact(0.0, opts.seed),
        perturbation: None,
        cones: Vec::new(),
    };
    match k {
        0 => {
            report.estimate.value = terms.iter().map(|(_, m)| *m as f64).sum();
        }
        1 => {
            report.estimate = width_estimate(p, &terms, opts.samples, opts.stream(TAG_DEFINITION))?;
        }
        2 => {
            let (estimate, cones) = triangle_estimate(p, &terms, opts)?;
            report.estimate = estimate;
            report.cones = cones;
            report.perturbation = opts.perturb;
        }
        _ => {
            return Err(Error::Invalid(format!(
                "the definition estimator supports k in 0..=2, got {k}"
            )))
        }
    }
    Ok(report)
}

/// `f(t)` with `∪ = max`, `∩ = min`, as `max_F min_{j∉F} t_j` over the facets
/// `F` of the complex of `f`, together with `-f(-t) = min_F max_{j∉F} t_j`.
fn lattice_pair(cofacets: &[IndexSet], t: &[f64]) -> (f64, f64) {
    let mut upper = f64::NEG_INFINITY;
    let mut lower = f64::INFINITY;
    for set in cofacets {
        let (lo, hi) = set
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
                (lo.min(t[i]), hi.max(t[i]))
            });
        upper = upper.max(lo);
        lower = lower.min(hi);
    }
    (upper, lower)
}

/// `V_{f,1}` for a lattice element as `(1/κ_{d-1}) ∫ f(<u,p_1>, …, <u,p_N>) du`.
pub fn v1_minmax(
    f: &AtomSet,
    p: &PointConfig,
    opts: &EstimatorOptions,
) -> Result<IntrinsicVolumeReport> {
    check_inputs(f, p, opts)?;
    let facets = f.facets().ok_or(Error::NotLattice)?;
    let full = p.all();
    let cofacets: Vec<IndexSet> = facets.iter().map(|&face| full.minus(face)).collect();
    let d = p.dim();
    let scale = mean_width_scale(d);
    let stream = opts.stream(TAG_MINMAX);
    let estimate = if d == 1 {
        let (hi, lo) = lattice_pair(&cofacets, &p.rows().concat());
        MCEstimate::exact(scale * (hi - lo), opts.seed)
    } else {
        let [m] = sample_moments::<1, _>(opts.samples, stream, |rng| {
            let mut u = vec![0.0; d];
            let mut t = vec![0.0; p.len()];
            fill_sphere(&mut u, rng);
            project(p, &u, &mut t);
            let (hi, lo) = lattice_pair(&cofacets, &t);
            Ok(Some([scale * (hi - lo)]))
        })?;
        m.estimate(opts.seed)
    };
    Ok(IntrinsicVolumeReport {
        k: 1,
        dim: d,
        method: Method::MinMax,
        estimate,
        perturbation: None,
        cones: Vec::new(),
    })
}

/// Estimates of `V_{f,1}(p)`, `V_{f,1}(q)` and their difference from one
/// shared direction stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedEstimate {
    pub first: MCEstimate,
    pub second: MCEstimate,
    pub difference: MCEstimate,
}

/// `V_{f,1}(p) − V_{f,1}(q)` by the width estimator with common directions.
pub fn v1_paired(
    f: &AtomSet,
    p: &PointConfig,
    q: &PointConfig,
    opts: &EstimatorOptions,
) -> Result<PairedEstimate> {
    check_inputs(f, p, opts)?;
    if p.len() != q.len() || p.dim() != q.dim() {
        return Err(Error::Invalid(
            "paired configurations differ in shape".into(),
        ));
    }
    let (sign, g) = if f.in_c() {
        (1.0, f.clone())
    } else {
        (-1.0, f.complement())
    };
    let terms = coefficient_terms(&g)?;
    let d = p.dim();
    let scale = sign * mean_width_scale(d);
    let seed = opts.seed;
    let moments = if d == 1 {
        let mut tp = vec![0.0; p.len()];
        let mut tq = vec![0.0; q.len()];
        project(p, &[1.0], &mut tp);
        project(q, &[1.0], &mut tq);
        let a = scale * width_combination(&terms, &tp);
        let b = scale * width_combination(&terms, &tq);
        return Ok(PairedEstimate {
            first: MCEstimate::exact(a, seed),
            second: MCEstimate::exact(b, seed),
            difference: MCEstimate::exact(a - b, seed),
        });
    } else {
        sample_moments::<3, _>(opts.samples, opts.stream(TAG_DEFINITION), |rng| {
            let mut u = vec![0.0; d];
            let mut tp = vec![0.0; p.len()];
            let mut tq = vec![0.0; q.len()];
            fill_sphere(&mut u, rng);
            project(p, &u, &mut tp);
            project(q, &u, &mut tq);
            let a = scale * width_combination(&terms, &tp);
            let b = scale * width_combination(&terms, &tq);
            Ok(Some([a, b, a - b]))
        })?
    };
    Ok(PairedEstimate {
        first: moments[0].estimate(seed),
        second: moments[1].estimate(seed),
        difference: moments[2].estimate(seed),
    })
}
