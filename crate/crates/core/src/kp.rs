//! Monotonicity of `V_{f,1}` under sign-constrained contractions of the
//! centers of read-once expressions.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::algebra::eval_to_atoms;
use crate::epsilon::{check_read_once, epsilon_signs, SignMatrix};
use crate::error::{Error, Result};
use crate::expr::BoolExpr;
use crate::geometry::{affinely_independent, dist, PointConfig, DEGENERACY_TOL};
use crate::sampling::{fill_sphere, MCEstimate, SampleRng, Substream};
use crate::volumes::{v1_paired, EstimatorOptions};

/// A read-once expression with two center configurations `p`, `q` such that
/// `ε_ij (d(p_i,p_j) − d(q_i,q_j)) ≥ 0` for every pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionPair {
    pub f: BoolExpr,
    pub p: PointConfig,
    pub q: PointConfig,
    pub signs: SignMatrix,
    /// `d(p_i,p_j) − d(q_i,q_j)` per pair, 0-based `i < j` in row-major order.
    pub deltas: Vec<((usize, usize), f64)>,
}

fn pair_deltas(p: &PointConfig, q: &PointConfig) -> Vec<((usize, usize), f64)> {
    let n = p.len();
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let delta = dist(p.point(i), p.point(j)) - dist(q.point(i), q.point(j));
            ((i, j), delta)
        })
        .collect()
}

impl ContractionPair {
    pub fn new(f: BoolExpr, p: PointConfig, q: PointConfig) -> Result<Self> {
        let n = check_read_once(&f)?;
        if p.len() != n || q.len() != n || p.dim() != q.dim() {
            return Err(Error::Invalid(format!(
                "expected two configurations of {n} points in the same dimension"
            )));
        }
        let signs = epsilon_signs(&f)?;
        let deltas = pair_deltas(&p, &q);
        if let Some(((i, j), delta)) = deltas
            .iter()
            .find(|((i, j), delta)| f64::from(signs.get(*i, *j)) * delta < 0.0)
        {
            return Err(Error::Invalid(format!(
                "pair ({},{}) with sign {} changes distance by {}",
                i + 1,
                j + 1,
                signs.get(*i, *j),
                -delta
            )));
        }
        Ok(ContractionPair {
            f,
            p,
            q,
            signs,
            deltas,
        })
    }

    /// Re-checks every sign constraint without tolerance.
    pub fn is_valid(&self) -> bool {
        pair_deltas(&self.p, &self.q)
            .iter()
            .all(|((i, j), delta)| f64::from(self.signs.get(*i, *j)) * delta >= 0.0)
    }
}

/// Random walk of `q` away from `p`: each proposal moves one point by a
/// displacement uniform in the ball of radius `step` and is kept only if all
/// sign constraints against `p` still hold. At least one proposal out of
/// `attempts` must be accepted.
pub fn random_contraction(
    f: &BoolExpr,
    p: &PointConfig,
    rng: &mut SampleRng,
    step: f64,
    attempts: usize,
) -> Result<ContractionPair> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Invalid(format!("step must be positive, got {step}")));
    }
    let n = check_read_once(f)?;
    if p.len() != n {
        return Err(Error::Invalid(format!(
            "expression has {n} variables but the configuration has {} points",
            p.len()
        )));
    }
    let signs = epsilon_signs(f)?;
    let d = p.dim();
    let mut q = p.clone();
    let mut accepted = 0;
    let mut dir = vec![0.0; d];
    for _ in 0..attempts {
        let i = rng.random_range(0..n);
        fill_sphere(&mut dir, rng);
        let len = step * rng.random::<f64>().powf(1.0 / d as f64);
        let moved: Vec<f64> = q
            .point(i)
            .iter()
            .zip(&dir)
            .map(|(x, u)| x + len * u)
            .collect();
        let ok = (0..n).filter(|&j| j != i).all(|j| {
            let delta = dist(p.point(i), p.point(j)) - dist(&moved, q.point(j));
            f64::from(signs.get(i, j)) * delta >= 0.0
        });
        if ok {
            q = q.with_point(i, &moved);
            accepted += 1;
        }
    }
    if accepted == 0 {
        return Err(Error::NoAcceptedMove(attempts));
    }
    ContractionPair::new(f.clone(), p.clone(), q)
}

/// Rigid motion of `q` that best matches `p` in the least-squares sense.
pub fn align_to(q: &PointConfig, p: &PointConfig) -> PointConfig {
    let d = p.dim();
    let cp = p.centroid();
    let cq = q.centroid();
    let mut h = DMatrix::<f64>::zeros(d, d);
    for (a, b) in q.points().zip(p.points()) {
        for r in 0..d {
            for c in 0..d {
                h[(r, c)] += (a[r] - cq[r]) * (b[c] - cp[c]);
            }
        }
    }
    let svd = h.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v = svd
        .v_t
        .expect("right singular vectors requested")
        .transpose();
    let mut rotation = &v * u.transpose();
    if rotation.determinant() < 0.0 {
        let mut flip = DMatrix::<f64>::identity(d, d);
        flip[(d - 1, d - 1)] = -1.0;
        rotation = &v * flip * u.transpose();
    }
    let rows = q
        .points()
        .map(|x| {
            (0..d)
                .map(|r| {
                    cp[r]
                        + (0..d)
                            .map(|c| rotation[(r, c)] * (x[c] - cq[c]))
                            .sum::<f64>()
                })
                .collect()
        })
        .collect();
    PointConfig::new(d, rows).expect("a rigid motion keeps the configuration valid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentOptions {
    pub trials: usize,
    pub dim: usize,
    /// Direction samples per paired estimate.
    pub samples: u64,
    pub seed: u64,
    pub step: f64,
    pub attempts: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            trials: 200,
            dim: 2,
            samples: 100_000,
            seed: 0,
            step: 0.25,
            attempts: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub first: MCEstimate,
    pub second: MCEstimate,
    /// `V_{f,1}(p) − V_{f,1}(q)` from shared directions.
    pub difference: MCEstimate,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    pub trials: usize,
    pub skipped: usize,
    pub violations: usize,
    /// Smallest observed difference.
    pub min_margin: f64,
    /// Smallest observed difference in units of its standard error.
    pub min_z: f64,
    pub outcomes: Vec<TrialOutcome>,
}

fn random_config(n: usize, d: usize, rng: &mut SampleRng) -> Result<PointConfig> {
    for _ in 0..100 {
        let rows = (0..n)
            .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let p = PointConfig::new(d, rows)?;
        let ok = crate::algebra::IndexSet::k_subsets(n, (d + 1).min(n))
            .all(|s| affinely_independent(&p, s, DEGENERACY_TOL));
        if ok {
            return Ok(p);
        }
    }
    Err(Error::ResampleCap(
        "no configuration in general position".into(),
    ))
}

/// Runs `trials` independent contraction trials and tests
/// `V_{f,1}(p) ≥ V_{f,1}(q)` at three standard errors of the paired
/// difference. The contracted configuration is rigidly aligned to `p`
/// before estimation. Trials whose generator fails are counted as skipped.
pub fn monotonicity_experiment(
    f: &BoolExpr,
    opts: &ExperimentOptions,
) -> Result<MonotonicityReport> {
    let n = check_read_once(f)?;
    epsilon_signs(f)?;
    let atoms = eval_to_atoms(f, n)?;
    let root = Substream::new(opts.seed).child(21);
    let results: Vec<Option<TrialOutcome>> = (0..opts.trials)
        .into_par_iter()
        .map(|t| {
            let stream = root.child(t as u64);
            let mut rng = stream.rng();
            let p = random_config(n, opts.dim, &mut rng)?;
            let pair = match random_contraction(f, &p, &mut rng, opts.step, opts.attempts) {
                Ok(pair) => pair,
                Err(Error::NoAcceptedMove(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let q = align_to(&pair.q, &pair.p);
            let est_opts = EstimatorOptions::new(opts.samples, rng.random());
            let paired = v1_paired(&atoms, &pair.p, &q, &est_opts)?;
            Ok(Some(TrialOutcome {
                trial: t,
                first: paired.first,
                second: paired.second,
                difference: paired.difference,
                violation: paired.difference.value < -3.0 * paired.difference.stderr,
            }))
        })
        .collect::<Result<_>>()?;
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let outcomes: Vec<TrialOutcome> = results.into_iter().flatten().collect();
    let z = |o: &TrialOutcome| {
        if o.difference.stderr > 0.0 {
            o.difference.value / o.difference.stderr
        } else if o.difference.value >= 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    };
    Ok(MonotonicityReport {
        trials: opts.trials,
        skipped,
        violations: outcomes.iter().filter(|o| o.violation).count(),
        min_margin: outcomes
            .iter()
            .map(|o| o.difference.value)
            .fold(f64::INFINITY, f64::min),
        min_z: outcomes.iter().map(z).fold(f64::INFINITY, f64::min),
        outcomes,
    })
}
