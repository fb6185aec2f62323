//! Optimization through point estimation: evaluate every candidate of a
//! `δ`-grid inside the norm ball with median-boosted sketch estimates plus
//! the exact regularizer and keep the argmin. Also hosts the
//! reservoir-and-Pegasos baseline.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::add1d::{BinTree, BinTreeConfig};
use crate::add2d::{QuadTree, QuadTreeConfig};
use crate::dyn1d::DynSketch1D;
use crate::error::{invalid, HskError, Result};
use crate::estimator::{halfline_sum, LeftSumEstimator};
use crate::mult1d::{MultOptions, MultStream1D, OfflineSketch1D, Universe};
use crate::sampler::Coins;
use crate::types::{dot, norm2, HyperplaneQuery, Label, LabeledPoint, Power, SketchParams};

/// Default cap on the number of grid candidates.
pub const DEFAULT_GRID_BUDGET: u128 = 20_000_000;

const REPLICA_DOMAIN: u64 = 0x52;

/// Candidate grid `δℤ^{d+1} ∩ B(0, R)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub lambda: f64,
    pub epsilon: f64,
    pub d: usize,
    /// `√(2/λ)`.
    pub radius: f64,
    /// `ε/(2√d)`.
    pub delta: f64,
    pub k: usize,
    pub budget: u128,
}

impl GridSpec {
    pub fn new(lambda: f64, epsilon: f64, d: usize) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", "must be positive"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon", "must be positive"));
        }
        if d == 0 {
            return Err(invalid("d", "must be at least 1"));
        }
        let radius = (2.0 / lambda).sqrt();
        let delta = epsilon / (2.0 * (d as f64).sqrt());
        Ok(Self {
            lambda,
            epsilon,
            d,
            radius,
            delta,
            k: default_replicas(d, radius, delta),
            budget: DEFAULT_GRID_BUDGET,
        })
    }

    pub fn with_replicas(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    fn steps(&self) -> (i64, f64) {
        let r = self.radius / self.delta;
        (r.floor() as i64, r * r * (1.0 + 1e-12))
    }

    /// Exact number of grid points.
    pub fn size(&self) -> u128 {
        self.size_capped(u128::MAX)
    }

    /// Number of grid points, or some value above `cap` once it is exceeded.
    fn size_capped(&self, cap: u128) -> u128 {
        fn count(dims: usize, m: i64, left: f64, cap: u128) -> u128 {
            if dims == 1 {
                let h = left.max(0.0).sqrt().floor() as i64;
                return (2 * h.min(m) + 1) as u128;
            }
            let mut total = 0;
            for z in -m..=m {
                let rest = left - (z * z) as f64;
                if rest >= 0.0 {
                    total += count(dims - 1, m, rest, cap);
                    if total > cap {
                        return total;
                    }
                }
            }
            total
        }
        let (m, r2) = self.steps();
        count(self.d + 1, m, r2, cap)
    }
}

/// Smallest odd integer `≥ 3·⌈(d+1)·log₂(2R/δ)⌉`.
pub fn default_replicas(d: usize, radius: f64, delta: f64) -> usize {
    let l = ((d + 1) as f64 * (2.0 * radius / delta).log2().max(1.0)).ceil() as usize;
    (3 * l) | 1
}

/// All grid points `w = (θ, b)` in lexicographic order.
pub fn grid_points(spec: &GridSpec) -> Result<Vec<Vec<f64>>> {
    let size = spec.size_capped(spec.budget);
    if size > spec.budget {
        return Err(HskError::GridBudget {
            size,
            budget: spec.budget,
        });
    }
    let (m, r2) = spec.steps();
    let dims = spec.d + 1;
    let mut out = Vec::with_capacity(size as usize);
    let mut z = vec![0i64; dims];
    fn rec(pos: usize, left: f64, m: i64, z: &mut Vec<i64>, delta: f64, out: &mut Vec<Vec<f64>>) {
        if pos == z.len() {
            out.push(z.iter().map(|&v| v as f64 * delta).collect());
            return;
        }
        let h = (left.max(0.0).sqrt().floor() as i64).min(m);
        for v in -h..=h {
            let rest = left - (v * v) as f64;
            if rest >= 0.0 {
                z[pos] = v;
                rec(pos + 1, rest, m, z, delta, out);
            }
        }
    }
    rec(0, r2, m, &mut z, spec.delta, &mut out);
    Ok(out)
}

/// Point-estimation sketch family used by the reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Backend {
    Offline1d,
    Mult1d,
    Dyn1d,
    Add1d,
    Add2d,
}

impl Backend {
    pub const ALL: [Backend; 5] = [
        Backend::Offline1d,
        Backend::Mult1d,
        Backend::Dyn1d,
        Backend::Add1d,
        Backend::Add2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Offline1d => "offline1d",
            Backend::Mult1d => "mult1d",
            Backend::Dyn1d => "dyn1d",
            Backend::Add1d => "add1d",
            Backend::Add2d => "add2d",
        }
    }

    pub fn dimension(self) -> usize {
        if self == Backend::Add2d {
            2
        } else {
            1
        }
    }

    /// Deterministic sketches give identical replicas.
    pub fn is_deterministic(self) -> bool {
        matches!(self, Backend::Offline1d | Backend::Add1d)
    }

    /// Additive backends need their error scaled down by the norm budget.
    pub fn is_additive(self) -> bool {
        matches!(self, Backend::Add1d | Backend::Add2d)
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = HskError;

    fn from_str(s: &str) -> Result<Self> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| invalid("backend", format!("unknown backend {s:?}")))
    }
}

type BoxedEstimator = Box<dyn LeftSumEstimator + Send + Sync>;

enum ClassSketch {
    Empty,
    Line { fwd: BoxedEstimator, rev: BoxedEstimator },
    Plane(QuadTree),
}

impl ClassSketch {
    /// Estimate of `Σ max{0, big_b − big_theta·x}` over the class.
    fn sum(&self, big_theta: &[f64], big_b: f64, count: u64) -> Result<f64> {
        match self {
            ClassSketch::Empty => Ok(0.0),
            ClassSketch::Line { fwd, rev } => halfline_sum(fwd.as_ref(), rev.as_ref(), big_theta[0], big_b),
            ClassSketch::Plane(t) => {
                if norm2(big_theta) == 0.0 {
                    Ok(big_b.max(0.0) * count as f64)
                } else {
                    t.query_sum_any([big_theta[0], big_theta[1]], big_b)
                }
            }
        }
    }
}

/// Settings for building replicas of one backend.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicaConfig {
    pub backend: Backend,
    /// Point-estimation error handed to the sketch.
    pub epsilon: f64,
    pub seed: u64,
    /// Universe bound for the sampling sketches.
    pub w: u64,
    /// Sampling constants (`c1`, `c2` for mult1d; `c` for dyn1d).
    pub c1: f64,
    pub c2: f64,
    pub c: f64,
    /// Multiplier of the quad-tree granularity.
    pub c_quad: f64,
}

impl ReplicaConfig {
    pub fn new(backend: Backend, epsilon: f64, seed: u64) -> Self {
        let d = SketchParams::default();
        Self {
            backend,
            epsilon,
            seed,
            w: d.w,
            c1: d.c1,
            c2: d.c2,
            c: d.c,
            c_quad: crate::add2d::DEFAULT_C,
        }
    }
}

/// One independent sketch pair (one per label class) over a stream.
pub struct Replica {
    backend: Backend,
    fingerprint: String,
    d: usize,
    n: u64,
    counts: [u64; 2],
    classes: [ClassSketch; 2],
    space: usize,
}

impl fmt::Debug for Replica {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Replica")
            .field("backend", &self.backend)
            .field("fingerprint", &self.fingerprint)
            .field("n", &self.n)
            .finish()
    }
}

fn coord_bound(points: &[LabeledPoint]) -> f64 {
    points
        .iter()
        .flat_map(|p| p.x.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()))
}

impl Replica {
    /// Builds the two class sketches over `points` with the given seed.
    pub fn build(points: &[LabeledPoint], cfg: &ReplicaConfig) -> Result<Self> {
        if points.is_empty() {
            return Err(HskError::EmptyDataset);
        }
        let d = cfg.backend.dimension();
        for p in points {
            if p.dim() != d {
                return Err(HskError::DimensionMismatch {
                    expected: d,
                    actual: p.dim(),
                });
            }
        }
        let bound = coord_bound(points);
        let mut counts = [0u64; 2];
        let mut space = 0;
        let mut classes = [ClassSketch::Empty, ClassSketch::Empty];
        for (ci, label) in [Label::Pos, Label::Neg].into_iter().enumerate() {
            let xs: Vec<&[f64]> = points.iter().filter(|p| p.y == label).map(|p| p.x.as_slice()).collect();
            counts[ci] = xs.len() as u64;
            if xs.is_empty() {
                continue;
            }
            let n = xs.len() as u64;
            let seed = Coins::new(cfg.seed, REPLICA_DOMAIN).bits(ci as u64, 0);
            classes[ci] = if d == 2 {
                let mut qc = QuadTreeConfig::new(cfg.epsilon, n, Power::Linear, seed).with_domain(-bound, bound);
                qc.c = cfg.c_quad;
                let mut t = QuadTree::new(qc)?;
                for x in &xs {
                    t.update(x[0], x[1])?;
                }
                t.freeze();
                space += t.space_words();
                ClassSketch::Plane(t)
            } else {
                let vals: Vec<f64> = xs.iter().map(|x| x[0]).collect();
                let neg: Vec<f64> = vals.iter().map(|v| -v).collect();
                let (fwd, s1) = build_line(&vals, n, bound, cfg, seed)?;
                let (rev, s2) = build_line(&neg, n, bound, cfg, seed ^ 0x9e37_79b9_7f4a_7c15)?;
                space += s1 + s2;
                ClassSketch::Line { fwd, rev }
            };
        }
        Ok(Self {
            backend: cfg.backend,
            fingerprint: format!(
                "{}:{}:{}:{}:{}:{}:{}",
                cfg.backend, cfg.epsilon, cfg.w, cfg.c1, cfg.c2, cfg.c, cfg.c_quad
            ),
            d,
            n: points.len() as u64,
            counts,
            classes,
            space,
        })
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn space_words(&self) -> usize {
        self.space
    }

    /// Estimated average hinge loss `(1/n)·Σ max{0, 1 − y(θ·x + b)}`.
    pub fn loss(&self, w: &HyperplaneQuery) -> Result<f64> {
        if w.dim() != self.d {
            return Err(HskError::DimensionMismatch {
                expected: self.d,
                actual: w.dim(),
            });
        }
        let neg_theta: Vec<f64> = w.theta.iter().map(|t| -t).collect();
        let pos = self.classes[0].sum(&w.theta, 1.0 - w.b, self.counts[0])?;
        let neg = self.classes[1].sum(&neg_theta, 1.0 + w.b, self.counts[1])?;
        Ok((pos + neg) / self.n as f64)
    }
}

fn build_line(vals: &[f64], n: u64, bound: f64, cfg: &ReplicaConfig, seed: u64) -> Result<(BoxedEstimator, usize)> {
    Ok(match cfg.backend {
        Backend::Offline1d => {
            let mut sorted = vals.to_vec();
            sorted.sort_by(f64::total_cmp);
            let s = OfflineSketch1D::build(&sorted, cfg.epsilon.min(1.0))?;
            let sp = s.space_words();
            (Box::new(s), sp)
        }
        Backend::Mult1d => {
            let params = SketchParams {
                epsilon: cfg.epsilon,
                w: cfg.w,
                n_hint: n,
                c1: cfg.c1,
                c2: cfg.c2,
                seed,
                ..SketchParams::default()
            };
            let opts = MultOptions {
                universe: Universe::Real,
                ..MultOptions::default()
            };
            let mut s = MultStream1D::new(params, opts)?;
            for &v in vals {
                s.update(v)?;
            }
            s.freeze();
            let sp = s.space_words();
            (Box::new(s), sp)
        }
        Backend::Dyn1d => {
            let params = SketchParams {
                epsilon: cfg.epsilon,
                w: cfg.w,
                n_hint: n,
                c: cfg.c,
                seed,
                ..SketchParams::default()
            };
            let mut s = DynSketch1D::new(params)?;
            for &v in vals {
                s.update(v)?;
            }
            s.freeze();
            let sp = s.space_words();
            (Box::new(s), sp)
        }
        Backend::Add1d => {
            let mut t = BinTree::new(BinTreeConfig::new(cfg.epsilon, n, Power::Linear).with_radius(bound))?;
            for &v in vals {
                t.update(v)?;
            }
            t.freeze();
            let sp = t.space_words();
            (Box::new(t), sp)
        }
        Backend::Add2d => unreachable!("planar backend has no line sketch"),
    })
}

/// Median of the values; the upper median for even counts.
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values[values.len() / 2]
}

/// Median over replicas of the estimated average hinge loss at `w`.
pub fn median_estimate(replicas: &[Replica], w: &HyperplaneQuery) -> Result<f64> {
    let first = replicas.first().ok_or_else(|| invalid("replicas", "need at least one"))?;
    if let Some(r) = replicas.iter().find(|r| r.fingerprint != first.fingerprint || r.n != first.n) {
        return Err(HskError::MixedReplicas(format!("{} vs {}", first.fingerprint, r.fingerprint)));
    }
    let mut vals = replicas.iter().map(|r| r.loss(w)).collect::<Result<Vec<_>>>()?;
    Ok(median(&mut vals))
}

/// Settings of [`optimize_via_sketch`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeConfig {
    pub lambda: f64,
    pub epsilon: f64,
    /// Replicas; the grid default when `None`.
    pub k: Option<usize>,
    pub seed: u64,
    pub budget: u128,
    /// Sketch settings; `epsilon` is overwritten with the point-estimation
    /// error derived from `epsilon` and the norm budget.
    pub replica: ReplicaConfig,
}

impl OptimizeConfig {
    pub fn new(backend: Backend, lambda: f64, epsilon: f64, seed: u64) -> Self {
        Self {
            lambda,
            epsilon,
            k: None,
            seed,
            budget: DEFAULT_GRID_BUDGET,
            replica: ReplicaConfig::new(backend, epsilon, seed),
        }
    }

    /// Error requested from each point-estimation sketch: `ε/R` for additive
    /// sketches, `ε` for multiplicative ones, kept inside `(0, 1)`.
    pub fn point_epsilon(&self) -> f64 {
        let r = (2.0 / self.lambda).sqrt();
        let e = if self.replica.backend.is_additive() {
            self.epsilon / r.max(1.0)
        } else {
            self.epsilon
        };
        e.min(0.5)
    }
}

/// Result of [`optimize_via_sketch`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub theta: Vec<f64>,
    pub b: f64,
    /// Estimated `F_λ` at the returned point.
    pub value: f64,
    pub grid_size: usize,
    pub replicas: usize,
    pub space_words: usize,
}

impl OptimizeResult {
    pub fn query(&self) -> HyperplaneQuery {
        HyperplaneQuery::new(self.theta.clone(), self.b)
    }

    pub fn w(&self) -> Vec<f64> {
        let mut w = self.theta.clone();
        w.push(self.b);
        w
    }
}

/// Builds `k` replica pairs, evaluates the grid, returns the argmin.
pub fn optimize_via_sketch(points: &[LabeledPoint], cfg: &OptimizeConfig) -> Result<OptimizeResult> {
    let backend = cfg.replica.backend;
    let mut spec = GridSpec::new(cfg.lambda, cfg.epsilon, backend.dimension())?.with_budget(cfg.budget);
    if let Some(k) = cfg.k {
        if k == 0 || k % 2 == 0 {
            return Err(invalid("k", "replica count must be odd"));
        }
        spec = spec.with_replicas(k);
    }
    let grid = grid_points(&spec)?;
    let k = if backend.is_deterministic() { 1 } else { spec.k };
    let mut rc = cfg.replica.clone();
    rc.epsilon = cfg.point_epsilon();
    let replicas = (0..k as u64)
        .into_par_iter()
        .map(|r| {
            let mut c = rc.clone();
            c.seed = Coins::new(cfg.seed, REPLICA_DOMAIN).bits(u64::MAX, r);
            Replica::build(points, &c)
        })
        .collect::<Result<Vec<_>>>()?;
    let d = backend.dimension();
    let values = grid
        .par_iter()
        .map(|w| {
            let q = HyperplaneQuery::new(w[..d].to_vec(), w[d]);
            Ok(median_estimate(&replicas, &q)? + 0.5 * cfg.lambda * q.norm_sq())
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    let w = &grid[best];
    Ok(OptimizeResult {
        theta: w[..d].to_vec(),
        b: w[d],
        value: values[best],
        grid_size: grid.len(),
        replicas: k,
        space_words: replicas.iter().map(Replica::space_words).sum(),
    })
}

/// Settings of [`sgd_baseline`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgdConfig {
    pub lambda: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Reservoir capacity is `⌈kappa/(λε)⌉`.
    pub kappa: f64,
    pub passes: usize,
}

impl SgdConfig {
    pub fn new(lambda: f64, epsilon: f64, seed: u64) -> Self {
        Self {
            lambda,
            epsilon,
            seed,
            kappa: 1.0,
            passes: 10,
        }
    }

    pub fn capacity(&self) -> usize {
        (self.kappa / (self.lambda * self.epsilon)).ceil().max(1.0) as usize
    }
}

/// Output of [`sgd_baseline`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SgdResult {
    pub theta: Vec<f64>,
    pub b: f64,
    pub capacity: usize,
    pub retained: usize,
    pub space_words: usize,
}

impl SgdResult {
    pub fn query(&self) -> HyperplaneQuery {
        HyperplaneQuery::new(self.theta.clone(), self.b)
    }
}

/// Reservoir of `⌈κ/(λε)⌉` stream points, then Pegasos over the reservoir
/// projected onto `‖w‖ ≤ √(2/λ)`, returning the average of the second half
/// of the iterates.
pub fn sgd_baseline<I>(stream: I, cfg: &SgdConfig) -> Result<SgdResult>
where
    I: IntoIterator<Item = LabeledPoint>,
{
    if !(cfg.lambda > 0.0 && cfg.epsilon > 0.0) {
        return Err(invalid("lambda/epsilon", "must be positive"));
    }
    let cap = cfg.capacity();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut res: Vec<LabeledPoint> = Vec::with_capacity(cap.min(1 << 20));
    let mut seen = 0u64;
    for p in stream {
        seen += 1;
        if res.len() < cap {
            res.push(p);
        } else {
            let j = rng.random_range(0..seen);
            if (j as usize) < cap {
                res[j as usize] = p;
            }
        }
    }
    if res.is_empty() {
        return Err(HskError::EmptyDataset);
    }
    let d = res[0].dim();
    if res.iter().any(|p| p.dim() != d) {
        return Err(HskError::DimensionMismatch {
            expected: d,
            actual: res.iter().find(|p| p.dim() != d).map_or(d, |p| p.dim()),
        });
    }
    let radius = (2.0 / cfg.lambda).sqrt();
    let mut w = vec![0.0; d + 1];
    let mut avg = vec![0.0; d + 1];
    let total = cfg.passes.max(1) * res.len();
    let half = total / 2;
    let mut order: Vec<usize> = (0..res.len()).collect();
    let mut t = 0usize;
    for _ in 0..cfg.passes.max(1) {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let p = &res[i];
            let y = p.y.sign();
            let margin = y * (dot(&w[..d], &p.x) + w[d]);
            let eta = 1.0 / (cfg.lambda * t as f64);
            for v in w.iter_mut() {
                *v *= 1.0 - eta * cfg.lambda;
            }
            if margin < 1.0 {
                for j in 0..d {
                    w[j] += eta * y * p.x[j];
                }
                w[d] += eta * y;
            }
            let nw = norm2(&w);
            if nw > radius {
                for v in w.iter_mut() {
                    *v *= radius / nw;
                }
            }
            if t > half {
                for (a, v) in avg.iter_mut().zip(&w) {
                    *a += v;
                }
            }
        }
    }
    let cnt = (total - half) as f64;
    for a in avg.iter_mut() {
        *a /= cnt;
    }
    Ok(SgdResult {
        theta: avg[..d].to_vec(),
        b: avg[d],
        capacity: cap,
        retained: res.len(),
        space_words: cap * (d + 1) + 4,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_example_thirteen_points() {
        let spec = GridSpec::new(2.0, 1.0, 1).unwrap();
        assert_eq!((spec.radius, spec.delta), (1.0, 0.5));
        let g = grid_points(&spec).unwrap();
        assert_eq!(g.len(), 13);
        assert_eq!(spec.size(), 13);
        assert!(g.contains(&vec![0.5, -0.5]) && g.contains(&vec![0.0, 1.0]));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn grid_only_origin_when_delta_large() {
        let spec = GridSpec::new(1e6, 1.0, 2).unwrap();
        assert_eq!(grid_points(&spec).unwrap(), vec![vec![0.0, 0.0, 0.0]]);
    }

    #[test]
    fn grid_budget_error() {
        let spec = GridSpec::new(1e-4, 0.01, 2).unwrap().with_budget(1000);
        assert!(matches!(grid_points(&spec), Err(HskError::GridBudget { .. })));
    }

    #[test]
    fn default_k_is_odd() {
        let spec = GridSpec::new(0.01, 0.1, 1).unwrap();
        assert_eq!(spec.k % 2, 1);
        assert!(spec.k >= 3 * ((2.0 * (2.0 * spec.radius / spec.delta).log2()).ceil() as usize));
    }

    #[test]
    fn median_of_three() {
        assert_eq!(median(&mut [1.0, 5.0, 1.1]), 1.1);
        assert_eq!(median(&mut [2.5]), 2.5);
    }

    #[test]
    fn huge_lambda_returns_origin() {
        let pts: Vec<_> = (0..50)
            .map(|i| LabeledPoint::new(vec![i as f64 / 50.0], if i % 2 == 0 { Label::Pos } else { Label::Neg }).unwrap())
            .collect();
        let r = optimize_via_sketch(&pts, &OptimizeConfig::new(Backend::Add1d, 1e6, 0.1, 0)).unwrap();
        assert_eq!((r.theta.clone(), r.b), (vec![0.0], 0.0));
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mixed_replicas_rejected() {
        let pts = vec![LabeledPoint::new(vec![0.5], Label::Pos).unwrap()];
        let a = Replica::build(&pts, &ReplicaConfig::new(Backend::Mult1d, 0.1, 1)).unwrap();
        let b = Replica::build(&pts, &ReplicaConfig::new(Backend::Mult1d, 0.2, 1)).unwrap();
        let q = HyperplaneQuery::new(vec![1.0], 0.0);
        assert!(matches!(median_estimate(&[a, b], &q), Err(HskError::MixedReplicas(_))));
    }

    #[test]
    fn sgd_space_accounting() {
        let pts: Vec<_> = (0..10)
            .map(|i| LabeledPoint::new(vec![i as f64 / 10.0], Label::Pos).unwrap())
            .collect();
        let cfg = SgdConfig::new(0.5, 0.5, 3);
        let r = sgd_baseline(pts, &cfg).unwrap();
        assert_eq!(r.capacity, 4);
        assert_eq!(r.retained, 4);
        assert_eq!(r.space_words, 4 * 2 + 4);
    }
}
