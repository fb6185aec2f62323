//! Space/error/runtime benchmark harness and the constant-calibration sweep.

use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::add1d::{BinTree, BinTreeConfig};
use crate::add2d::{QuadTree, QuadTreeConfig};
use crate::dyn1d::DynSketch1D;
use crate::error::{invalid, HskError, Result};
use crate::estimator::LeftSumEstimator;
use crate::gen::{gen_uniform, Layout};
use crate::mult1d::{MultOptions, MultStream1D, OfflineSketch1D, Universe};
use crate::objective::{exact_optimize, hinge_objective, left_sum};
use crate::optimize::{sgd_baseline, Backend, SgdConfig};
use crate::types::{Power, SketchParams};

/// Default cap on `n × queries` oracle evaluations per cell.
pub const ORACLE_BUDGET: u64 = 200_000_000;

/// Algorithm measured by [`bench`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Algorithm {
    Sketch(Backend),
    Pegasos,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sketch(b) => b.name(),
            Algorithm::Pegasos => "pegasos",
        }
    }

    /// Errors are relative for multiplicative sketches, additive otherwise
    /// (for Pegasos: the objective gap).
    pub fn is_relative(self) -> bool {
        matches!(
            self,
            Algorithm::Sketch(Backend::Offline1d | Backend::Mult1d | Backend::Dyn1d)
        )
    }

    pub fn supports(self, p: Power) -> bool {
        p == Power::Linear || matches!(self, Algorithm::Sketch(Backend::Add1d | Backend::Add2d))
    }

    pub fn dimension(self) -> usize {
        match self {
            Algorithm::Sketch(b) => b.dimension(),
            Algorithm::Pegasos => 1,
        }
    }
}

impl FromStr for Algorithm {
    type Err = HskError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "pegasos" {
            return Ok(Algorithm::Pegasos);
        }
        Backend::from_str(s)
            .map(Algorithm::Sketch)
            .map_err(|_| invalid("algorithm", format!("unknown algorithm {s:?}")))
    }
}

/// Benchmark grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchConfig {
    pub algorithms: Vec<Algorithm>,
    pub epsilons: Vec<f64>,
    pub p: Power,
    pub n: usize,
    pub seeds: u64,
    pub queries: usize,
    pub lambda: f64,
    pub w: u64,
    pub seed: u64,
    pub oracle_budget: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            algorithms: vec![
                Algorithm::Sketch(Backend::Offline1d),
                Algorithm::Sketch(Backend::Mult1d),
                Algorithm::Sketch(Backend::Dyn1d),
                Algorithm::Sketch(Backend::Add1d),
                Algorithm::Sketch(Backend::Add2d),
                Algorithm::Pegasos,
            ],
            epsilons: vec![0.2, 0.1],
            p: Power::Linear,
            n: 10_000,
            seeds: 3,
            queries: 100,
            lambda: 0.01,
            w: 1 << 20,
            seed: 0,
            oracle_budget: ORACLE_BUDGET,
        }
    }
}

/// One output row, aggregated over seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: String,
    pub epsilon: f64,
    pub p: u8,
    pub space_words: usize,
    pub mean_rel_err: f64,
    pub p95_err: f64,
    pub max_err: f64,
    pub success_rate: f64,
    pub build_ns: u64,
    pub query_ns: u64,
}

struct Cell {
    space: usize,
    rel: Vec<f64>,
    err: Vec<f64>,
    build_ns: u64,
    query_ns: u64,
}

fn sketch_1d(backend: Backend, xs: &[f64], eps: f64, p: Power, w: u64, seed: u64) -> Result<(Box<dyn LeftSumEstimator>, usize)> {
    let n = xs.len() as u64;
    let params = SketchParams {
        epsilon: eps,
        w,
        n_hint: n,
        p,
        seed,
        ..SketchParams::default()
    };
    Ok(match backend {
        Backend::Offline1d => {
            let mut s = xs.to_vec();
            s.sort_by(f64::total_cmp);
            let sk = OfflineSketch1D::build(&s, eps)?;
            let sp = sk.space_words();
            (Box::new(sk), sp)
        }
        Backend::Mult1d => {
            let opts = MultOptions {
                universe: Universe::Real,
                ..MultOptions::default()
            };
            let mut sk = MultStream1D::new(params, opts)?;
            for &x in xs {
                sk.update(x)?;
            }
            sk.freeze();
            let sp = sk.space_words();
            (Box::new(sk), sp)
        }
        Backend::Dyn1d => {
            let mut sk = DynSketch1D::new(params)?;
            for &x in xs {
                sk.update(x)?;
            }
            sk.freeze();
            let sp = sk.space_words();
            (Box::new(sk), sp)
        }
        Backend::Add1d => {
            let mut sk = BinTree::new(BinTreeConfig::new(eps, n, p))?;
            for &x in xs {
                sk.update(x)?;
            }
            sk.freeze();
            let sp = sk.space_words();
            (Box::new(sk), sp)
        }
        Backend::Add2d => return Err(invalid("algorithm", "add2d is planar")),
    })
}

fn run_cell(cfg: &BenchConfig, alg: Algorithm, eps: f64, seed: u64) -> Result<Cell> {
    let d = alg.dimension();
    let inst = gen_uniform(cfg.n, d, seed, Layout::Positive, 0.1)?;
    let pts = inst.points;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5155_4552_5953);
    let p = cfg.p;
    let n = pts.len() as f64;
    let rel_of = |est: f64, exact: f64| (est - exact).abs() / exact.abs().max(f64::MIN_POSITIVE);
    match alg {
        Algorithm::Pegasos => {
            let t0 = Instant::now();
            let r = sgd_baseline(pts.clone(), &SgdConfig::new(cfg.lambda, eps, seed))?;
            let build_ns = t0.elapsed().as_nanos() as u64;
            let opt = exact_optimize(&pts, cfg.lambda, 1e-9)?;
            let f = hinge_objective(&pts, &r.query(), cfg.lambda)?;
            let gap = (f - opt.value).max(0.0);
            Ok(Cell {
                space: r.space_words,
                rel: vec![gap / opt.value.max(f64::MIN_POSITIVE)],
                err: vec![gap],
                build_ns,
                query_ns: 0,
            })
        }
        Algorithm::Sketch(Backend::Add2d) => {
            let t0 = Instant::now();
            let mut t = QuadTree::new(QuadTreeConfig::new(eps, cfg.n as u64, p, seed))?;
            for q in &pts {
                t.update(q.x[0], q.x[1])?;
            }
            t.freeze();
            let build_ns = t0.elapsed().as_nanos() as u64;
            let mut rel = Vec::new();
            let mut err = Vec::new();
            let mut qns = 0u128;
            for _ in 0..cfg.queries {
                let a: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                let th = [a.cos(), a.sin()];
                let corners = [0.0, th[0], th[1], th[0] + th[1]];
                let lo = corners.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = corners.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let b = lo + rng.random::<f64>() * (hi - lo);
                let t1 = Instant::now();
                let est = t.query_sum([th[0], th[1]], b)?;
                qns += t1.elapsed().as_nanos();
                let exact: f64 = pts.iter().map(|q| p.apply((b - th[0] * q.x[0] - th[1] * q.x[1]).max(0.0))).sum();
                rel.push(rel_of(est, exact));
                err.push((est - exact).abs() / n);
            }
            Ok(Cell {
                space: t.space_words(),
                rel,
                err,
                build_ns,
                query_ns: (qns / cfg.queries.max(1) as u128) as u64,
            })
        }
        Algorithm::Sketch(b) => {
            let xs: Vec<f64> = pts.iter().map(|q| q.x[0]).collect();
            let t0 = Instant::now();
            let (sk, space) = sketch_1d(b, &xs, eps, p, cfg.w, seed)?;
            let build_ns = t0.elapsed().as_nanos() as u64;
            let mut rel = Vec::new();
            let mut err = Vec::new();
            let mut qns = 0u128;
            for _ in 0..cfg.queries {
                let q: f64 = rng.random::<f64>() * 1.2;
                let t1 = Instant::now();
                let est = sk.left_sum(q)?;
                qns += t1.elapsed().as_nanos();
                let exact = left_sum(&xs, q, p);
                let r = if exact == 0.0 && est == 0.0 { 0.0 } else { rel_of(est, exact) };
                rel.push(r);
                err.push(if b.is_additive() { (est - exact).abs() / n } else { r });
            }
            Ok(Cell {
                space,
                rel,
                err,
                build_ns,
                query_ns: (qns / cfg.queries.max(1) as u128) as u64,
            })
        }
    }
}

/// Runs every (algorithm, ε, seed) cell and aggregates one row per
/// (algorithm, ε). Cells run in parallel; row order follows the config.
pub fn bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.n == 0 || cfg.seeds == 0 {
        return Err(invalid("n/seeds", "must be positive"));
    }
    if (cfg.n as u64).saturating_mul(cfg.queries as u64) > cfg.oracle_budget {
        return Err(invalid(
            "n",
            format!("oracle needs {} evaluations per cell, above the budget {}", cfg.n * cfg.queries, cfg.oracle_budget),
        ));
    }
    for &a in &cfg.algorithms {
        if !a.supports(cfg.p) {
            return Err(invalid("p", format!("{} supports only p = 1", a.name())));
        }
    }
    let mut jobs = Vec::new();
    for &a in &cfg.algorithms {
        for &e in &cfg.epsilons {
            for s in 0..cfg.seeds {
                jobs.push((a, e, cfg.seed.wrapping_add(s)));
            }
        }
    }
    let cells = jobs
        .par_iter()
        .map(|&(a, e, s)| run_cell(cfg, a, e, s))
        .collect::<Result<Vec<_>>>()?;
    let per = cfg.seeds as usize;
    Ok(jobs
        .chunks(per)
        .zip(cells.chunks(per))
        .map(|(job, cs)| {
            let (alg, eps, _) = job[0];
            let rel: Vec<f64> = cs.iter().flat_map(|c| c.rel.iter().copied()).collect();
            let mut err: Vec<f64> = cs.iter().flat_map(|c| c.err.iter().copied()).collect();
            err.sort_by(f64::total_cmp);
            let k = err.len().max(1);
            BenchRow {
                algorithm: alg.name().into(),
                epsilon: eps,
                p: cfg.p.as_u8(),
                space_words: cs.iter().map(|c| c.space).max().unwrap_or(0),
                mean_rel_err: rel.iter().sum::<f64>() / rel.len().max(1) as f64,
                p95_err: err.get(((k as f64 * 0.95).ceil() as usize).saturating_sub(1)).copied().unwrap_or(0.0),
                max_err: err.last().copied().unwrap_or(0.0),
                success_rate: err.iter().filter(|&&e| e <= eps).count() as f64 / k as f64,
                build_ns: cs.iter().map(|c| c.build_ns).sum::<u64>() / per as u64,
                query_ns: cs.iter().map(|c| c.query_ns).sum::<u64>() / per as u64,
            }
        })
        .collect())
}

pub fn write_rows<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| HskError::Format(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// Sweep of the streaming sampling constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrateConfig {
    pub epsilon: f64,
    pub n: usize,
    pub w: u64,
    pub seeds: u64,
    pub queries: usize,
    /// Relative error allowed is `kappa·ε`.
    pub kappa: f64,
    /// Fraction of (query, seed) pairs that must meet the bound.
    pub target: f64,
    pub c1: Vec<f64>,
    pub c2: Vec<f64>,
    pub seed: u64,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            n: 20_000,
            w: 1 << 20,
            seeds: 5,
            queries: 100,
            kappa: 1.0,
            target: 0.95,
            c1: vec![2.0, 4.0, 8.0],
            c2: vec![8.0, 16.0, 32.0],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrateRow {
    pub c1: f64,
    pub c2: f64,
    pub space_words: usize,
    pub success_rate: f64,
    pub p95_rel_err: f64,
    pub meets_target: bool,
}

/// Measures every `(C₁, C₂)` pair on integer streams and returns the rows
/// plus the index of the smallest-space pair meeting the target.
pub fn calibrate(cfg: &CalibrateConfig) -> Result<(Vec<CalibrateRow>, Option<usize>)> {
    let pairs: Vec<(f64, f64)> = cfg.c1.iter().flat_map(|&a| cfg.c2.iter().map(move |&b| (a, b))).collect();
    let rows = pairs
        .par_iter()
        .map(|&(c1, c2)| {
            let mut rels = Vec::new();
            let mut space = 0;
            for s in 0..cfg.seeds {
                let seed = cfg.seed.wrapping_add(s);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let xs: Vec<f64> = (0..cfg.n).map(|_| rng.random_range(1..=cfg.w) as f64).collect();
                let params = SketchParams {
                    epsilon: cfg.epsilon,
                    w: cfg.w,
                    n_hint: cfg.n as u64,
                    c1,
                    c2,
                    seed,
                    ..SketchParams::default()
                };
                let mut sk = MultStream1D::new(params, MultOptions::default())?;
                for &x in &xs {
                    sk.update(x)?;
                }
                sk.freeze();
                space = space.max(sk.space_words());
                for _ in 0..cfg.queries {
                    let q = rng.random_range(1..=cfg.w) as f64;
                    let exact = left_sum(&xs, q, Power::Linear);
                    let est = sk.query(q)?;
                    rels.push(if exact == 0.0 { est.abs() } else { (est - exact).abs() / exact });
                }
            }
            rels.sort_by(f64::total_cmp);
            let ok = rels.iter().filter(|&&r| r <= cfg.kappa * cfg.epsilon).count() as f64 / rels.len().max(1) as f64;
            Ok(CalibrateRow {
                c1,
                c2,
                space_words: space,
                success_rate: ok,
                p95_rel_err: rels[((rels.len() as f64 * 0.95).ceil() as usize).saturating_sub(1)],
                meets_target: ok >= cfg.target,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.meets_target)
        .min_by_key(|(_, r)| r.space_words)
        .map(|(i, _)| i);
    Ok((rows, best))
}
